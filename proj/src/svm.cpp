// Copyright 2026 The cdfn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cdfn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace cdfn {

void DescriptorSet::validate() const {
  if (labels.size() != count() || image_ids.size() != count()) {
    throw Error(ErrorCode::kDim, "descriptor, label and id counts differ");
  }
  if (!data.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "descriptor values");
}

BinarySvmResult train_binary_l2svm(const Eigen::MatrixXd& x, std::span<const double> y,
                                   double reg_c, std::size_t max_epochs, double tolerance) {
  const Eigen::Index n = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) {
    throw Error(ErrorCode::kDim, "sample and target counts differ");
  }
  if (!(reg_c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "reg_c must be > 0");
  const double diag = 0.5 / reg_c;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.rows());
  double b = 0.0;
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> q_ii(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) q_ii[i] = x.col(i).squaredNorm() + 1.0 + diag;

  BinarySvmResult result;
  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    double max_pg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double yi = y[ui];
      const double g = yi * (w.dot(x.col(i)) + b) - 1.0 + diag * alpha[ui];
      const double pg = alpha[ui] == 0.0 ? std::min(g, 0.0) : g;
      max_pg = std::max(max_pg, std::abs(pg));
      if (pg == 0.0) continue;
      const double old = alpha[ui];
      alpha[ui] = std::max(old - g / q_ii[ui], 0.0);
      const double step = (alpha[ui] - old) * yi;
      w += step * x.col(i);
      b += step;
    }
    double dual = 0.5 * (w.squaredNorm() + b * b);
    for (const double a : alpha) dual += 0.5 * diag * a * a - a;
    result.dual_objective.push_back(dual);
    result.epochs = epoch + 1;
    if (max_pg < tolerance) {
      result.converged = true;
      break;
    }
  }
  result.weights = std::move(w);
  result.bias = b;
  return result;
}

SvmModel train_ova_svm(const DescriptorSet& set, const SvmOptions& options,
                       std::vector<BinarySvmResult>* diagnostics) {
  set.validate();
  if (set.count() == 0) throw Error(ErrorCode::kDegenerateLabels, "no training descriptors");
  const std::set<int> present(set.labels.begin(), set.labels.end());
  if (*present.begin() < 0) throw Error(ErrorCode::kInvalidArgument, "negative class label");
  if (present.size() < 2) {
    throw Error(ErrorCode::kDegenerateLabels, "training labels contain a single class");
  }
  const int classes = options.num_classes > 0 ? options.num_classes : *present.rbegin() + 1;
  if (*present.rbegin() >= classes) {
    throw Error(ErrorCode::kInvalidArgument, "label exceeds configured class count");
  }

  SvmModel model;
  model.reg_c = options.reg_c;
  const auto dim = static_cast<Eigen::Index>(set.dim());
  const double n = static_cast<double>(set.count());
  if (options.standardize) {
    model.feature_mean = set.data.rowwise().mean();
    const Eigen::MatrixXd centered = set.data.colwise() - model.feature_mean;
    model.feature_std = (centered.rowwise().squaredNorm() / n).cwiseSqrt().cwiseMax(1e-8);
  } else {
    model.feature_mean = Eigen::VectorXd::Zero(dim);
    model.feature_std = Eigen::VectorXd::Ones(dim);
  }
  const Eigen::MatrixXd x =
      (set.data.colwise() - model.feature_mean).array().colwise() / model.feature_std.array();

  model.weights.resize(classes, dim);
  model.biases.resize(classes);
  std::vector<BinarySvmResult> results(static_cast<std::size_t>(classes));
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < classes; ++c) {
    std::vector<double> y(set.count());
    for (std::size_t i = 0; i < set.count(); ++i) y[i] = set.labels[i] == c ? 1.0 : -1.0;
    results[static_cast<std::size_t>(c)] =
        train_binary_l2svm(x, y, options.reg_c, options.max_epochs, options.tolerance);
  }
  for (int c = 0; c < classes; ++c) {
    model.weights.row(c) = results[static_cast<std::size_t>(c)].weights.transpose();
    model.biases[c] = results[static_cast<std::size_t>(c)].bias;
  }
  if (diagnostics) *diagnostics = std::move(results);
  return model;
}

ScoreVector score(const SvmModel& model, std::span<const double> descriptor) {
  if (descriptor.size() != model.dim()) {
    throw Error(ErrorCode::kDim, "descriptor length " + std::to_string(descriptor.size()) +
                                     " does not match model dimension " +
                                     std::to_string(model.dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> d(descriptor.data(),
                                            static_cast<Eigen::Index>(descriptor.size()));
  const Eigen::VectorXd z = (d - model.feature_mean).cwiseQuotient(model.feature_std);
  const Eigen::VectorXd s = model.weights * z + model.biases;
  return {std::vector<double>(s.data(), s.data() + s.size()), false};
}

Eigen::MatrixXd score_all(const SvmModel& model, const DescriptorSet& set) {
  if (set.dim() != model.dim()) {
    throw Error(ErrorCode::kDim, "descriptor dimension does not match model");
  }
  const Eigen::MatrixXd z =
      (set.data.colwise() - model.feature_mean).array().colwise() / model.feature_std.array();
  return (model.weights * z).colwise() + model.biases;
}

int predict(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<int>(best);
}

double select_reg_c(const DescriptorSet& set, const SvmOptions& base,
                    std::span<const double> grid, std::size_t folds) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reg_c grid");
  if (folds < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  set.validate();
  SvmOptions options = base;
  if (options.num_classes == 0) {
    options.num_classes = *std::max_element(set.labels.begin(), set.labels.end()) + 1;
  }

  auto subset = [&](std::size_t fold, bool held_out) {
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < set.count(); ++i) {
      const auto f = static_cast<std::size_t>(std::abs(set.image_ids[i])) % folds;
      if ((f == fold) == held_out) cols.push_back(static_cast<Eigen::Index>(i));
    }
    DescriptorSet out;
    out.data.resize(set.data.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.data.col(static_cast<Eigen::Index>(j)) = set.data.col(cols[j]);
      out.labels.push_back(set.labels[static_cast<std::size_t>(cols[j])]);
      out.image_ids.push_back(set.image_ids[static_cast<std::size_t>(cols[j])]);
    }
    return out;
  };

  double best_c = grid.front();
  double best_acc = -1.0;
  for (const double c : grid) {
    options.reg_c = c;
    std::size_t correct = 0;
    std::size_t total = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      const DescriptorSet train = subset(f, false);
      const DescriptorSet test = subset(f, true);
      if (test.count() == 0) continue;
      if (std::set<int>(train.labels.begin(), train.labels.end()).size() < 2) continue;
      const SvmModel model = train_ova_svm(train, options);
      const Eigen::MatrixXd s = score_all(model, test);
      for (std::size_t i = 0; i < test.count(); ++i) {
        const auto col = s.col(static_cast<Eigen::Index>(i));
        correct += predict(std::span<const double>(col.data(), static_cast<std::size_t>(col.size()))) ==
                           test.labels[i]
                       ? 1
                       : 0;
        ++total;
      }
    }
    const double acc = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    if (acc > best_acc) {
      best_acc = acc;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace cdfn
