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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "cdfn/svm.hpp"
#include "cdfn/tensor.hpp"
#include "support/check.hpp"

using namespace cdfn;

namespace {

// Ten 2D points, class 0 left of x = -0.5 and class 1 right of x = 0.5.
DescriptorSet separable_toy() {
  const double pts[10][2] = {{-2.0, 0.3}, {-1.5, -1.0}, {-0.9, 0.8}, {-1.2, 2.0}, {-3.0, -0.5},
                             {0.7, 0.1},  {1.4, -1.3},  {2.2, 0.9}, {0.9, 1.8},  {3.1, -0.2}};
  DescriptorSet s;
  s.data.resize(2, 10);
  for (int i = 0; i < 10; ++i) {
    s.data(0, i) = pts[i][0];
    s.data(1, i) = pts[i][1];
    s.labels.push_back(i < 5 ? 0 : 1);
    s.image_ids.push_back(i);
  }
  return s;
}

DescriptorSet random_set(std::size_t n, std::size_t dim, int classes, std::uint64_t seed) {
  SeededRng rng(seed);
  DescriptorSet s;
  s.data.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (std::size_t d = 0; d < dim; ++d) {
      const double centre = (d % static_cast<std::size_t>(classes)) == static_cast<std::size_t>(label) ? 1.0 : 0.0;
      s.data(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = centre + 1.5 * (rng.uniform01() - 0.5);
    }
    s.labels.push_back(label);
    s.image_ids.push_back(static_cast<std::int64_t>(i));
  }
  return s;
}

DescriptorSet duplicated(const DescriptorSet& s) {
  DescriptorSet d;
  d.data.resize(s.data.rows(), 2 * s.data.cols());
  d.data << s.data, s.data;
  d.labels = s.labels;
  d.labels.insert(d.labels.end(), s.labels.begin(), s.labels.end());
  d.image_ids = s.image_ids;
  d.image_ids.insert(d.image_ids.end(), s.image_ids.begin(), s.image_ids.end());
  return d;
}

std::vector<int> predict_all(const SvmModel& m, const DescriptorSet& s) {
  const Eigen::MatrixXd scores = score_all(m, s);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < scores.cols(); ++i) {
    std::vector<double> col(scores.col(i).data(), scores.col(i).data() + scores.rows());
    out.push_back(predict(col));
  }
  return out;
}

}  // namespace

TEST_CASE("separable toy is classified perfectly") {
  const DescriptorSet s = separable_toy();
  const SvmModel m = train_ova_svm(s);
  CHECK(m.num_classes() == 2);
  CHECK(predict_all(m, s) == s.labels);
}

TEST_CASE("single-class labels are degenerate") {
  DescriptorSet s = separable_toy();
  for (auto& l : s.labels) l = 3;
  CHECK_ERROR_CODE(train_ova_svm(s), ErrorCode::kDegenerateLabels);
}

TEST_CASE("duplicating the data equals doubling C") {
  // Each copy adds its loss term again, so the duplicated problem at C is
  // the original problem at 2C.
  const DescriptorSet s = random_set(60, 5, 3, 1);
  const DescriptorSet d = duplicated(s);
  SvmOptions tight;
  tight.tolerance = 1e-12;
  tight.max_epochs = 200000;
  tight.reg_c = 0.5;
  const SvmModel dup = train_ova_svm(d, tight);
  SvmOptions doubled = tight;
  doubled.reg_c = 1.0;
  const SvmModel orig = train_ova_svm(s, doubled);
  CHECK((dup.weights - orig.weights).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((dup.biases - orig.biases).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((score_all(dup, s) - score_all(orig, s)).cwiseAbs().maxCoeff() <= 1e-6);

  // At a fixed C the decisions on the training data do not change.
  const SvmModel same_c = train_ova_svm(s, tight);
  CHECK(predict_all(dup, s) == predict_all(same_c, s));
}

TEST_CASE("dual objective is non-increasing per epoch") {
  const DescriptorSet s = random_set(120, 8, 4, 2);
  std::vector<BinarySvmResult> diag;
  SvmOptions opt;
  opt.tolerance = 1e-8;
  train_ova_svm(s, opt, &diag);
  REQUIRE(diag.size() == 4);
  for (const auto& r : diag) {
    CHECK(r.converged);
    for (std::size_t e = 1; e < r.dual_objective.size(); ++e) {
      CHECK(r.dual_objective[e] <= r.dual_objective[e - 1] + 1e-12 * std::abs(r.dual_objective[e - 1]));
    }
  }
}

TEST_CASE("binary solver reaches the primal optimum") {
  // At the optimum w = sum_i alpha_i y_i x_i and the primal objective
  // equals minus the dual objective.
  const DescriptorSet s = random_set(50, 3, 2, 3);
  std::vector<double> y;
  for (int l : s.labels) y.push_back(l == 0 ? 1.0 : -1.0);
  const double c = 0.7;
  const BinarySvmResult r = train_binary_l2svm(s.data, y, c, 100000, 1e-12);
  double primal = 0.5 * (r.weights.squaredNorm() + r.bias * r.bias);
  for (Eigen::Index i = 0; i < s.data.cols(); ++i) {
    const double margin = 1.0 - y[static_cast<std::size_t>(i)] * (r.weights.dot(s.data.col(i)) + r.bias);
    if (margin > 0) primal += c * margin * margin;
  }
  CHECK(primal == doctest::Approx(-r.dual_objective.back()).epsilon(1e-8));
}

TEST_CASE("score examples") {
  SvmModel m;
  m.weights = Eigen::MatrixXd::Zero(3, 4);
  m.biases = Eigen::Vector3d{0.5, -1.0, 2.0};
  m.feature_mean = Eigen::VectorXd::Zero(4);
  m.feature_std = Eigen::VectorXd::Ones(4);
  const std::vector<double> d{1, 2, 3, 4};
  const ScoreVector zero = score(m, d);
  CHECK(zero.scores == std::vector<double>{0.5, -1.0, 2.0});
  CHECK_FALSE(zero.normalized);

  m.weights(1, 2) = 1.0;
  CHECK(score(m, d).scores[1] == 3.0 - 1.0);

  CHECK_ERROR_CODE(score(m, std::vector<double>{1, 2}), ErrorCode::kDim);
}

TEST_CASE("scores match an explicit dot product") {
  const DescriptorSet s = random_set(80, 6, 3, 4);
  const SvmModel m = train_ova_svm(s);
  const Eigen::MatrixXd all = score_all(m, s);
  for (std::size_t i = 0; i < s.count(); ++i) {
    std::vector<double> d(s.dim());
    for (std::size_t k = 0; k < s.dim(); ++k) d[k] = s.data(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    const ScoreVector v = score(m, d);
    for (std::size_t c = 0; c < 3; ++c) {
      double acc = m.biases[static_cast<Eigen::Index>(c)];
      for (std::size_t k = 0; k < s.dim(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        acc += m.weights(static_cast<Eigen::Index>(c), kk) * (d[k] - m.feature_mean[kk]) / m.feature_std[kk];
      }
      CHECK(std::abs(v.scores[c] - acc) <= 1e-12);
      CHECK(std::abs(all(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) - acc) <= 1e-12);
    }
  }
}

TEST_CASE("score is linear in the standardized descriptor") {
  const DescriptorSet s = random_set(40, 4, 2, 5);
  const SvmModel m = train_ova_svm(s);
  const std::vector<double> a{0.1, 0.5, -0.2, 1.0}, b{1.0, -1.0, 0.3, 0.0};
  std::vector<double> mix(4);
  for (int i = 0; i < 4; ++i) mix[static_cast<std::size_t>(i)] = 0.25 * a[static_cast<std::size_t>(i)] + 0.75 * b[static_cast<std::size_t>(i)];
  const auto sa = score(m, a).scores, sb = score(m, b).scores, sm = score(m, mix).scores;
  for (std::size_t c = 0; c < sa.size(); ++c) {
    CHECK(sm[c] == doctest::Approx(0.25 * sa[c] + 0.75 * sb[c]).epsilon(1e-12));
  }
}

TEST_CASE("predict examples and monotone invariance") {
  CHECK(predict(std::vector<double>{0.1, 0.9, 0.3}) == 1);
  CHECK(predict(std::vector<double>{0.5, 0.5}) == 0);
  CHECK(predict(std::vector<double>{7.0}) == 0);
  SeededRng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(5);
    for (auto& v : s) v = rng.uniform01() * 4 - 2;
    std::vector<double> transformed = s;
    for (auto& v : transformed) v = std::exp(3 * v) + 10;
    CHECK(predict(s) == predict(transformed));
  }
}

TEST_CASE("standardization floors tiny deviations") {
  DescriptorSet s = separable_toy();
  s.data.conservativeResize(3, Eigen::NoChange);
  s.data.row(2).setConstant(5.0);
  const SvmModel m = train_ova_svm(s);
  CHECK(m.feature_std[2] == 1e-8);
  CHECK(m.weights.allFinite());
}

TEST_CASE("cross-validated C comes from the grid") {
  const DescriptorSet s = random_set(100, 5, 2, 7);
  const double c = select_reg_c(s, SvmOptions{}, kDefaultRegGrid);
  CHECK(std::find(std::begin(kDefaultRegGrid), std::end(kDefaultRegGrid), c) != std::end(kDefaultRegGrid));
}

TEST_CASE("training is deterministic") {
  const DescriptorSet s = random_set(90, 7, 3, 8);
  const SvmModel a = train_ova_svm(s);
  const SvmModel b = train_ova_svm(s);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
}
