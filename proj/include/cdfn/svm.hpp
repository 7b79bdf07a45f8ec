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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cdfn/error.hpp"

namespace cdfn {

/// Descriptors of a dataset, one per column, with their labels and the id
/// of the image each was computed from. Augmented copies share the id of
/// their source image.
struct DescriptorSet {
  Eigen::MatrixXd data;  // dim x count
  std::vector<int> labels;
  std::vector<std::int64_t> image_ids;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(data.rows()); }
  std::size_t count() const noexcept { return static_cast<std::size_t>(data.cols()); }
  void validate() const;
};

struct ScoreVector {
  std::vector<double> scores;
  bool normalized = false;
};

struct SvmOptions {
  double reg_c = 1.0;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-4;  // on the largest projected gradient
  bool standardize = true;
  int num_classes = 0;  // 0: max label + 1
};

/// One-vs-all linear SVM with squared hinge loss. Scores are
/// weights * standardized(x) + biases.
struct SvmModel {
  Eigen::MatrixXd weights;  // classes x dim
  Eigen::VectorXd biases;
  double reg_c = 1.0;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;

  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
};

struct BinarySvmResult {
  Eigen::VectorXd weights;
  double bias = 0.0;
  /// Dual objective after each epoch; non-increasing.
  std::vector<double> dual_objective;
  std::size_t epochs = 0;
  bool converged = false;
};

/// Dual coordinate descent for
///   min_w 1/2 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b))^2
/// with the bias handled as an extra constant-1 feature. Columns of x are
/// samples; y holds +1 / -1. Samples are visited in order every epoch.
BinarySvmResult train_binary_l2svm(const Eigen::MatrixXd& x, std::span<const double> y,
                                   double reg_c, std::size_t max_epochs, double tolerance);

SvmModel train_ova_svm(const DescriptorSet& set, const SvmOptions& options = {},
                       std::vector<BinarySvmResult>* diagnostics = nullptr);

ScoreVector score(const SvmModel& model, std::span<const double> descriptor);

/// classes x count matrix of raw scores.
Eigen::MatrixXd score_all(const SvmModel& model, const DescriptorSet& set);

/// Argmax; the lowest index wins ties.
int predict(std::span<const double> scores);
inline int predict(const ScoreVector& s) { return predict(s.scores); }

/// k-fold cross-validated choice of reg_c from the grid; folds split by
/// image_id modulo k so augmented copies stay with their source. Ties go to
/// the earlier grid entry.
double select_reg_c(const DescriptorSet& set, const SvmOptions& base,
                    std::span<const double> grid, std::size_t folds = 5);

inline constexpr double kDefaultRegGrid[] = {0.01, 0.1, 1.0, 10.0};

}  // namespace cdfn
