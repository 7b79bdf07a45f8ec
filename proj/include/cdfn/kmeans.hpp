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

#include <vector>

#include <Eigen/Core>

#include "cdfn/patch.hpp"

namespace cdfn {

/// K learned filters (one per column) together with the whitening the
/// filters were trained in.
struct FilterBank {
  Eigen::MatrixXd filters;  // dim x K
  std::size_t patch_side = 0;
  std::size_t depth = 0;
  ZcaTransform whitening;
  int layer_index = 0;

  std::size_t count() const noexcept { return static_cast<std::size_t>(filters.cols()); }
  std::size_t dim() const noexcept { return patch_side * patch_side * depth; }

  /// Throws kDim / kNonFiniteValue when the invariants do not hold.
  void validate() const;
};

struct KMeansResult {
  Eigen::MatrixXd centroids;  // dim x k
  std::vector<std::size_t> assignments;
  /// Nearest-centroid SSE after each Lloyd iteration.
  std::vector<double> sse_history;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd iterations from a k-means++ start. Stops after max_iters or once
/// assignments repeat. Empty clusters are re-seeded with the point farthest
/// from its centroid.
KMeansResult kmeans(const PatchMatrix& patches, std::size_t k, std::size_t max_iters,
                    SeededRng& rng);

/// Sum over columns of the squared distance to the nearest centroid.
double sse(const PatchMatrix& patches, const Eigen::MatrixXd& centroids);
double sse(const PatchMatrix& patches, const FilterBank& bank);

/// Nearest centroid per column, lowest index on ties.
std::vector<std::size_t> nearest_centroids(const Eigen::MatrixXd& points,
                                           const Eigen::MatrixXd& centroids);

}  // namespace cdfn
