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

#include "cdfn/kmeans.hpp"

#include <algorithm>
#include <limits>

namespace cdfn {
namespace {

constexpr Eigen::Index kChunk = 4096;

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i,
                        const Eigen::MatrixXd& centroids, Eigen::Index j) {
  return (points.col(i) - centroids.col(j)).squaredNorm();
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, std::size_t k, SeededRng& rng) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd centroids(points.rows(), static_cast<Eigen::Index>(k));
  auto first = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  centroids.col(0) = points.col(first);

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(points, i, centroids, 0);

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (const double v : d2) total += v;
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave the scan without a pick; take the last candidate.
      if (acc <= target) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    }
    const auto col = static_cast<Eigen::Index>(c);
    centroids.col(col) = points.col(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points, i, centroids, col));
    }
  }
  return centroids;
}

double assigned_sse(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                    const std::vector<std::size_t>& assignments) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    total += squared_distance(points, i, centroids,
                              static_cast<Eigen::Index>(assignments[static_cast<std::size_t>(i)]));
  }
  return total;
}

}  // namespace

void FilterBank::validate() const {
  if (filters.cols() < 1) throw Error(ErrorCode::kDim, "filter bank is empty");
  if (static_cast<std::size_t>(filters.rows()) != dim()) {
    throw Error(ErrorCode::kDim, "filter length does not match patch_side^2 * depth");
  }
  if (whitening.dim() != dim() ||
      static_cast<std::size_t>(whitening.matrix.rows()) != dim() ||
      static_cast<std::size_t>(whitening.matrix.cols()) != dim()) {
    throw Error(ErrorCode::kDim, "whitening transform dimension does not match filters");
  }
  if (!filters.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "filter bank");
}

std::vector<std::size_t> nearest_centroids(const Eigen::MatrixXd& points,
                                           const Eigen::MatrixXd& centroids) {
  if (points.rows() != centroids.rows()) {
    throw Error(ErrorCode::kDim, "point and centroid dimensions differ");
  }
  const Eigen::Index n = points.cols();
  const Eigen::RowVectorXd c_norm = centroids.colwise().squaredNorm();
  std::vector<std::size_t> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    // ||c||^2 - 2 c.x; the ||x||^2 term does not change the argmin.
    Eigen::MatrixXd score = -2.0 * (points.middleCols(start, len).transpose() * centroids);
    score.rowwise() += c_norm;
    for (Eigen::Index i = 0; i < len; ++i) {
      Eigen::Index best = 0;
      double best_v = score(i, 0);
      for (Eigen::Index j = 1; j < score.cols(); ++j) {
        if (score(i, j) < best_v) {
          best_v = score(i, j);
          best = j;
        }
      }
      out[static_cast<std::size_t>(start + i)] = static_cast<std::size_t>(best);
    }
  }
  return out;
}

KMeansResult kmeans(const PatchMatrix& patches, std::size_t k, std::size_t max_iters,
                    SeededRng& rng) {
  const Eigen::MatrixXd& x = patches.data;
  const auto n = static_cast<std::size_t>(x.cols());
  if (k == 0 || k > n) {
    throw Error(ErrorCode::kInvalidK,
                "k=" + std::to_string(k) + " with " + std::to_string(n) + " patches");
  }
  if (max_iters == 0) throw Error(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "k-means input");

  KMeansResult result;
  result.centroids = kmeans_plus_plus(x, k, rng);
  result.assignments = nearest_centroids(x, result.centroids);

  const Eigen::Index dim = x.rows();
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // Update step, summed in point order.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(k));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.col(static_cast<Eigen::Index>(result.assignments[i])) += x.col(static_cast<Eigen::Index>(i));
      ++counts[result.assignments[i]];
    }
    std::vector<double> dist;  // filled lazily for empty-cluster repair
    for (std::size_t c = 0; c < k; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      if (counts[c] > 0) {
        result.centroids.col(col) = sums.col(col) / static_cast<double>(counts[c]);
        continue;
      }
      if (dist.empty()) {
        dist.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          dist[i] = squared_distance(x, static_cast<Eigen::Index>(i), result.centroids,
                                     static_cast<Eigen::Index>(result.assignments[i]));
        }
      }
      const auto far = static_cast<std::size_t>(std::ranges::max_element(dist) - dist.begin());
      result.centroids.col(col) = x.col(static_cast<Eigen::Index>(far));
      dist[far] = 0.0;
    }

    auto next = nearest_centroids(x, result.centroids);
    result.sse_history.push_back(assigned_sse(x, result.centroids, next));
    result.iterations = iter + 1;
    const bool unchanged = next == result.assignments;
    result.assignments = std::move(next);
    if (unchanged) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double sse(const PatchMatrix& patches, const Eigen::MatrixXd& centroids) {
  if (centroids.cols() == 0) throw Error(ErrorCode::kDim, "no centroids");
  const auto assignments = nearest_centroids(patches.data, centroids);
  return assigned_sse(patches.data, centroids, assignments);
}

double sse(const PatchMatrix& patches, const FilterBank& bank) {
  return sse(patches, bank.filters);
}

}  // namespace cdfn
