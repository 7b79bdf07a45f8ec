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

#include <span>
#include <vector>

#include <Eigen/Core>

#include "cdfn/tensor.hpp"

namespace cdfn {

/// Unrolled volume patches, one per column. Within a column the order is
/// depth-major, then row, then column of the p x p window.
struct PatchMatrix {
  Eigen::MatrixXd data;
  std::size_t patch_side = 0;
  std::size_t depth = 0;

  std::size_t dim() const noexcept { return patch_side * patch_side * depth; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(data.cols()); }
};

struct ZcaTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd matrix;
  double epsilon = 0.0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
};

/// Samples n_patches windows uniformly over (image, row, column), with
/// replacement.
PatchMatrix extract_patches(std::span<const FeatureMapSet> sets, std::size_t p,
                            std::size_t n_patches, SeededRng& rng);

/// Every valid p x p window of one set, stride 1, in row-major position
/// order (column index = row * (width - p + 1) + col).
PatchMatrix all_patches(const FeatureMapSet& set, std::size_t p);

/// Divide by max |x_i|, then subtract the mean. Zero patches stay zero.
std::vector<double> normalize_patch(std::span<const double> patch);

/// In-place normalize_patch on every column.
void normalize_columns(Eigen::MatrixXd& patches);

ZcaTransform fit_zca(const PatchMatrix& patches, double epsilon);

PatchMatrix apply_zca(const ZcaTransform& t, const PatchMatrix& patches);

/// Population covariance (1/N) of the columns.
Eigen::MatrixXd column_covariance(const Eigen::MatrixXd& data);

}  // namespace cdfn
