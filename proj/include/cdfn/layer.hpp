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

#include <cstddef>
#include <string_view>
#include <vector>

#include "cdfn/kmeans.hpp"
#include "cdfn/tensor.hpp"

namespace cdfn {

enum class Rectifier { kAbs, kOnOff };

std::string_view to_string(Rectifier r);
Rectifier parse_rectifier(std::string_view s);

/// Per-layer stage parameters. Filters themselves live in a FilterBank.
struct LayerConfig {
  Rectifier rectifier = Rectifier::kAbs;
  std::size_t pool_side = 12;
  std::size_t pool_stride = 12;
  double pool_alpha = 1.0;
  std::size_t lcn_window = 9;
  double lcn_sigma = 9.0 / 4.0;
  bool dense_preprocess = true;

  void validate() const;
};

struct GroupAssignment {
  std::vector<std::vector<std::size_t>> groups;

  std::size_t group_size() const { return groups.empty() ? 0 : groups.front().size(); }
};

struct MapShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t depth = 0;

  bool operator==(const MapShape&) const = default;
};

/// Dense dot product of every filter with every p x p x depth window,
/// stride 1. With dense_preprocess each window is first patch-normalized
/// and whitened with bank.whitening.
FeatureMapSet convolve_valid(const FeatureMapSet& input, const FilterBank& bank,
                             bool dense_preprocess);

FeatureMapSet rectify_abs(const FeatureMapSet& x);

/// Depth doubles: map 2i holds max(0, x_i) and map 2i+1 holds max(0, -x_i).
FeatureMapSet rectify_on_off(const FeatureMapSet& x);

/// S x S Gaussian, row-major, summing to 1 over the window.
std::vector<double> gaussian_window(std::size_t window, double sigma);

/// Removes the Gaussian-weighted local mean taken jointly over all maps
/// (weights normalized over depth and space). Borders are reflected.
FeatureMapSet lcn_subtractive(const FeatureMapSet& x, std::size_t window, double sigma);

/// Divides by max(c, local std), the local std pooled over depth with the
/// same weights and c its mean over the image. An all-zero input maps to
/// all zeros.
FeatureMapSet lcn_divisive(const FeatureMapSet& v, std::size_t window, double sigma);

/// (sum x^alpha)^(1/alpha) over p_pool x p_pool windows; partial windows at
/// the right and bottom edges are dropped. Integer alpha accepts signed
/// inputs, taking the real root of the sum; any other alpha needs x >= 0.
FeatureMapSet pool(const FeatureMapSet& x, std::size_t p_pool, std::size_t stride, double alpha);

/// Random partition of [0, k1) into k1 / n_k groups of n_k.
GroupAssignment make_groups(std::size_t k1, std::size_t n_k, SeededRng& rng);

/// convolve -> rectify -> subtractive LCN -> divisive LCN -> pool.
FeatureMapSet run_layer(const FeatureMapSet& input, const FilterBank& bank,
                        const LayerConfig& cfg);

std::size_t pooled_extent(std::size_t extent, std::size_t p_pool, std::size_t stride);

/// Closed-form shapes for run_layer; throws the same errors run_layer would
/// for windows that do not fit.
MapShape conv_output_shape(const MapShape& input, std::size_t patch_side, std::size_t filters);
MapShape layer_output_shape(const MapShape& input, std::size_t patch_side, std::size_t filters,
                            const LayerConfig& cfg);

}  // namespace cdfn
