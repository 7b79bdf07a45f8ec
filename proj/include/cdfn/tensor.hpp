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
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "cdfn/error.hpp"

namespace cdfn {

/// Stack of 2D feature maps for one image. Storage is depth-major, then
/// row-major: value(d, r, c) lives at ((d * height) + r) * width + c.
class FeatureMapSet {
 public:
  FeatureMapSet() = default;
  FeatureMapSet(std::size_t height, std::size_t width, std::size_t depth,
                std::int64_t source_image_id = 0);
  FeatureMapSet(std::size_t height, std::size_t width, std::size_t depth,
                std::vector<double> values, std::int64_t source_image_id = 0);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t map_size() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::int64_t source_image_id() const noexcept { return source_image_id_; }
  void set_source_image_id(std::int64_t id) noexcept { source_image_id_ = id; }

  double operator()(std::size_t d, std::size_t r, std::size_t c) const {
    return values_[(d * height_ + r) * width_ + c];
  }
  double& operator()(std::size_t d, std::size_t r, std::size_t c) {
    return values_[(d * height_ + r) * width_ + c];
  }

  std::span<const double> map(std::size_t d) const {
    return {values_.data() + d * map_size(), map_size()};
  }
  std::span<double> map(std::size_t d) { return {values_.data() + d * map_size(), map_size()}; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool operator==(const FeatureMapSet&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t depth_ = 0;
  std::int64_t source_image_id_ = 0;
  std::vector<double> values_;
};

/// Maps at the given depths, in the given order.
FeatureMapSet tensor_slice(const FeatureMapSet& set, std::span<const std::size_t> depth_indices);

/// Stacks sets with equal spatial dims along depth.
FeatureMapSet concat_depth(std::span<const FeatureMapSet> sets);

/// Throws kNonFiniteValue naming the first offending (depth, row, col).
void assert_finite(const FeatureMapSet& set);

/// Deterministic generator shared by every stochastic step. All draws are
/// computed from the raw std::mt19937_64 output.
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithmId = "mt19937_64";

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Rejection sampling, so unbiased.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Seed of an independent child stream; used to split work without
  /// sharing one generator.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Fisher-Yates with SeededRng::uniform_index.
template <typename T>
void shuffle(std::vector<T>& items, SeededRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace cdfn
