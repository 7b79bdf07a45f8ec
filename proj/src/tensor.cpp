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

#include "cdfn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cdfn {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIndex: return "IndexError";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kInvalidPatchSize: return "InvalidPatchSize";
    case ErrorCode::kDim: return "DimError";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kInvalidWindow: return "InvalidWindow";
    case ErrorCode::kInvalidGrouping: return "InvalidGrouping";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kAlignment: return "AlignmentError";
    case ErrorCode::kContract: return "ContractError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

FeatureMapSet::FeatureMapSet(std::size_t height, std::size_t width, std::size_t depth,
                             std::int64_t source_image_id)
    : FeatureMapSet(height, width, depth, std::vector<double>(height * width * depth, 0.0),
                    source_image_id) {}

FeatureMapSet::FeatureMapSet(std::size_t height, std::size_t width, std::size_t depth,
                             std::vector<double> values, std::int64_t source_image_id)
    : height_(height),
      width_(width),
      depth_(depth),
      source_image_id_(source_image_id),
      values_(std::move(values)) {
  if (height == 0 || width == 0 || depth == 0) {
    throw Error(ErrorCode::kDim, "feature map dimensions must be >= 1");
  }
  if (values_.size() != height * width * depth) {
    throw Error(ErrorCode::kDim, "value count does not match height*width*depth");
  }
}

FeatureMapSet tensor_slice(const FeatureMapSet& set, std::span<const std::size_t> depth_indices) {
  if (depth_indices.empty()) throw Error(ErrorCode::kIndex, "empty depth index list");
  FeatureMapSet out(set.height(), set.width(), depth_indices.size(), set.source_image_id());
  for (std::size_t i = 0; i < depth_indices.size(); ++i) {
    const std::size_t d = depth_indices[i];
    if (d >= set.depth()) {
      throw Error(ErrorCode::kIndex, "depth index " + std::to_string(d) + " out of range [0, " +
                                         std::to_string(set.depth()) + ")");
    }
    std::ranges::copy(set.map(d), out.map(i).begin());
  }
  return out;
}

FeatureMapSet concat_depth(std::span<const FeatureMapSet> sets) {
  if (sets.empty()) throw Error(ErrorCode::kDim, "nothing to concatenate");
  std::size_t depth = 0;
  for (const auto& s : sets) {
    if (s.height() != sets[0].height() || s.width() != sets[0].width()) {
      throw Error(ErrorCode::kDim, "spatial dims differ in concatenation");
    }
    depth += s.depth();
  }
  std::vector<double> values;
  values.reserve(sets[0].map_size() * depth);
  for (const auto& s : sets) values.insert(values.end(), s.values().begin(), s.values().end());
  return FeatureMapSet(sets[0].height(), sets[0].width(), depth, std::move(values),
                       sets[0].source_image_id());
}

void assert_finite(const FeatureMapSet& set) {
  const auto v = set.values();
  const auto it = std::ranges::find_if(v, [](double x) { return !std::isfinite(x); });
  if (it == v.end()) return;
  const auto offset = static_cast<std::size_t>(it - v.begin());
  const std::size_t d = offset / set.map_size();
  const std::size_t r = (offset % set.map_size()) / set.width();
  const std::size_t c = offset % set.width();
  std::ostringstream msg;
  msg << "value " << *it << " at (depth=" << d << ", row=" << r << ", col=" << c << ")";
  throw Error(ErrorCode::kNonFiniteValue, msg.str());
}

std::uint64_t SeededRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "uniform_index bound must be > 0");
  // Largest multiple of bound representable; reject draws above it.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::uint64_t SeededRng::derive(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cdfn
