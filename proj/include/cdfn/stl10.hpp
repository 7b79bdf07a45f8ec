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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cdfn/tensor.hpp"

namespace cdfn {

/// Grayscale image in [0,1], row-major, with a zero-based class label.
struct LabeledImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
  int label = 0;
  std::int64_t id = 0;

  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }

  /// Single-map view for the first network layer.
  FeatureMapSet as_feature_maps() const { return FeatureMapSet(height, width, 1, pixels, id); }

  bool operator==(const LabeledImage&) const = default;
};

namespace stl10 {

inline constexpr std::size_t kSide = 96;
inline constexpr std::size_t kPlaneBytes = kSide * kSide;
inline constexpr std::size_t kImageBytes = 3 * kPlaneBytes;
inline constexpr int kNumClasses = 10;
inline constexpr std::size_t kNumFolds = 10;
inline constexpr std::size_t kFoldSize = 1000;
inline constexpr std::size_t kNumTrain = 5000;

/// Raw image in the on-disk byte order: three planes (R, G, B), each
/// column-major. bytes[ch * 9216 + col * 96 + row].
struct RgbImage {
  std::array<std::uint8_t, kImageBytes> bytes{};
  int label = 0;  // zero-based

  std::uint8_t at(std::size_t channel, std::size_t row, std::size_t col) const {
    return bytes[channel * kPlaneBytes + col * kSide + row];
  }
  bool operator==(const RgbImage&) const = default;
};

}  // namespace stl10

/// BT.601 luma, clamped into [min(r,g,b), max(r,g,b)].
double to_grayscale(double r, double g, double b);

std::vector<stl10::RgbImage> read_stl10_rgb(const std::filesystem::path& images_path,
                                            const std::filesystem::path& labels_path);

/// Writes the binary image file and the one-based label file.
void write_stl10(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 const std::vector<stl10::RgbImage>& images);

LabeledImage to_labeled_image(const stl10::RgbImage& rgb, std::int64_t id);

/// Loads and converts to grayscale; image ids are the file positions.
std::vector<LabeledImage> load_stl10(const std::filesystem::path& images_path,
                                     const std::filesystem::path& labels_path);

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
};

struct FoldPlanShape {
  std::size_t num_folds = stl10::kNumFolds;
  std::size_t fold_size = stl10::kFoldSize;  // 0 accepts any non-empty length
  std::size_t num_images = stl10::kNumTrain;
};

FoldPlan load_fold_plan(const std::filesystem::path& path, const FoldPlanShape& shape = {});

/// Images at the fold's indices, in fold order.
std::vector<LabeledImage> select_images(const std::vector<LabeledImage>& images,
                                        const std::vector<std::size_t>& indices);

}  // namespace cdfn
