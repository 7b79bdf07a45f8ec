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

#include "cdfn/stl10.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <unordered_set>

namespace cdfn {
namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

double to_grayscale(double r, double g, double b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return std::clamp(y, std::min({r, g, b}), std::max({r, g, b}));
}

std::vector<stl10::RgbImage> read_stl10_rgb(const std::filesystem::path& images_path,
                                            const std::filesystem::path& labels_path) {
  const auto image_bytes = read_all(images_path);
  const auto label_bytes = read_all(labels_path);
  if (image_bytes.size() % stl10::kImageBytes != 0) {
    throw Error(ErrorCode::kFormat, images_path.string() + ": size " +
                                        std::to_string(image_bytes.size()) +
                                        " is not a multiple of " +
                                        std::to_string(stl10::kImageBytes));
  }
  const std::size_t count = image_bytes.size() / stl10::kImageBytes;
  if (label_bytes.size() != count) {
    throw Error(ErrorCode::kFormat, "image file holds " + std::to_string(count) +
                                        " images but label file holds " +
                                        std::to_string(label_bytes.size()) + " labels");
  }
  std::vector<stl10::RgbImage> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::copy_n(image_bytes.begin() + static_cast<std::ptrdiff_t>(i * stl10::kImageBytes),
                stl10::kImageBytes, out[i].bytes.begin());
    const int label = label_bytes[i];
    if (label < 1 || label > stl10::kNumClasses) {
      throw Error(ErrorCode::kFormat, "label " + std::to_string(label) + " at position " +
                                          std::to_string(i) + " outside [1, 10]");
    }
    out[i].label = label - 1;
  }
  return out;
}

void write_stl10(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 const std::vector<stl10::RgbImage>& images) {
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorCode::kIo, "cannot open STL-10 output files");
  for (const auto& im : images) {
    img.write(reinterpret_cast<const char*>(im.bytes.data()), stl10::kImageBytes);
    const char label = static_cast<char>(im.label + 1);
    lab.write(&label, 1);
  }
  if (!img || !lab) throw Error(ErrorCode::kIo, "short write to STL-10 output files");
}

LabeledImage to_labeled_image(const stl10::RgbImage& rgb, std::int64_t id) {
  LabeledImage out;
  out.height = stl10::kSide;
  out.width = stl10::kSide;
  out.label = rgb.label;
  out.id = id;
  out.pixels.resize(stl10::kPlaneBytes);
  for (std::size_t r = 0; r < stl10::kSide; ++r) {
    for (std::size_t c = 0; c < stl10::kSide; ++c) {
      out.at(r, c) = to_grayscale(rgb.at(0, r, c) / 255.0, rgb.at(1, r, c) / 255.0,
                                  rgb.at(2, r, c) / 255.0);
    }
  }
  return out;
}

std::vector<LabeledImage> load_stl10(const std::filesystem::path& images_path,
                                     const std::filesystem::path& labels_path) {
  const auto rgb = read_stl10_rgb(images_path, labels_path);
  std::vector<LabeledImage> out;
  out.reserve(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    out.push_back(to_labeled_image(rgb[i], static_cast<std::int64_t>(i)));
  }
  return out;
}

FoldPlan load_fold_plan(const std::filesystem::path& path, const FoldPlanShape& shape) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  FoldPlan plan;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::size_t> fold;
    std::string token;
    while (ls >> token) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(token, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != token.size() || token.front() == '-') {
        throw Error(ErrorCode::kFormat, "bad index token '" + token + "'");
      }
      fold.push_back(static_cast<std::size_t>(v));
    }
    if (fold.empty()) continue;  // blank lines
    plan.folds.push_back(std::move(fold));
  }
  if (plan.folds.size() != shape.num_folds) {
    throw Error(ErrorCode::kFormat, "expected " + std::to_string(shape.num_folds) +
                                        " folds, found " + std::to_string(plan.folds.size()));
  }
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    if (shape.fold_size != 0 && fold.size() != shape.fold_size) {
      throw Error(ErrorCode::kFormat, "fold " + std::to_string(f) + " has " +
                                          std::to_string(fold.size()) + " indices, expected " +
                                          std::to_string(shape.fold_size));
    }
    std::unordered_set<std::size_t> seen;
    for (const auto idx : fold) {
      if (idx >= shape.num_images) {
        throw Error(ErrorCode::kFormat, "fold " + std::to_string(f) + " index " +
                                            std::to_string(idx) + " >= " +
                                            std::to_string(shape.num_images));
      }
      if (!seen.insert(idx).second) {
        throw Error(ErrorCode::kFormat,
                    "fold " + std::to_string(f) + " repeats index " + std::to_string(idx));
      }
    }
  }
  return plan;
}

std::vector<LabeledImage> select_images(const std::vector<LabeledImage>& images,
                                        const std::vector<std::size_t>& indices) {
  std::vector<LabeledImage> out;
  out.reserve(indices.size());
  for (const auto i : indices) {
    if (i >= images.size()) throw Error(ErrorCode::kIndex, "image index out of range");
    out.push_back(images[i]);
  }
  return out;
}

}  // namespace cdfn
