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

#include "cdfn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cdfn {

void AugmentPlan::validate() const {
  for (const double a : rotations_deg) {
    if (!(std::abs(a) <= 45.0)) {
      throw Error(ErrorCode::kConfig, "rotation angle magnitude must be <= 45 degrees");
    }
  }
  if (scale_factor && !(*scale_factor > 0.0 && *scale_factor <= 1.0)) {
    throw Error(ErrorCode::kConfig, "scale factor must be in (0, 1]");
  }
}

LabeledImage mirror_lr(const LabeledImage& img) {
  LabeledImage out = img;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) out.at(r, c) = img.at(r, img.width - 1 - c);
  }
  return out;
}

LabeledImage rotate(const LabeledImage& img, double angle_deg) {
  if (!std::isfinite(angle_deg)) throw Error(ErrorCode::kInvalidArgument, "rotation angle is not finite");
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  const auto h = static_cast<std::ptrdiff_t>(img.height);
  const auto w = static_cast<std::ptrdiff_t>(img.width);

  auto pixel = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || r >= h || c >= w) return 0.0;
    return img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };

  LabeledImage out = img;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double x = static_cast<double>(c) - cx;
      const double y = static_cast<double>(r) - cy;
      const double sc = cx + x * cos_t - y * sin_t;
      const double sr = cy + x * sin_t + y * cos_t;
      const double r0f = std::floor(sr);
      const double c0f = std::floor(sc);
      const double fr = sr - r0f;
      const double fc = sc - c0f;
      const auto r0 = static_cast<std::ptrdiff_t>(r0f);
      const auto c0 = static_cast<std::ptrdiff_t>(c0f);
      // Skip neighbours with zero weight so exact grid hits never touch
      // out-of-range pixels.
      double v = 0.0;
      if ((1 - fr) * (1 - fc) != 0.0) v += (1 - fr) * (1 - fc) * pixel(r0, c0);
      if ((1 - fr) * fc != 0.0) v += (1 - fr) * fc * pixel(r0, c0 + 1);
      if (fr * (1 - fc) != 0.0) v += fr * (1 - fc) * pixel(r0 + 1, c0);
      if (fr * fc != 0.0) v += fr * fc * pixel(r0 + 1, c0 + 1);
      out.at(r, c) = v;
    }
  }
  return out;
}

namespace {

// Row i of the result holds the fractional overlap of output cell i with
// each input cell when n_in cells are averaged down to n_out.
std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(std::size_t n_in,
                                                                      std::size_t n_out) {
  const double ratio = static_cast<double>(n_in) / static_cast<double>(n_out);
  std::vector<std::vector<std::pair<std::size_t, double>>> weights(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double lo = static_cast<double>(i) * ratio;
    const double hi = static_cast<double>(i + 1) * ratio;
    auto first = static_cast<std::size_t>(std::floor(lo));
    for (std::size_t j = first; j < n_in && static_cast<double>(j) < hi; ++j) {
      const double overlap =
          std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
      if (overlap > 0.0) weights[i].emplace_back(j, overlap / ratio);
    }
  }
  return weights;
}

}  // namespace

LabeledImage scale(const LabeledImage& img, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale factor must be in (0, 1]");
  }
  if (factor == 1.0) return img;
  const auto out_h = static_cast<std::size_t>(std::lround(static_cast<double>(img.height) * factor));
  const auto out_w = static_cast<std::size_t>(std::lround(static_cast<double>(img.width) * factor));
  if (out_h == 0 || out_w == 0) throw Error(ErrorCode::kInvalidArgument, "scaled image is empty");
  const auto wr = area_weights(img.height, out_h);
  const auto wc = area_weights(img.width, out_w);

  LabeledImage out;
  out.height = out_h;
  out.width = out_w;
  out.label = img.label;
  out.id = img.id;
  out.pixels.assign(out_h * out_w, 0.0);
  for (std::size_t r = 0; r < out_h; ++r) {
    for (std::size_t c = 0; c < out_w; ++c) {
      double v = 0.0;
      for (const auto& [ir, a] : wr[r]) {
        for (const auto& [ic, b] : wc[c]) v += a * b * img.at(ir, ic);
      }
      out.at(r, c) = v;
    }
  }
  return out;
}

std::vector<LabeledImage> expand_set(const std::vector<LabeledImage>& images,
                                     const AugmentPlan& plan) {
  plan.validate();
  std::vector<LabeledImage> out = images;
  out.reserve(images.size() * (1 + (plan.mirror ? 1 : 0) + plan.rotations_deg.size()));
  if (plan.mirror) {
    for (const auto& im : images) out.push_back(mirror_lr(im));
  }
  for (const double angle : plan.rotations_deg) {
    for (const auto& im : images) out.push_back(rotate(im, angle));
  }
  return out;
}

}  // namespace cdfn
