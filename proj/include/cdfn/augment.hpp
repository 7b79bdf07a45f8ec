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

#include <optional>
#include <vector>

#include "cdfn/stl10.hpp"

namespace cdfn {

struct AugmentPlan {
  bool mirror = false;
  std::vector<double> rotations_deg;
  /// Resolution change for the whole network, applied by the pipeline
  /// before feature extraction; expand_set ignores it.
  std::optional<double> scale_factor;

  void validate() const;
};

LabeledImage mirror_lr(const LabeledImage& img);

/// Rotates about the image center by angle_deg (positive is counterclockwise
/// as displayed). Inverse mapping, bilinear interpolation, and samples
/// outside the source read as 0.
LabeledImage rotate(const LabeledImage& img, double angle_deg);

/// Area-average downscale to round(height*factor) x round(width*factor).
LabeledImage scale(const LabeledImage& img, double factor);

/// Originals, then all mirrored copies, then one block per rotation angle.
std::vector<LabeledImage> expand_set(const std::vector<LabeledImage>& images,
                                     const AugmentPlan& plan);

}  // namespace cdfn
