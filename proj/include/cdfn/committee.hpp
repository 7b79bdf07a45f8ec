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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdfn/svm.hpp"

namespace cdfn {

/// Scores of one network over a test set, one row per image.
struct ScoreTable {
  std::string network_id;
  std::vector<std::int64_t> image_ids;
  std::vector<ScoreVector> rows;

  std::size_t num_classes() const { return rows.empty() ? 0 : rows.front().scores.size(); }
  std::vector<int> predictions() const;
};

enum class Normalization {
  kPerImage,    // min-max over the C scores of each image
  kPerNetwork,  // min-max over every score in the table
};

std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view s);

/// (s - min) / (max - min); a constant vector maps to all zeros.
ScoreVector minmax_normalize(const ScoreVector& s);

ScoreTable normalize_table(const ScoreTable& table, Normalization mode = Normalization::kPerImage);

/// Elementwise sum of normalized tables covering the same images in the
/// same order. The result is not renormalized.
ScoreTable sum_scores(std::span<const ScoreTable> tables);

std::vector<int> committee_predict(std::span<const ScoreTable> tables);

/// Fraction of predictions equal to labels.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Text format: "scores v1 <network_id> <C>" then "<image_id> <s_1> ... <s_C>"
/// per image, floats in shortest round-trip form.
void write_score_file(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable read_score_file(const std::filesystem::path& path);

std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace cdfn
