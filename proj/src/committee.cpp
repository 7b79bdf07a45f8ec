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

#include "cdfn/committee.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cdfn {

std::vector<int> ScoreTable::predictions() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r));
  return out;
}

std::string_view to_string(Normalization n) {
  return n == Normalization::kPerImage ? "per_image" : "per_network";
}

Normalization parse_normalization(std::string_view s) {
  if (s == "per_image") return Normalization::kPerImage;
  if (s == "per_network") return Normalization::kPerNetwork;
  throw Error(ErrorCode::kConfig, "unknown score normalization '" + std::string(s) + "'");
}

ScoreVector minmax_normalize(const ScoreVector& s) {
  ScoreVector out{s.scores, true};
  if (s.scores.empty()) return out;
  const auto [lo, hi] = std::ranges::minmax(s.scores);
  for (double& v : out.scores) v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
  return out;
}

ScoreTable normalize_table(const ScoreTable& table, Normalization mode) {
  ScoreTable out = table;
  if (mode == Normalization::kPerImage) {
    for (auto& r : out.rows) r = minmax_normalize(r);
    return out;
  }
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& r : table.rows) {
    for (const double v : r.scores) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  for (auto& r : out.rows) {
    for (double& v : r.scores) v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    r.normalized = true;
  }
  return out;
}

ScoreTable sum_scores(std::span<const ScoreTable> tables) {
  if (tables.empty()) throw Error(ErrorCode::kInvalidArgument, "committee has no members");
  const ScoreTable& ref = tables.front();
  for (const auto& t : tables) {
    if (t.image_ids != ref.image_ids || t.rows.size() != ref.image_ids.size()) {
      throw Error(ErrorCode::kAlignment,
                  "score table '" + t.network_id + "' covers different images than '" +
                      ref.network_id + "'");
    }
    for (const auto& r : t.rows) {
      if (!r.normalized) {
        throw Error(ErrorCode::kContract, "score table '" + t.network_id + "' is not normalized");
      }
      if (r.scores.size() != ref.num_classes()) {
        throw Error(ErrorCode::kAlignment, "score tables disagree on the class count");
      }
    }
  }
  ScoreTable out;
  out.network_id = "committee";
  out.image_ids = ref.image_ids;
  out.rows.assign(ref.rows.size(), ScoreVector{std::vector<double>(ref.num_classes(), 0.0),
                                                tables.size() == 1});
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      for (std::size_t c = 0; c < t.rows[i].scores.size(); ++c) {
        out.rows[i].scores[c] += t.rows[i].scores[c];
      }
    }
  }
  return out;
}

std::vector<int> committee_predict(std::span<const ScoreTable> tables) {
  return sum_scores(tables).predictions();
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kAlignment, "prediction and label counts differ");
  }
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kFormat, "bad number '" + std::string(s) + "'");
  }
  return v;
}

void write_score_file(const std::filesystem::path& path, const ScoreTable& table) {
  if (table.network_id.empty() ||
      table.network_id.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "network id must be a non-empty word");
  }
  if (table.rows.size() != table.image_ids.size()) {
    throw Error(ErrorCode::kAlignment, "score rows and image ids differ in count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out << "scores v1 " << table.network_id << ' ' << table.num_classes() << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out << table.image_ids[i];
    for (const double v : table.rows[i].scores) out << ' ' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

ScoreTable read_score_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kFormat, path.string() + ": empty file");
  std::istringstream header(line);
  std::string magic;
  std::string version;
  ScoreTable table;
  long long classes = 0;
  if (!(header >> magic >> version >> table.network_id >> classes) || magic != "scores") {
    throw Error(ErrorCode::kFormat, path.string() + ": bad header");
  }
  if (version != "v1") {
    throw Error(ErrorCode::kFormat, path.string() + ": unsupported version " + version);
  }
  if (classes < 1) throw Error(ErrorCode::kFormat, path.string() + ": bad class count");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    long long id = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), id);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw Error(ErrorCode::kFormat, path.string() + ": bad image id '" + token + "'");
    }
    ScoreVector row;
    while (ls >> token) row.scores.push_back(parse_double(token));
    if (row.scores.size() != static_cast<std::size_t>(classes)) {
      throw Error(ErrorCode::kFormat, path.string() + ": row for image " + std::to_string(id) +
                                          " has " + std::to_string(row.scores.size()) +
                                          " scores, expected " + std::to_string(classes));
    }
    table.image_ids.push_back(id);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace cdfn
