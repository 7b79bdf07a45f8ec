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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cdfn/error.hpp"

namespace cdfn {

// Binary layout, all integers little-endian:
//
//   "CDFN"                 4 bytes magic
//   u32 version            kContainerVersion
//   u32 tensor count
//   per tensor:
//     u32 name length, name bytes
//     u32 ndim, u64 dims[ndim]
//     f64 payload[prod(dims)], row-major, IEEE-754 little-endian
//   u64 text length, text bytes (INI-style configuration block)

inline constexpr std::uint32_t kContainerVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;

  bool operator==(const NamedTensor&) const = default;
};

class Container {
 public:
  std::vector<NamedTensor> tensors;
  std::string text;

  void add(std::string name, std::vector<std::uint64_t> dims, std::vector<double> values);
  /// Stored as dims [cols, rows]: each Eigen column becomes one row.
  void add_columns(std::string name, const Eigen::MatrixXd& m);
  void add_vector(std::string name, const Eigen::VectorXd& v);

  const NamedTensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  Eigen::MatrixXd get_columns(std::string_view name) const;
  Eigen::VectorXd get_vector(std::string_view name) const;

  bool operator==(const Container&) const = default;
};

std::string serialize_container(const Container& c);
Container deserialize_container(std::string_view bytes);

void save_container(const std::filesystem::path& path, const Container& c);
Container load_container(const std::filesystem::path& path);

}  // namespace cdfn
