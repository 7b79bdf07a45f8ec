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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <limits>
#include <string>

#include "cdfn/container.hpp"
#include "support/check.hpp"
#include "support/synthetic.hpp"

using namespace cdfn;

namespace {

Container sample() {
  Container c;
  c.add("a", {2, 3}, {1, 2, 3, 4, 5, 6});
  c.add("scalar", {1}, {std::numeric_limits<double>::denorm_min()});
  Eigen::MatrixXd m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  c.add_columns("m", m);
  c.text = "[model]\nkind=test\n";
  return c;
}

std::uint32_t read_u32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  return v;
}

}  // namespace

TEST_CASE("containers round-trip bitwise") {
  const Container c = sample();
  const std::string bytes = serialize_container(c);
  CHECK(deserialize_container(bytes) == c);
  CHECK(serialize_container(deserialize_container(bytes)) == bytes);

  const auto dir = testing::scratch_dir("container");
  save_container(dir / "c.bin", c);
  CHECK(load_container(dir / "c.bin") == c);
}

TEST_CASE("layout starts with magic, little-endian version and the first tensor") {
  const std::string bytes = serialize_container(sample());
  CHECK(bytes.substr(0, 4) == "CDFN");
  CHECK(read_u32(bytes, 4) == 1);
  // The tensor count follows the version, then name length and name.
  CHECK(read_u32(bytes, 8) == 3);
  CHECK(read_u32(bytes, 12) == 1);
  CHECK(bytes[16] == 'a');
  CHECK(read_u32(bytes, 17) == 2);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 21 + 16, 8);
  CHECK(first == 1.0);
}

TEST_CASE("Eigen helpers keep column order") {
  const Container c = sample();
  const Eigen::MatrixXd m = c.get_columns("m");
  CHECK(m.rows() == 3);
  CHECK(m(2, 1) == 6);
  CHECK(c.get("m").dims == std::vector<std::uint64_t>{2, 3});
  CHECK(c.get("m").values == std::vector<double>{1, 3, 5, 2, 4, 6});
  CHECK_ERROR_CODE(c.get("missing"), ErrorCode::kFormat);
}

TEST_CASE("corrupted magic is a FormatError") {
  std::string bytes = serialize_container(sample());
  bytes[0] = 'X';
  CHECK_ERROR_MESSAGE(deserialize_container(bytes), ErrorCode::kFormat, "magic");
}

TEST_CASE("a bumped version is a FormatError naming the version") {
  std::string bytes = serialize_container(sample());
  bytes[4] = 2;
  CHECK_ERROR_MESSAGE(deserialize_container(bytes), ErrorCode::kFormat, "version 2");
}

TEST_CASE("every truncation is a FormatError") {
  const std::string bytes = serialize_container(sample());
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    CHECK_ERROR_CODE(deserialize_container(std::string_view(bytes).substr(0, n)), ErrorCode::kFormat);
  }
  CHECK_ERROR_CODE(deserialize_container(bytes + "x"), ErrorCode::kFormat);
}

TEST_CASE("add validates shapes and names") {
  Container c;
  CHECK_ERROR_CODE(c.add("x", {2, 2}, {1, 2, 3}), ErrorCode::kDim);
  c.add("x", {1}, {1});
  CHECK_ERROR_CODE(c.add("x", {1}, {2}), ErrorCode::kInvalidArgument);
}
