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

#include "cdfn/container.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

namespace cdfn {
namespace {

constexpr char kMagic[4] = {'C', 'D', 'F', 'N'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U get_le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (n > bytes_.size() - pos_) {
      throw Error(ErrorCode::kFormat, std::string("truncated container while reading ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Container::add(std::string name, std::vector<std::uint64_t> dims, std::vector<double> values) {
  std::uint64_t n = 1;
  for (const auto d : dims) n *= d;
  if (n != values.size()) {
    throw Error(ErrorCode::kDim, "tensor '" + name + "' dims do not match value count");
  }
  if (contains(name)) throw Error(ErrorCode::kInvalidArgument, "duplicate tensor '" + name + "'");
  tensors.push_back({std::move(name), std::move(dims), std::move(values)});
}

void Container::add_columns(std::string name, const Eigen::MatrixXd& m) {
  add(std::move(name),
      {static_cast<std::uint64_t>(m.cols()), static_cast<std::uint64_t>(m.rows())},
      std::vector<double>(m.data(), m.data() + m.size()));
}

void Container::add_vector(std::string name, const Eigen::VectorXd& v) {
  add(std::move(name), {static_cast<std::uint64_t>(v.size())},
      std::vector<double>(v.data(), v.data() + v.size()));
}

const NamedTensor& Container::get(std::string_view name) const {
  const auto it = std::ranges::find(tensors, name, &NamedTensor::name);
  if (it == tensors.end()) {
    throw Error(ErrorCode::kFormat, "container has no tensor '" + std::string(name) + "'");
  }
  return *it;
}

bool Container::contains(std::string_view name) const {
  return std::ranges::find(tensors, name, &NamedTensor::name) != tensors.end();
}

Eigen::MatrixXd Container::get_columns(std::string_view name) const {
  const auto& t = get(name);
  if (t.dims.size() != 2) {
    throw Error(ErrorCode::kFormat, "tensor '" + std::string(name) + "' is not 2-D");
  }
  return Eigen::Map<const Eigen::MatrixXd>(t.values.data(), static_cast<Eigen::Index>(t.dims[1]),
                                           static_cast<Eigen::Index>(t.dims[0]));
}

Eigen::VectorXd Container::get_vector(std::string_view name) const {
  const auto& t = get(name);
  if (t.dims.size() != 1) {
    throw Error(ErrorCode::kFormat, "tensor '" + std::string(name) + "' is not 1-D");
  }
  return Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.dims[0]));
}

std::string serialize_container(const Container& c) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kContainerVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (const auto d : t.dims) put_le<std::uint64_t>(out, d);
    for (const double v : t.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  put_le<std::uint64_t>(out, c.text.size());
  out += c.text;
  return out;
}

Container deserialize_container(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4, "magic") != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::kFormat, "bad magic, not a CDFN container");
  }
  const auto version = in.get_le<std::uint32_t>("version");
  if (version != kContainerVersion) {
    throw Error(ErrorCode::kFormat, "unsupported container version " + std::to_string(version) +
                                        " (expected " + std::to_string(kContainerVersion) + ")");
  }
  Container c;
  const auto count = in.get_le<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = in.get_le<std::uint32_t>("name length");
    t.name = std::string(in.take(name_len, "tensor name"));
    const auto ndim = in.get_le<std::uint32_t>("ndim");
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      t.dims.push_back(in.get_le<std::uint64_t>("dims"));
      if (t.dims.back() != 0 && n > std::numeric_limits<std::uint64_t>::max() / t.dims.back()) {
        throw Error(ErrorCode::kFormat, "tensor dims overflow");
      }
      n *= t.dims.back();
    }
    if (n > in.remaining() / 8) throw Error(ErrorCode::kFormat, "truncated tensor payload");
    t.values.resize(static_cast<std::size_t>(n));
    for (auto& v : t.values) v = std::bit_cast<double>(in.get_le<std::uint64_t>("payload"));
    c.tensors.push_back(std::move(t));
  }
  const auto text_len = in.get_le<std::uint64_t>("text length");
  if (text_len > in.remaining()) throw Error(ErrorCode::kFormat, "truncated config block");
  c.text = std::string(in.take(static_cast<std::size_t>(text_len), "config block"));
  if (in.remaining() != 0) throw Error(ErrorCode::kFormat, "trailing bytes after config block");
  return c;
}

void save_container(const std::filesystem::path& path, const Container& c) {
  const std::string bytes = serialize_container(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Container load_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_container(bytes);
}

}  // namespace cdfn
