// Copyright 2026 The mtlb Authors
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

#ifndef MTLB__CORE__BINARY_IO_HPP_
#define MTLB__CORE__BINARY_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

#include "mtlb/core/errors.hpp"
#include "mtlb/core/tensor.hpp"

namespace mtlb
{

/// Little-endian append-only byte buffer.
class ByteWriter
{
public:
  template <typename T>
  void put(T value)
  {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    bytes_.append(reinterpret_cast<const char *>(raw), sizeof(T));
  }
  void put_string(std::string_view s)
  {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }
  void put_raw(std::string_view s) { bytes_.append(s); }
  void put_tensor(const Tensor & t)
  {
    put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::uint64_t>(d);
    for (double v : t.data()) put<double>(v);
  }

  const std::string & bytes() const { return bytes_; }
  std::string take() { return std::move(bytes_); }

private:
  std::string bytes_;
};

/// Bounds-checked reader; every overrun throws FormatError.
class ByteReader
{
public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get()
  {
    static_assert(std::is_arithmetic_v<T>);
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string()
  {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view get_raw(std::size_t n)
  {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor get_tensor()
  {
    const auto rank = get<std::uint32_t>();
    if (rank > 8) throw FormatError("tensor rank " + std::to_string(rank) + " is implausible");
    Shape shape(rank);
    std::size_t total = 1;
    for (auto & d : shape) {
      d = static_cast<std::size_t>(get<std::uint64_t>());
      total *= d;
    }
    need(total * sizeof(double));
    std::vector<double> data(total);
    std::memcpy(data.data(), bytes_.data() + pos_, total * sizeof(double));
    pos_ += total * sizeof(double);
    return Tensor(std::move(shape), std::move(data));
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ == bytes_.size(); }

private:
  void need(std::size_t n) const
  {
    if (n > bytes_.size() - pos_) throw FormatError("truncated record: need " + std::to_string(n) + " more bytes");
  }

  std::string_view bytes_;
  std::size_t pos_{0};
};

std::string read_file(const std::string & path);
/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_file(const std::string & path, std::string_view bytes);

}  // namespace mtlb

#endif  // MTLB__CORE__BINARY_IO_HPP_
