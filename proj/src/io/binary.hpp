// Copyright 2026 The ASC Authors. All Rights Reserved.
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

// Little-endian encoding helpers shared by the binary formats.

#ifndef ASC_IO_BINARY_HPP_
#define ASC_IO_BINARY_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace asc::io::detail {

template <typename T>
T byteswap_if_big(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (T v : values) put(out, v);
  }
}

// Throws std::runtime_error mentioning `what` on a short read.
template <typename T>
T get(std::istream& in, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error(std::string("truncated file reading ") + what);
  }
  return byteswap_if_big(v);
}

template <typename T>
void get_array(std::istream& in, std::span<T> values, const char* what) {
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()))) {
    throw std::runtime_error(std::string("truncated file reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (T& v : values) v = byteswap_if_big(v);
  }
}

inline void expect_magic(std::istream& in, const char (&magic)[5],
                         const std::string& path) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    throw std::runtime_error(path + ": bad magic (expected " +
                             std::string(magic) + ")");
  }
}

// Fixed-width, NUL-padded identifier field.
inline void put_id(std::ostream& out, const std::string& id, std::size_t width) {
  if (id.size() >= width) {
    throw std::invalid_argument("identifier '" + id + "' longer than " +
                                std::to_string(width - 1) + " bytes");
  }
  std::vector<char> buf(width, '\0');
  std::memcpy(buf.data(), id.data(), id.size());
  out.write(buf.data(), static_cast<std::streamsize>(width));
}

inline std::string get_id(std::istream& in, std::size_t width) {
  std::vector<char> buf(width);
  if (!in.read(buf.data(), static_cast<std::streamsize>(width))) {
    throw std::runtime_error("truncated file reading identifier");
  }
  return std::string(buf.data(), strnlen(buf.data(), width));
}

}  // namespace asc::io::detail

#endif  // ASC_IO_BINARY_HPP_
