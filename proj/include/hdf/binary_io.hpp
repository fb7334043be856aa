/*
 * Copyright 2026 The HDF Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdf/error.hpp"

namespace hdf::io {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

/// Little-endian append-only encoder.
class ByteWriter {
 public:
  void put_bytes(std::string_view bytes) { buffer_.append(bytes); }

  void put_u32(std::uint32_t v) {
    char raw[4];
    for (int i = 0; i < 4; ++i) raw[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    buffer_.append(raw, 4);
  }

  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

  void put_f32s(std::span<const float> values) {
    for (float v : values) put_f32(v);
  }

  const std::string& bytes() const noexcept { return buffer_; }
  std::string take() noexcept { return std::move(buffer_); }

 private:
  std::string buffer_;
};

/// Little-endian decoder over a byte buffer. Running out of input raises
/// FormatError(truncated) with the given context label.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string context)
      : bytes_(bytes), context_(std::move(context)) {}

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  std::string_view get_bytes(std::size_t n, std::string_view what) {
    require(n, what);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t get_u32(std::string_view what) {
    const std::string_view raw = get_bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
    return v;
  }

  float get_f32(std::string_view what) { return std::bit_cast<float>(get_u32(what)); }

  std::vector<float> get_f32s(std::size_t count, std::string_view what) {
    if (count > remaining() / 4) require(count * 4, what);
    std::vector<float> out(count);
    for (auto& v : out) v = get_f32(what);
    return out;
  }

  void require(std::size_t n, std::string_view what) const {
    if (n > remaining()) {
      throw FormatError(FormatErrc::truncated, context_ + ": file ends while reading " + std::string(what));
    }
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string context_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::io, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrc::io, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrc::io, "write failed for " + path);
}

}  // namespace hdf::io
