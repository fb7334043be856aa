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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hdf/binary_io.hpp"
#include "hdf/error.hpp"

namespace hdf {

struct FeatureRecord {
  std::uint32_t label = 0;
  std::string path;
  std::vector<float> values;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

/// A set of equally sized feature vectors with labels and source paths.
struct FeatureCache {
  std::uint32_t dim = 0;
  std::vector<FeatureRecord> records;

  friend bool operator==(const FeatureCache&, const FeatureCache&) = default;
};

inline constexpr std::string_view kCacheMagic = "HDFC";
inline constexpr std::uint32_t kCacheVersion = 1;

inline std::string encode_cache(const FeatureCache& cache) {
  io::ByteWriter out;
  out.put_bytes(kCacheMagic);
  out.put_u32(kCacheVersion);
  out.put_u32(cache.dim);
  out.put_u32(static_cast<std::uint32_t>(cache.records.size()));
  for (const auto& r : cache.records) {
    if (r.values.size() != cache.dim) {
      throw FormatError(FormatErrc::dim_mismatch, "record '" + r.path + "' has " + std::to_string(r.values.size()) +
                                                      " values, cache dim is " + std::to_string(cache.dim));
    }
    out.put_u32(r.label);
    out.put_u32(static_cast<std::uint32_t>(r.path.size()));
    out.put_bytes(r.path);
    out.put_f32s(r.values);
  }
  return out.take();
}

/// Decodes an HDFC blob. When `expected_dim` is given a different stored
/// dimension is reported as dim_mismatch.
inline FeatureCache decode_cache(std::string_view bytes, std::optional<std::uint32_t> expected_dim = {}) {
  if (bytes.substr(0, kCacheMagic.size()) != kCacheMagic) {
    throw FormatError(FormatErrc::bad_magic, "feature cache does not start with HDFC");
  }
  io::ByteReader in(bytes.substr(kCacheMagic.size()), "feature cache");
  const std::uint32_t version = in.get_u32("version");
  if (version != kCacheVersion) {
    throw FormatError(FormatErrc::unsupported_version, "feature cache version " + std::to_string(version));
  }
  FeatureCache cache;
  cache.dim = in.get_u32("feature dim");
  if (expected_dim && *expected_dim != cache.dim) {
    throw FormatError(FormatErrc::dim_mismatch, "feature cache holds dim " + std::to_string(cache.dim) +
                                                    ", expected " + std::to_string(*expected_dim));
  }
  const std::uint32_t count = in.get_u32("record count");
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureRecord r;
    r.label = in.get_u32("record label");
    const std::uint32_t len = in.get_u32("record path length");
    r.path = std::string(in.get_bytes(len, "record path"));
    r.values = in.get_f32s(cache.dim, "record values");
    cache.records.push_back(std::move(r));
  }
  if (!in.at_end()) {
    throw FormatError(FormatErrc::trailing_data, std::to_string(in.remaining()) + " bytes after the last record");
  }
  return cache;
}

inline void save_cache(const FeatureCache& cache, const std::string& path) {
  io::write_file(path, encode_cache(cache));
}

inline FeatureCache load_cache(const std::string& path, std::optional<std::uint32_t> expected_dim = {}) {
  return decode_cache(io::read_file(path), expected_dim);
}

}  // namespace hdf
