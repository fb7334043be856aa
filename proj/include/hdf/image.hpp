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

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdf/binary_io.hpp"
#include "hdf/error.hpp"
#include "hdf/tensor.hpp"

namespace hdf {

/// Interleaved (row, col, channel) raster in pixel-intensity units.
struct Raster {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> pixels;

  float& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }
};

inline Raster make_raster(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f) {
  return Raster{height, width, channels, std::vector<float>(height * width * channels, fill)};
}

namespace detail {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

// Half-pixel-centred source coordinates for each destination index, clamped
// to the valid range so the borders replicate edge pixels.
inline std::vector<Tap> bilinear_taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<std::size_t>(std::floor(s));
    const std::size_t hi = std::min(lo + 1, src - 1);
    taps[i] = {lo, hi, s - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace detail

/// Bilinear resize of one plane with element stride `stride` in both source
/// and destination (so interleaved rasters can be resized channel by channel).
inline void resize_plane(std::span<const float> src, std::size_t src_h, std::size_t src_w, std::span<float> dst,
                         std::size_t dst_h, std::size_t dst_w, std::size_t src_stride = 1,
                         std::size_t dst_stride = 1) {
  const auto ys = detail::bilinear_taps(src_h, dst_h);
  const auto xs = detail::bilinear_taps(src_w, dst_w);
  for (std::size_t y = 0; y < dst_h; ++y) {
    const auto& ty = ys[y];
    for (std::size_t x = 0; x < dst_w; ++x) {
      const auto& tx = xs[x];
      const double a = src[(ty.lo * src_w + tx.lo) * src_stride];
      const double b = src[(ty.lo * src_w + tx.hi) * src_stride];
      const double c = src[(ty.hi * src_w + tx.lo) * src_stride];
      const double d = src[(ty.hi * src_w + tx.hi) * src_stride];
      const double top = a + (b - a) * tx.frac;
      const double bottom = c + (d - c) * tx.frac;
      dst[(y * dst_w + x) * dst_stride] = static_cast<float>(top + (bottom - top) * ty.frac);
    }
  }
}

/// Resizes every channel of a (C, H, W) tensor to (C, out_h, out_w).
inline Tensor resize_bilinear(const Tensor& input, std::size_t out_h, std::size_t out_w) {
  require_rank(input, 3, "resize input");
  Tensor out({input.dim(0), out_h, out_w});
  for (std::size_t c = 0; c < input.dim(0); ++c) {
    resize_plane(input.channel(c), input.dim(1), input.dim(2), out.channel(c), out_h, out_w);
  }
  return out;
}

/// Resizes an interleaved 3-channel raster straight into channel-major layout.
inline Tensor raster_to_tensor(const Raster& image, std::size_t out_h, std::size_t out_w) {
  if (image.height == 0 || image.width == 0 || image.pixels.empty()) throw DataError("empty image");
  if (image.channels != 3) {
    throw DataError("expected a 3-channel image, got " + std::to_string(image.channels) + " channels");
  }
  if (image.pixels.size() != image.height * image.width * 3) throw DataError("raster size mismatch");
  Tensor out({3, out_h, out_w});
  for (std::size_t c = 0; c < 3; ++c) {
    resize_plane(std::span<const float>(image.pixels).subspan(c), image.height, image.width, out.channel(c),
                 out_h, out_w, 3, 1);
  }
  return out;
}

inline Tensor subtract_means(Tensor image, const std::array<float, 3>& means) {
  require_rank(image, 3, "mean subtraction");
  for (std::size_t c = 0; c < 3; ++c) {
    for (float& v : image.channel(c)) v -= means[c];
  }
  return image;
}

/// Gray rasters are replicated to three channels; colour ones pass through.
inline Raster to_rgb(Raster image) {
  if (image.channels == 3) return image;
  if (image.channels != 1) throw DataError("cannot convert " + std::to_string(image.channels) + "-channel raster");
  Raster out = make_raster(image.height, image.width, 3);
  for (std::size_t i = 0; i < image.height * image.width; ++i) {
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = image.pixels[i];
  }
  return out;
}

// --- Netpbm (binary P5 / P6) -------------------------------------------------

namespace detail {

inline std::size_t pnm_header_int(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    ++pos;
    if (++digits > 9) throw DataError("netpbm header value too large");
  }
  if (digits == 0) throw DataError("malformed netpbm header");
  return value;
}

}  // namespace detail

inline Raster decode_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw DataError("not a binary PGM/PPM image");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const std::size_t width = detail::pnm_header_int(bytes, pos);
  const std::size_t height = detail::pnm_header_int(bytes, pos);
  const std::size_t maxval = detail::pnm_header_int(bytes, pos);
  if (width == 0 || height == 0) throw DataError("netpbm image has zero extent");
  if (maxval == 0 || maxval > 65535) throw DataError("netpbm maxval out of range");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw DataError("malformed netpbm header");
  }
  ++pos;
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t count = width * height * channels;
  if (bytes.size() - pos < count * sample_bytes) throw DataError("netpbm pixel data truncated");
  Raster image = make_raster(height, width, channels);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t v = static_cast<unsigned char>(bytes[pos + i * sample_bytes]);
    if (sample_bytes == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
    image.pixels[i] = static_cast<float>(static_cast<double>(v) * scale);
  }
  return image;
}

inline Raster read_pnm(const std::string& path) {
  std::string bytes;
  try {
    bytes = io::read_file(path);
  } catch (const FormatError&) {
    throw DataError("cannot read image " + path);
  }
  try {
    return decode_pnm(bytes);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// P6 encoding of a (3, H, W) tensor in pixel units, rounded and clamped.
inline std::string encode_ppm(const Tensor& image) {
  require_rank(image, 3, "ppm image");
  if (image.dim(0) != 3) throw ShapeError("ppm image must have 3 channels");
  const std::size_t h = image.dim(1);
  const std::size_t w = image.dim(2);
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + h * w * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(image.at(c, y, x))));
    }
  }
  return out;
}

inline std::string encode_ppm(const Raster& image) {
  if (image.channels != 3) throw ShapeError("ppm raster must have 3 channels");
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  for (float v : image.pixels) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

/// P5 encoding of a boolean mask: 255 for set pixels, 0 otherwise.
inline std::string encode_pgm(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::size_t i = 0; i < height * width; ++i) out.push_back(static_cast<char>(mask[i] ? 255 : 0));
  return out;
}

}  // namespace hdf
