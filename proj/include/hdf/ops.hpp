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
#include <cstddef>
#include <string>
#include <vector>

#include "hdf/error.hpp"
#include "hdf/parallel.hpp"
#include "hdf/tensor.hpp"

namespace hdf {

namespace detail {

inline void check_conv_shapes(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  require_rank(input, 3, "conv2d input");
  require_rank(kernel, 4, "conv2d kernel");
  require_rank(bias, 1, "conv2d bias");
  if (kernel.dim(2) != 3 || kernel.dim(3) != 3) {
    throw ShapeError("conv2d: kernel must be 3x3, got " + shape_string(kernel.shape()));
  }
  if (kernel.dim(1) != input.dim(0)) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                     " input channels but input has shape " + shape_string(input.shape()));
  }
  if (bias.dim(0) != kernel.dim(0)) {
    throw ShapeError("conv2d: bias length " + std::to_string(bias.dim(0)) +
                     " does not match kernel output channels " + std::to_string(kernel.dim(0)));
  }
}

// Adds one zero-padded input channel (rows of `width + 2`, `height + 2` rows)
// into `Block` output planes. Every output element receives the nine taps
// in fixed (ky, kx) order, so results do not depend on blocking or threads.
template <std::size_t Block>
inline void accumulate_channel(const float* padded, std::size_t row_begin, std::size_t row_end,
                               std::size_t width, const float* const* taps, float* const* out) {
  const std::size_t stride = width + 2;
  for (std::size_t y = row_begin; y < row_end; ++y) {
    const float* r0 = padded + y * stride;
    const float* r1 = r0 + stride;
    const float* r2 = r1 + stride;
    for (std::size_t b = 0; b < Block; ++b) {
      const float* w = taps[b];
      const float k0 = w[0], k1 = w[1], k2 = w[2], k3 = w[3], k4 = w[4], k5 = w[5], k6 = w[6], k7 = w[7],
                  k8 = w[8];
      float* __restrict d = out[b] + y * width;
      for (std::size_t x = 0; x < width; ++x) {
        d[x] += k0 * r0[x] + k1 * r0[x + 1] + k2 * r0[x + 2] + k3 * r1[x] + k4 * r1[x + 1] + k5 * r1[x + 2] +
                k6 * r2[x] + k7 * r2[x + 1] + k8 * r2[x + 2];
      }
    }
  }
}

inline std::vector<float> zero_padded(const float* plane, std::size_t height, std::size_t width) {
  const std::size_t stride = width + 2;
  std::vector<float> out((height + 2) * stride, 0.0f);
  for (std::size_t y = 0; y < height; ++y) {
    std::copy_n(plane + y * width, width, out.data() + (y + 1) * stride + 1);
  }
  return out;
}

}  // namespace detail

/// 3x3 convolution, stride 1, zero padding 1. Output channels are processed
/// in independent blocks, so the result is bit-identical for any `threads`.
inline Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                     unsigned threads = 1) {
  detail::check_conv_shapes(input, kernel, bias);
  const std::size_t in_ch = input.dim(0);
  const std::size_t height = input.dim(1);
  const std::size_t width = input.dim(2);
  const std::size_t out_ch = kernel.dim(0);
  const std::size_t plane = height * width;

  std::vector<std::vector<float>> padded(in_ch);
  for (std::size_t c = 0; c < in_ch; ++c) padded[c] = detail::zero_padded(input.data() + c * plane, height, width);

  Tensor output({out_ch, height, width});
  constexpr std::size_t kBlock = 4;
  const std::size_t blocks = (out_ch + kBlock - 1) / kBlock;

  parallel_for(blocks, threads, [&](std::size_t blk) {
    const std::size_t first = blk * kBlock;
    const std::size_t count = std::min(kBlock, out_ch - first);
    for (std::size_t b = 0; b < count; ++b) {
      std::fill_n(output.data() + (first + b) * plane, plane, bias[first + b]);
    }
    float* out[kBlock];
    for (std::size_t b = 0; b < count; ++b) out[b] = output.data() + (first + b) * plane;
    // Row tiles keep the block's output rows cache resident across channels.
    const std::size_t tile = std::max<std::size_t>(1, 4096 / width);
    for (std::size_t row = 0; row < height; row += tile) {
      const std::size_t row_end = std::min(height, row + tile);
      for (std::size_t c = 0; c < in_ch; ++c) {
        const float* in = padded[c].data();
        const float* taps[kBlock];
        for (std::size_t b = 0; b < count; ++b) taps[b] = kernel.data() + ((first + b) * in_ch + c) * 9;
        switch (count) {
          case 4: detail::accumulate_channel<4>(in, row, row_end, width, taps, out); break;
          case 3: detail::accumulate_channel<3>(in, row, row_end, width, taps, out); break;
          case 2: detail::accumulate_channel<2>(in, row, row_end, width, taps, out); break;
          default: detail::accumulate_channel<1>(in, row, row_end, width, taps, out); break;
        }
      }
    }
  });
  return output;
}

inline Tensor relu(Tensor input) {
  for (float& v : input.values()) v = std::max(v, 0.0f);
  return input;
}

/// Non-overlapping 2x2 max pooling; both spatial extents must be even.
inline Tensor maxpool2(const Tensor& input) {
  require_rank(input, 3, "maxpool2 input");
  const std::size_t channels = input.dim(0);
  const std::size_t height = input.dim(1);
  const std::size_t width = input.dim(2);
  if (height % 2 != 0 || width % 2 != 0) {
    throw ShapeError("maxpool2: spatial extents must be even, got " + shape_string(input.shape()));
  }
  Tensor output({channels, height / 2, width / 2});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < height / 2; ++y) {
      for (std::size_t x = 0; x < width / 2; ++x) {
        output.at(c, y, x) = std::max(std::max(input.at(c, 2 * y, 2 * x), input.at(c, 2 * y, 2 * x + 1)),
                                      std::max(input.at(c, 2 * y + 1, 2 * x), input.at(c, 2 * y + 1, 2 * x + 1)));
      }
    }
  }
  return output;
}

/// Global average pooling: per-channel spatial mean of a (C, H, W) map.
/// Sums are carried in double and rounded once.
inline std::vector<float> gap(const Tensor& input) {
  require_rank(input, 3, "gap input");
  const std::size_t channels = input.dim(0);
  const double inv_area = 1.0 / static_cast<double>(input.dim(1) * input.dim(2));
  std::vector<float> out(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (float v : input.channel(c)) sum += v;
    out[c] = static_cast<float>(sum * inv_area);
  }
  return out;
}

}  // namespace hdf
