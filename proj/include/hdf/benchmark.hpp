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
#include <chrono>
#include <cmath>
#include <cstdint>

#include "hdf/ops.hpp"
#include "hdf/random.hpp"
#include "hdf/tensor.hpp"

namespace hdf {

/// Straightforward six-loop convolution with bounds checks in the innermost
/// loop. Baseline for the benchmark command only.
inline Tensor conv2d_naive(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  detail::check_conv_shapes(input, kernel, bias);
  const long in_ch = static_cast<long>(input.dim(0));
  const long height = static_cast<long>(input.dim(1));
  const long width = static_cast<long>(input.dim(2));
  const long out_ch = static_cast<long>(kernel.dim(0));
  Tensor out({kernel.dim(0), input.dim(1), input.dim(2)});
  for (long o = 0; o < out_ch; ++o) {
    for (long y = 0; y < height; ++y) {
      for (long x = 0; x < width; ++x) {
        float acc = bias[static_cast<std::size_t>(o)];
        for (long c = 0; c < in_ch; ++c) {
          for (long ky = 0; ky < 3; ++ky) {
            for (long kx = 0; kx < 3; ++kx) {
              const long iy = y + ky - 1;
              const long ix = x + kx - 1;
              if (iy < 0 || iy >= height || ix < 0 || ix >= width) continue;
              acc += input.at(static_cast<std::size_t>(c), static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) *
                     kernel[static_cast<std::size_t>(((o * in_ch + c) * 3 + ky) * 3 + kx)];
            }
          }
        }
        out.at(static_cast<std::size_t>(o), static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc;
      }
    }
  }
  return out;
}

struct ConvBenchmark {
  double naive_seconds = 0.0;
  double fast_seconds = 0.0;
  double speedup = 0.0;
  double max_relative_error = 0.0;  // max |fast - naive| / max |naive|
};

/// Times conv2d against conv2d_naive on one (in_ch, size, size) -> out_ch
/// layer, single-threaded. The fast path keeps the best of `repeats` runs.
inline ConvBenchmark benchmark_conv(std::size_t in_ch = 64, std::size_t size = 224, std::size_t out_ch = 64,
                                    std::uint64_t seed = 1, int repeats = 3) {
  SplitMix64 rng(seed);
  Tensor input({in_ch, size, size});
  for (float& v : input.values()) v = static_cast<float>(rng.normal());
  Tensor kernel({out_ch, in_ch, 3, 3});
  const double scale = std::sqrt(2.0 / static_cast<double>(in_ch * 9));
  for (float& v : kernel.values()) v = static_cast<float>(rng.normal() * scale);
  Tensor bias({out_ch});
  for (float& v : bias.values()) v = static_cast<float>(rng.normal() * 0.1);

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const Tensor reference = conv2d_naive(input, kernel, bias);
  const double naive = std::chrono::duration<double>(clock::now() - t0).count();

  double fast = 1e300;
  Tensor result;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    t0 = clock::now();
    result = conv2d(input, kernel, bias, 1);
    fast = std::min(fast, std::chrono::duration<double>(clock::now() - t0).count());
  }

  double max_ref = 0.0, max_diff = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    max_ref = std::max(max_ref, static_cast<double>(std::fabs(reference[i])));
    max_diff = std::max(max_diff, static_cast<double>(std::fabs(result[i] - reference[i])));
  }
  return {naive, fast, naive / fast, max_ref > 0.0 ? max_diff / max_ref : max_diff};
}

}  // namespace hdf
