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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>

#include "hdf/binary_io.hpp"
#include "hdf/image.hpp"
#include "hdf/random.hpp"

namespace hdf {

/// Writes a small class-per-directory PPM dataset: class k images share a
/// base colour and stripe orientation, with per-image phase, brightness and
/// pixel noise. Deterministic in `seed`.
inline void write_synthetic_dataset(const std::filesystem::path& root, std::size_t classes = 3,
                                    std::size_t per_class = 30, std::size_t size = 64, std::uint64_t seed = 7) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  for (std::size_t k = 0; k < classes; ++k) {
    const fs::path dir = root / ("class_" + std::to_string(k));
    fs::create_directories(dir);
    const double hue = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
    const double base[3] = {128.0 + 80.0 * std::cos(hue), 128.0 + 80.0 * std::cos(hue - 2.1),
                            128.0 + 80.0 * std::cos(hue + 2.1)};
    const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
    const double freq = 0.15 + 0.1 * static_cast<double>(k);
    for (std::size_t i = 0; i < per_class; ++i) {
      SplitMix64 rng(mix_seed(seed, k, i));
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      const double gain = 0.85 + 0.3 * rng.uniform();
      Raster img = make_raster(size, size, 3);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double t = std::cos(angle) * static_cast<double>(x) + std::sin(angle) * static_cast<double>(y);
          const double stripe = 40.0 * std::sin(freq * t + phase);
          for (std::size_t c = 0; c < 3; ++c) {
            const double v = gain * base[c] + stripe + 12.0 * rng.normal();
            img.at(y, x, c) = static_cast<float>(std::round(std::clamp(v, 0.0, 255.0)));
          }
        }
      }
      char name[32];
      std::snprintf(name, sizeof(name), "img_%03zu.ppm", i);
      io::write_file((dir / name).string(), encode_ppm(img));
    }
  }
}

}  // namespace hdf
