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

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hdf/binary_io.hpp"
#include "hdf/error.hpp"
#include "hdf/network.hpp"
#include "hdf/random.hpp"
#include "hdf/tensor.hpp"

namespace hdf {

struct ConvWeights {
  std::string name;
  Tensor kernel;  // (out, in, 3, 3)
  Tensor bias;    // (out)

  friend bool operator==(const ConvWeights&, const ConvWeights&) = default;
};

/// Parameters for every conv layer of a NetworkSpec plus the per-channel
/// input means (pixel units) the network was trained with.
struct WeightBundle {
  std::array<float, 3> means{};
  std::vector<ConvWeights> layers;

  friend bool operator==(const WeightBundle&, const WeightBundle&) = default;
};

inline constexpr std::string_view kWeightMagic = "HDFW";
inline constexpr std::uint32_t kWeightVersion = 1;

/// Throws ShapeError unless the bundle has exactly one correctly shaped entry
/// per conv layer of `spec` and sane means.
inline void validate_weights(const NetworkSpec& spec, const WeightBundle& bundle) {
  for (float m : bundle.means) {
    if (!std::isfinite(m) || m < 0.0f || m > 255.0f) {
      throw ShapeError("weight bundle means must lie in [0, 255]");
    }
  }
  if (bundle.layers.size() != spec.conv_count()) {
    throw ShapeError("weight bundle has " + std::to_string(bundle.layers.size()) + " conv entries, network has " +
                     std::to_string(spec.conv_count()));
  }
  std::size_t entry = 0;
  for (const auto& layer : spec.layers()) {
    if (layer.kind != LayerKind::conv3x3) continue;
    const ConvWeights& w = bundle.layers[entry];
    const Shape expected{layer.out_channels, layer.in_channels, 3, 3};
    if (w.kernel.shape() != expected) {
      throw ShapeError("entry '" + w.name + "': kernel shape " + shape_string(w.kernel.shape()) + ", expected " +
                       shape_string(expected));
    }
    if (w.bias.shape() != Shape{layer.out_channels}) {
      throw ShapeError("entry '" + w.name + "': bias shape " + shape_string(w.bias.shape()) + ", expected (" +
                       std::to_string(layer.out_channels) + ")");
    }
    ++entry;
  }
}

inline std::string encode_weights(const WeightBundle& bundle) {
  io::ByteWriter out;
  out.put_bytes(kWeightMagic);
  out.put_u32(kWeightVersion);
  for (float m : bundle.means) out.put_f32(m);
  out.put_u32(static_cast<std::uint32_t>(bundle.layers.size()));
  for (const auto& layer : bundle.layers) {
    if (layer.kernel.rank() != 4 || layer.bias.rank() != 1) {
      throw ShapeError("entry '" + layer.name + "': kernel must be rank 4 and bias rank 1");
    }
    out.put_u32(static_cast<std::uint32_t>(layer.name.size()));
    out.put_bytes(layer.name);
    for (std::size_t d : layer.kernel.shape()) out.put_u32(static_cast<std::uint32_t>(d));
    out.put_f32s(layer.kernel.values());
    out.put_u32(static_cast<std::uint32_t>(layer.bias.dim(0)));
    out.put_f32s(layer.bias.values());
  }
  return out.take();
}

inline WeightBundle decode_weights(std::string_view bytes) {
  io::ByteReader in(bytes, "weight bundle");
  if (bytes.size() < kWeightMagic.size() || bytes.substr(0, kWeightMagic.size()) != kWeightMagic) {
    throw FormatError(FormatErrc::bad_magic, "weight bundle does not start with HDFW");
  }
  in.get_bytes(kWeightMagic.size(), "magic");
  const std::uint32_t version = in.get_u32("version");
  if (version != kWeightVersion) {
    throw FormatError(FormatErrc::unsupported_version, "weight bundle version " + std::to_string(version));
  }
  WeightBundle bundle;
  for (float& m : bundle.means) m = in.get_f32("channel means");
  const std::uint32_t count = in.get_u32("entry count");
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::string label = "entry " + std::to_string(e) + " of " + std::to_string(count);
    if (in.at_end()) {
      throw FormatError(FormatErrc::truncated,
                        "truncated bundle: header declares " + std::to_string(count) + " entries, found " +
                            std::to_string(e));
    }
    ConvWeights layer;
    const std::uint32_t name_len = in.get_u32(label + " name length");
    layer.name = std::string(in.get_bytes(name_len, label + " name"));
    Shape kshape(4);
    for (auto& d : kshape) d = in.get_u32(label + " kernel dims");
    for (std::size_t d : kshape) {
      if (d == 0) throw FormatError(FormatErrc::shape_mismatch, label + ": zero kernel extent");
    }
    if (kshape[2] != 3 || kshape[3] != 3) {
      throw FormatError(FormatErrc::shape_mismatch, label + ": kernel is not 3x3, dims " + shape_string(kshape));
    }
    auto kdata = in.get_f32s(Tensor::element_count(kshape), label + " kernel data");
    layer.kernel = Tensor(kshape, std::move(kdata));
    const std::uint32_t bias_dim = in.get_u32(label + " bias dim");
    if (bias_dim != kshape[0]) {
      throw FormatError(FormatErrc::shape_mismatch, label + ": bias dim " + std::to_string(bias_dim) +
                                                        " does not match kernel output channels " +
                                                        std::to_string(kshape[0]));
    }
    layer.bias = Tensor(Shape{bias_dim}, in.get_f32s(bias_dim, label + " bias data"));
    bundle.layers.push_back(std::move(layer));
  }
  if (!in.at_end()) {
    throw FormatError(FormatErrc::trailing_data,
                      std::to_string(in.remaining()) + " unexpected bytes after the last entry");
  }
  return bundle;
}

inline void save_weights(const WeightBundle& bundle, const std::string& path) {
  io::write_file(path, encode_weights(bundle));
}

inline WeightBundle load_weights(const std::string& path) { return decode_weights(io::read_file(path)); }

/// He-normal kernels and zero biases for `spec`, reproducible from `seed`.
inline WeightBundle random_weights(const NetworkSpec& spec, std::uint64_t seed,
                                   std::array<float, 3> means = {0.0f, 0.0f, 0.0f}) {
  WeightBundle bundle;
  bundle.means = means;
  SplitMix64 rng(seed);
  std::size_t index = 0;
  for (const auto& layer : spec.layers()) {
    if (layer.kind != LayerKind::conv3x3) continue;
    ++index;
    ConvWeights w;
    w.name = "conv" + std::to_string(index);
    w.kernel = Tensor({layer.out_channels, layer.in_channels, 3, 3});
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.in_channels * 9));
    for (float& v : w.kernel.values()) v = static_cast<float>(rng.normal() * scale);
    w.bias = Tensor({layer.out_channels});
    bundle.layers.push_back(std::move(w));
  }
  return bundle;
}

}  // namespace hdf
