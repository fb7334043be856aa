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

#include <cstddef>
#include <string>
#include <vector>

#include "hdf/error.hpp"

namespace hdf {

enum class LayerKind { conv3x3, relu, maxpool2 };

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in_channels = 0;   // conv3x3 only
  std::size_t out_channels = 0;  // conv3x3 only

  static LayerSpec conv(std::size_t in, std::size_t out) { return {LayerKind::conv3x3, in, out}; }
  static LayerSpec rectifier() { return {LayerKind::relu, 0, 0}; }
  static LayerSpec pool() { return {LayerKind::maxpool2, 0, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Ordered layer list of a plain conv/relu/pool trunk.
class NetworkSpec {
 public:
  NetworkSpec() = default;

  explicit NetworkSpec(std::vector<LayerSpec> layers) : layers_(std::move(layers)) { validate(); }

  /// The 16-layer VGG configuration without batch norm, cut after the fifth
  /// max-pool: (64,64)P (128,128)P (256,256,256)P (512,512,512)P (512,512,512)P.
  static NetworkSpec vgg16_pool5() {
    const std::vector<std::vector<std::size_t>> blocks = {
        {64, 64}, {128, 128}, {256, 256, 256}, {512, 512, 512}, {512, 512, 512}};
    std::vector<LayerSpec> layers;
    std::size_t channels = 3;
    for (const auto& block : blocks) {
      for (std::size_t out : block) {
        layers.push_back(LayerSpec::conv(channels, out));
        layers.push_back(LayerSpec::rectifier());
        channels = out;
      }
      layers.push_back(LayerSpec::pool());
    }
    return NetworkSpec(std::move(layers));
  }

  /// A cheap trunk with the same input/output contract as vgg16_pool5
  /// (3x224x224 in, 512x7x7 out, five pools, two convs). Used for smoke runs
  /// and tests with random weights.
  static NetworkSpec compact_pool5() {
    return NetworkSpec({LayerSpec::pool(), LayerSpec::pool(), LayerSpec::pool(), LayerSpec::conv(3, 16),
                        LayerSpec::rectifier(), LayerSpec::pool(), LayerSpec::conv(16, 512),
                        LayerSpec::rectifier(), LayerSpec::pool()});
  }

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }

  std::size_t conv_count() const noexcept { return count(LayerKind::conv3x3); }
  std::size_t pool_count() const noexcept { return count(LayerKind::maxpool2); }

  std::size_t input_channels() const {
    for (const auto& layer : layers_) {
      if (layer.kind == LayerKind::conv3x3) return layer.in_channels;
    }
    throw ShapeError("network has no convolution layers");
  }

  std::size_t output_channels() const {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      if (it->kind == LayerKind::conv3x3) return it->out_channels;
    }
    throw ShapeError("network has no convolution layers");
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;

 private:
  std::size_t count(LayerKind kind) const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.kind == kind;
    return n;
  }

  void validate() const {
    std::size_t channels = 0;
    bool seen_conv = false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& layer = layers_[i];
      if (layer.kind != LayerKind::conv3x3) continue;
      if (layer.in_channels == 0 || layer.out_channels == 0) {
        throw ShapeError("layer " + std::to_string(i) + ": conv channel counts must be positive");
      }
      if (seen_conv && layer.in_channels != channels) {
        throw ShapeError("layer " + std::to_string(i) + ": conv expects " + std::to_string(layer.in_channels) +
                         " channels but previous conv produces " + std::to_string(channels));
      }
      channels = layer.out_channels;
      seen_conv = true;
    }
    if (!seen_conv) throw ShapeError("network needs at least one conv3x3 layer");
  }

  std::vector<LayerSpec> layers_;
};

}  // namespace hdf
