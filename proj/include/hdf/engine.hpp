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

#include <string>

#include "hdf/error.hpp"
#include "hdf/network.hpp"
#include "hdf/ops.hpp"
#include "hdf/tensor.hpp"
#include "hdf/weights.hpp"

namespace hdf {

inline constexpr std::size_t kInputSize = 224;

/// Applies every layer of `spec` in order. Weights must already be validated
/// against the spec; input channel count must match the first conv.
inline Tensor forward(const NetworkSpec& spec, const WeightBundle& weights, const Tensor& input,
                      unsigned threads = 1) {
  require_rank(input, 3, "network input");
  if (input.dim(0) != spec.input_channels()) {
    throw ShapeError("network expects " + std::to_string(spec.input_channels()) + " input channels, got " +
                     shape_string(input.shape()));
  }
  Tensor x = input;
  std::size_t entry = 0;
  for (const auto& layer : spec.layers()) {
    switch (layer.kind) {
      case LayerKind::conv3x3: {
        const ConvWeights& w = weights.layers.at(entry++);
        x = conv2d(x, w.kernel, w.bias, threads);
        break;
      }
      case LayerKind::relu:
        x = relu(std::move(x));
        break;
      case LayerKind::maxpool2:
        x = maxpool2(x);
        break;
    }
  }
  return x;
}

/// Runs a 3x224x224 preprocessed image to the output of the fifth pool.
inline Tensor forward_to_pool5(const NetworkSpec& spec, const WeightBundle& weights, const Tensor& image,
                               unsigned threads = 1) {
  validate_weights(spec, weights);
  if (image.shape() != Shape{3, kInputSize, kInputSize}) {
    throw ShapeError("forward_to_pool5: input must be 3x224x224, got " + shape_string(image.shape()));
  }
  if (spec.pool_count() != 5) {
    throw ShapeError("forward_to_pool5: network has " + std::to_string(spec.pool_count()) + " pools, expected 5");
  }
  return forward(spec, weights, image, threads);
}

/// Finds the known trunk whose conv shapes match `bundle`.
inline NetworkSpec infer_network(const WeightBundle& bundle) {
  for (const auto& candidate : {NetworkSpec::vgg16_pool5(), NetworkSpec::compact_pool5()}) {
    try {
      validate_weights(candidate, bundle);
      return candidate;
    } catch (const ShapeError&) {
    }
  }
  throw ShapeError("weight bundle matches neither the vgg16 nor the compact pool5 trunk");
}

}  // namespace hdf
