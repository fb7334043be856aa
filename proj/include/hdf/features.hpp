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
#include <cmath>
#include <concepts>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdf/engine.hpp"
#include "hdf/error.hpp"
#include "hdf/image.hpp"
#include "hdf/ops.hpp"
#include "hdf/parallel.hpp"
#include "hdf/slicer.hpp"

namespace hdf {

inline constexpr std::size_t kFeatureDim = 512;
inline constexpr std::size_t kHybridConcatDim = 4 * kFeatureDim;

/// object <-> ImageNet-style weights, scene <-> Places-style weights.
enum class BackendKind { object, scene };

enum class FeatureSource { OP, OW, SP, SW };
enum class PoolOp { max, mean, min, concat };

inline std::string_view to_string(FeatureSource s) {
  switch (s) {
    case FeatureSource::OP: return "OP";
    case FeatureSource::OW: return "OW";
    case FeatureSource::SP: return "SP";
    case FeatureSource::SW: return "SW";
  }
  return "?";
}

inline std::string_view to_string(PoolOp op) {
  switch (op) {
    case PoolOp::max: return "max";
    case PoolOp::mean: return "mean";
    case PoolOp::min: return "min";
    case PoolOp::concat: return "concat";
  }
  return "?";
}

inline PoolOp parse_pool_op(std::string_view name) {
  if (name == "max") return PoolOp::max;
  if (name == "mean") return PoolOp::mean;
  if (name == "min") return PoolOp::min;
  if (name == "concat") return PoolOp::concat;
  throw ConfigError("unknown pool operator '" + std::string(name) + "' (expected max|mean|min|concat)");
}

struct FeatureVector {
  std::vector<float> values;
  FeatureSource source = FeatureSource::OP;
};

struct HybridFeature {
  std::vector<float> values;
  PoolOp pool_op = PoolOp::concat;
  bool normalized = false;
};

/// Anything that maps a preprocessed 3x224x224 tensor to a descriptor and
/// carries the channel means its inputs are centred with.
template <typename B>
concept Backbone = requires(const B& b, const Tensor& image) {
  { b.kind() } -> std::same_as<BackendKind>;
  { b.means() } -> std::convertible_to<std::array<float, 3>>;
  { b.embed(image) } -> std::convertible_to<std::vector<float>>;
};

/// A CNN trunk evaluated to pool5 followed by global average pooling.
/// Immutable after construction and safe to share across threads.
class Backend {
 public:
  Backend(BackendKind kind, NetworkSpec spec, WeightBundle weights)
      : kind_(kind), state_(std::make_shared<const State>(State{std::move(spec), std::move(weights)})) {
    validate_weights(state_->spec, state_->weights);
    if (state_->spec.pool_count() != 5) throw ShapeError("backend trunk must contain exactly five pools");
    if (state_->spec.input_channels() != 3) throw ShapeError("backend trunk must take 3 input channels");
    if (state_->spec.output_channels() != kFeatureDim) {
      throw ShapeError("backend trunk must end with " + std::to_string(kFeatureDim) + " channels, got " +
                       std::to_string(state_->spec.output_channels()));
    }
  }

  BackendKind kind() const noexcept { return kind_; }
  const std::array<float, 3>& means() const noexcept { return state_->weights.means; }
  const NetworkSpec& spec() const noexcept { return state_->spec; }
  const WeightBundle& weights() const noexcept { return state_->weights; }

  std::vector<float> embed(const Tensor& image) const {
    return gap(forward_to_pool5(state_->spec, state_->weights, image));
  }

 private:
  struct State {
    NetworkSpec spec;
    WeightBundle weights;
  };
  BackendKind kind_;
  std::shared_ptr<const State> state_;
};

static_assert(Backbone<Backend>);

/// Bilinear resize to 224x224 in pixel units, before mean subtraction.
inline Tensor working_image(const Raster& image) { return raster_to_tensor(image, kInputSize, kInputSize); }

/// Resize to 224x224, channel-major, minus the backend's channel means.
inline Tensor preprocess(const Raster& image, const std::array<float, 3>& means) {
  return subtract_means(working_image(image), means);
}

namespace detail {

inline std::vector<float> checked_descriptor(std::vector<float> v) {
  if (v.size() != kFeatureDim) {
    throw ShapeError("backbone produced " + std::to_string(v.size()) + " values, expected " +
                     std::to_string(kFeatureDim));
  }
  for (float x : v) {
    if (!std::isfinite(x)) throw DataError("backbone produced a non-finite feature value");
  }
  return v;
}

inline FeatureSource whole_source(BackendKind k) {
  return k == BackendKind::object ? FeatureSource::OW : FeatureSource::SW;
}
inline FeatureSource part_source(BackendKind k) {
  return k == BackendKind::object ? FeatureSource::OP : FeatureSource::SP;
}

}  // namespace detail

/// Whole-image descriptor from an already resized working image.
template <Backbone B>
FeatureVector extract_whole_working(const B& backend, const Tensor& working) {
  return {detail::checked_descriptor(backend.embed(subtract_means(working, backend.means()))),
          detail::whole_source(backend.kind())};
}

/// Mean of the 20 slice descriptors. Slices may run on several threads; the
/// sum is always taken in slice order.
template <Backbone B>
FeatureVector extract_part_working(const B& backend, const Tensor& working, unsigned threads = 1) {
  const auto& masks = all_masks();
  std::vector<std::vector<float>> per_slice(masks.size());
  parallel_for(masks.size(), threads, [&](std::size_t i) {
    SubImage sub = render_slice(working, masks[i], backend.means());
    per_slice[i] = detail::checked_descriptor(backend.embed(subtract_means(std::move(sub.pixels), backend.means())));
  });
  std::vector<double> sum(kFeatureDim, 0.0);
  for (const auto& v : per_slice) {
    for (std::size_t j = 0; j < kFeatureDim; ++j) sum[j] += v[j];
  }
  FeatureVector out{std::vector<float>(kFeatureDim), detail::part_source(backend.kind())};
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    out.values[j] = static_cast<float>(sum[j] / static_cast<double>(per_slice.size()));
  }
  return out;
}

template <Backbone B>
FeatureVector extract_whole(const B& backend, const Raster& image) {
  return extract_whole_working(backend, working_image(image));
}

template <Backbone B>
FeatureVector extract_part(const B& backend, const Raster& image, unsigned threads = 1) {
  return extract_part_working(backend, working_image(image), threads);
}

/// The four component descriptors in fused order OP, OW, SP, SW.
template <Backbone Obj, Backbone Scn>
std::array<FeatureVector, 4> extract_components(const Obj& object_backend, const Scn& scene_backend,
                                                const Raster& image, unsigned threads = 1) {
  if (object_backend.kind() != BackendKind::object || scene_backend.kind() != BackendKind::scene) {
    throw ConfigError("extract_components needs an object backend and a scene backend");
  }
  const Tensor working = working_image(image);
  return {extract_part_working(object_backend, working, threads), extract_whole_working(object_backend, working),
          extract_part_working(scene_backend, working, threads), extract_whole_working(scene_backend, working)};
}

/// Fuses OP, OW, SP, SW (in that order) elementwise, or concatenates them.
inline HybridFeature aggregate(PoolOp op, std::span<const FeatureVector> parts) {
  constexpr std::array<FeatureSource, 4> order = {FeatureSource::OP, FeatureSource::OW, FeatureSource::SP,
                                                  FeatureSource::SW};
  if (parts.size() != 4) {
    throw ShapeError("aggregate expects 4 feature vectors, got " + std::to_string(parts.size()));
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (parts[k].values.size() != kFeatureDim) {
      throw ShapeError("aggregate: vector " + std::to_string(k) + " has " + std::to_string(parts[k].values.size()) +
                       " values, expected " + std::to_string(kFeatureDim));
    }
    if (parts[k].source != order[k]) {
      throw ShapeError("aggregate: inputs must be ordered OP, OW, SP, SW");
    }
  }
  HybridFeature out;
  out.pool_op = op;
  if (op == PoolOp::concat) {
    out.values.reserve(kHybridConcatDim);
    for (const auto& p : parts) out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    return out;
  }
  out.values.resize(kFeatureDim);
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    const float a = parts[0].values[j], b = parts[1].values[j], c = parts[2].values[j], d = parts[3].values[j];
    switch (op) {
      case PoolOp::max: out.values[j] = std::max({a, b, c, d}); break;
      case PoolOp::min: out.values[j] = std::min({a, b, c, d}); break;
      default:
        out.values[j] = static_cast<float>((static_cast<double>(a) + b + c + d) / 4.0);
        break;
    }
  }
  return out;
}

/// Scales to unit Euclidean norm (norm accumulated in double).
inline std::vector<float> l2_normalized(std::span<const float> values) {
  double sq = 0.0;
  for (float v : values) sq += static_cast<double>(v) * v;
  if (!(sq > 0.0)) throw DataError("cannot normalize a zero feature vector");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<float>(values[i] * inv);
  return out;
}

inline HybridFeature normalize(HybridFeature feature) {
  feature.values = l2_normalized(feature.values);
  feature.normalized = true;
  return feature;
}

template <Backbone Obj, Backbone Scn>
HybridFeature extract_hdf(const Obj& object_backend, const Scn& scene_backend, const Raster& image, PoolOp op,
                          unsigned threads = 1) {
  const auto parts = extract_components(object_backend, scene_backend, image, threads);
  return normalize(aggregate(op, parts));
}

}  // namespace hdf
