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
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdf/classifier.hpp"
#include "hdf/dataset.hpp"
#include "hdf/feature_cache.hpp"
#include "hdf/features.hpp"
#include "hdf/image.hpp"
#include "hdf/parallel.hpp"

namespace hdf {

enum class FeatureType { OP, OW, SP, SW, HDF };

inline std::string_view to_string(FeatureType t) {
  switch (t) {
    case FeatureType::OP: return "OP";
    case FeatureType::OW: return "OW";
    case FeatureType::SP: return "SP";
    case FeatureType::SW: return "SW";
    case FeatureType::HDF: return "HDF";
  }
  return "?";
}

inline FeatureType parse_feature_type(std::string_view name) {
  if (name == "op" || name == "OP") return FeatureType::OP;
  if (name == "ow" || name == "OW") return FeatureType::OW;
  if (name == "sp" || name == "SP") return FeatureType::SP;
  if (name == "sw" || name == "SW") return FeatureType::SW;
  if (name == "hdf" || name == "HDF") return FeatureType::HDF;
  throw ConfigError("unknown feature type '" + std::string(name) + "' (expected hdf|op|ow|sp|sw)");
}

/// A single component type, or the fused descriptor under one pool operator.
struct FeatureConfig {
  FeatureType type = FeatureType::HDF;
  PoolOp pool = PoolOp::concat;

  std::string label() const {
    if (type != FeatureType::HDF) return std::string(to_string(type));
    return "HDF-" + std::string(to_string(pool));
  }
  std::uint32_t dim() const {
    return type == FeatureType::HDF && pool == PoolOp::concat ? kHybridConcatDim : kFeatureDim;
  }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// OP, OW, SP, SW, then HDF under max, mean, min and concat.
inline std::vector<FeatureConfig> default_feature_configs() {
  return {{FeatureType::OP, PoolOp::concat},  {FeatureType::OW, PoolOp::concat},  {FeatureType::SP, PoolOp::concat},
          {FeatureType::SW, PoolOp::concat},  {FeatureType::HDF, PoolOp::max},    {FeatureType::HDF, PoolOp::mean},
          {FeatureType::HDF, PoolOp::min},    {FeatureType::HDF, PoolOp::concat}};
}

/// Raw (unnormalized) OP|OW|SP|SW vectors concatenated, the input every
/// feature configuration is derived from.
inline constexpr std::uint32_t kComponentDim = 4 * kFeatureDim;

inline std::array<FeatureVector, 4> split_components(std::span<const float> raw) {
  if (raw.size() != kComponentDim) throw ShapeError("component record must hold 2048 values");
  constexpr std::array<FeatureSource, 4> order = {FeatureSource::OP, FeatureSource::OW, FeatureSource::SP,
                                                  FeatureSource::SW};
  std::array<FeatureVector, 4> parts;
  for (std::size_t k = 0; k < 4; ++k) {
    parts[k].source = order[k];
    parts[k].values.assign(raw.begin() + static_cast<std::ptrdiff_t>(k * kFeatureDim),
                           raw.begin() + static_cast<std::ptrdiff_t>((k + 1) * kFeatureDim));
  }
  return parts;
}

/// Final (L2-normalized) descriptor of one configuration.
inline std::vector<float> derive_feature(std::span<const float> raw_components, const FeatureConfig& config) {
  const auto parts = split_components(raw_components);
  if (config.type == FeatureType::HDF) return normalize(aggregate(config.pool, parts)).values;
  return l2_normalized(parts[static_cast<std::size_t>(config.type)].values);
}

/// Extracts the component record of every manifest image (flatten() order).
/// Images are processed in parallel; each record lands in its own slot.
template <Backbone Obj, Backbone Scn>
FeatureCache compute_components(const DatasetManifest& manifest, const Obj& object_backend,
                                const Scn& scene_backend, unsigned threads = 1,
                                const std::function<void(std::size_t)>& on_image_done = {}) {
  const auto images = flatten(manifest);
  FeatureCache cache;
  cache.dim = kComponentDim;
  cache.records.resize(images.size());
  parallel_for(images.size(), threads, [&](std::size_t i) {
    const Raster raster = to_rgb(read_pnm((manifest.root / images[i].path).string()));
    const auto parts = extract_components(object_backend, scene_backend, raster);
    FeatureRecord& r = cache.records[i];
    r.label = static_cast<std::uint32_t>(images[i].label);
    r.path = images[i].path;
    r.values.reserve(kComponentDim);
    for (const auto& p : parts) r.values.insert(r.values.end(), p.values.begin(), p.values.end());
  });
  if (on_image_done) {
    for (std::size_t i = 0; i < images.size(); ++i) on_image_done(i);
  }
  return cache;
}

/// Throws unless `cache` holds exactly the manifest's images in flatten() order.
inline void check_cache_matches(const DatasetManifest& manifest, const FeatureCache& cache) {
  const auto images = flatten(manifest);
  if (cache.records.size() != images.size()) {
    throw DataError("feature cache has " + std::to_string(cache.records.size()) + " records, dataset has " +
                    std::to_string(images.size()) + " images");
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (cache.records[i].path != images[i].path || cache.records[i].label != images[i].label) {
      throw DataError("feature cache record " + std::to_string(i) + " ('" + cache.records[i].path +
                      "') does not match dataset image '" + images[i].path + "'");
    }
  }
}

// --- Experiments ------------------------------------------------------------------

struct ConfigResult {
  FeatureConfig config;
  std::vector<double> accuracy;  // per repetition
  std::vector<int> chosen_c;     // per repetition
  double mean_accuracy = 0.0;

  friend bool operator==(const ConfigResult&, const ConfigResult&) = default;
};

struct ExperimentReport {
  std::string dataset;
  std::string protocol;
  std::uint64_t seed = 0;
  std::size_t repetitions = 0;
  std::vector<ConfigResult> results;
  bool complete = false;

  const ConfigResult* find(const FeatureConfig& config) const {
    for (const auto& r : results) {
      if (r.config == config) return &r;
    }
    return nullptr;
  }

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

struct ExperimentOptions {
  std::vector<FeatureConfig> configs = default_feature_configs();
  GridOptions grid;
  std::string protocol_name = "custom";
  // Called with the global image index of every row handed to C tuning.
  std::function<void(std::size_t)> on_tuning_row;
  // Called after each configuration completes, with the report so far.
  std::function<void(const ExperimentReport&)> on_progress;
};

namespace detail {

inline Matrix gather_rows(const std::vector<std::vector<float>>& features, std::span<const std::size_t> rows,
                          const std::function<void(std::size_t)>& observe = {}) {
  const std::size_t dim = features.empty() ? 0 : features.front().size();
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (observe) observe(rows[i]);
    const auto& f = features[rows[i]];
    for (std::size_t j = 0; j < dim; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
  }
  return out;
}

}  // namespace detail

/// For every configuration and repetition: tune C on the training images by
/// cross-validation, train on all training images, score the test images.
/// `components` must come from compute_components on the same manifest.
inline ExperimentReport run_experiment(const DatasetManifest& manifest, const FeatureCache& components,
                                       const SplitPlan& plan, const ExperimentOptions& options = {}) {
  check_cache_matches(manifest, components);
  if (components.dim != kComponentDim) throw FormatError(FormatErrc::dim_mismatch, "component cache must be 2048-dim");
  if (plan.repetitions.empty()) throw ConfigError("split plan has no repetitions");

  // Global index of (class, local index).
  std::vector<std::size_t> offset(manifest.classes.size(), 0);
  for (std::size_t k = 1; k < manifest.classes.size(); ++k) {
    offset[k] = offset[k - 1] + manifest.classes[k - 1].paths.size();
  }
  struct Rows {
    std::vector<std::size_t> train, test;
    std::vector<int> train_labels, test_labels;
  };
  std::vector<Rows> reps;
  for (const auto& rep : plan.repetitions) {
    if (rep.train.size() != manifest.classes.size() || rep.test.size() != manifest.classes.size()) {
      throw DataError("split plan does not cover every class");
    }
    Rows rows;
    for (std::size_t k = 0; k < manifest.classes.size(); ++k) {
      for (std::size_t i : rep.train[k]) {
        rows.train.push_back(offset[k] + i);
        rows.train_labels.push_back(static_cast<int>(k));
      }
      for (std::size_t i : rep.test[k]) {
        rows.test.push_back(offset[k] + i);
        rows.test_labels.push_back(static_cast<int>(k));
      }
    }
    reps.push_back(std::move(rows));
  }

  ExperimentReport report;
  report.dataset = manifest.name;
  report.protocol = options.protocol_name;
  report.seed = plan.seed;
  report.repetitions = plan.repetitions.size();

  for (const auto& config : options.configs) {
    std::vector<std::vector<float>> features(components.records.size());
    for (std::size_t i = 0; i < features.size(); ++i) features[i] = derive_feature(components.records[i].values, config);

    ConfigResult result;
    result.config = config;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      const Rows& rows = reps[r];
      const Matrix train = detail::gather_rows(features, rows.train, options.on_tuning_row);
      GridOptions grid = options.grid;
      grid.seed = mix_seed(plan.seed, 0xC0DE, r);
      const GridSearchReport search = grid_search_c(train, rows.train_labels, grid);
      const LinearModel model = train_ovr(train, rows.train_labels, search.best_c, grid.solver, grid.threads);
      const Matrix test = detail::gather_rows(features, rows.test);
      result.accuracy.push_back(evaluate(model, test, rows.test_labels));
      result.chosen_c.push_back(search.best_c);
    }
    result.mean_accuracy =
        std::accumulate(result.accuracy.begin(), result.accuracy.end(), 0.0) / static_cast<double>(result.accuracy.size());
    report.results.push_back(std::move(result));
    if (options.on_progress) options.on_progress(report);
  }
  report.complete = true;
  return report;
}

/// Rows of the per-feature-type table (OP, OW, SP, SW, HDF = concat) and the
/// per-aggregator table (Max, Mean, Min, Concat).
inline const std::vector<std::pair<std::string, FeatureConfig>>& feature_type_rows() {
  static const std::vector<std::pair<std::string, FeatureConfig>> rows = {
      {"OP", {FeatureType::OP, PoolOp::concat}}, {"OW", {FeatureType::OW, PoolOp::concat}},
      {"SP", {FeatureType::SP, PoolOp::concat}}, {"SW", {FeatureType::SW, PoolOp::concat}},
      {"HDF", {FeatureType::HDF, PoolOp::concat}}};
  return rows;
}

inline const std::vector<std::pair<std::string, FeatureConfig>>& aggregator_rows() {
  static const std::vector<std::pair<std::string, FeatureConfig>> rows = {
      {"Max", {FeatureType::HDF, PoolOp::max}}, {"Mean", {FeatureType::HDF, PoolOp::mean}},
      {"Min", {FeatureType::HDF, PoolOp::min}}, {"Concat", {FeatureType::HDF, PoolOp::concat}}};
  return rows;
}

inline nlohmann::json to_json(const ConfigResult& r) {
  return {{"config", r.config.label()},
          {"feature_type", std::string(to_string(r.config.type))},
          {"pool", r.config.type == FeatureType::HDF ? nlohmann::json(std::string(to_string(r.config.pool)))
                                                     : nlohmann::json(nullptr)},
          {"dim", r.config.dim()},
          {"accuracy", r.accuracy},
          {"chosen_c", r.chosen_c},
          {"mean_accuracy", r.mean_accuracy}};
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& r : report.results) configs.push_back(to_json(r));
  auto table = [&](const std::vector<std::pair<std::string, FeatureConfig>>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [name, config] : rows) {
      if (const ConfigResult* r = report.find(config)) {
        out.push_back({{"row", name}, {"accuracy", r->accuracy}, {"mean_accuracy", r->mean_accuracy}});
      }
    }
    return out;
  };
  return {{"dataset", report.dataset},
          {"protocol", report.protocol},
          {"seed", report.seed},
          {"repetitions", report.repetitions},
          {"complete", report.complete},
          {"configurations", std::move(configs)},
          {"feature_types", table(feature_type_rows())},
          {"aggregators", table(aggregator_rows())}};
}

}  // namespace hdf
