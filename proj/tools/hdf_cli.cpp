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

// Command-line front end: slice, extract, train, eval, experiment,
// validate-weights, plus bench / make-weights / make-synthetic helpers.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "hdf/hdf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

/// Shared flags; unset optionals fall back to the config file, then defaults.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> object_weights;
  std::optional<std::string> scene_weights;
  std::optional<std::string> pool;
  std::optional<std::string> feature_type;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> dataset;
  std::optional<std::string> protocol;
  std::optional<std::size_t> train_per_class;
  std::optional<std::size_t> test_per_class;
  std::optional<std::size_t> repetitions;
  std::optional<std::string> split_file;
  std::optional<int> folds;
};

struct CliConfig {
  std::string object_weights;
  std::string scene_weights;
  hdf::PoolOp pool = hdf::PoolOp::concat;
  hdf::FeatureType feature_type = hdf::FeatureType::HDF;
  std::string dataset_root;
  std::string protocol = "custom";
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  unsigned threads = hdf::default_thread_count();
  std::size_t train_per_class = 20;
  std::optional<std::size_t> test_per_class;
  std::size_t repetitions = 1;
  std::string split_file;
  int folds = 5;
};

void add_shared_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Flat JSON config file; flags override its values");
  cmd->add_option("--object-weights", f.object_weights, "HDFW weights of the object backend");
  cmd->add_option("--scene-weights", f.scene_weights, "HDFW weights of the scene backend");
  cmd->add_option("--pool", f.pool, "Aggregation operator: max|mean|min|concat");
  cmd->add_option("--feature-type", f.feature_type, "Feature type: hdf|op|ow|sp|sw");
  cmd->add_option("--seed", f.seed, "Seed for splits and fold assignment");
  cmd->add_option("--threads", f.threads, "Worker threads (1 = reference serial path)");
  cmd->add_option("--out", f.out, "Output directory");
}

template <typename T>
void take(std::optional<T>& flag, const json& file, const char* key, T& target) {
  if (flag) {
    target = *flag;
  } else if (file.contains(key) && !file.at(key).is_null()) {
    try {
      target = file.at(key).get<T>();
    } catch (const json::exception& e) {
      throw hdf::ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

CliConfig resolve(Flags& f) {
  json file = json::object();
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw hdf::ConfigError("cannot read config file " + *f.config);
    try {
      in >> file;
    } catch (const json::exception& e) {
      throw hdf::ConfigError("config file " + *f.config + " is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw hdf::ConfigError("config file must hold a flat JSON object");
  }
  CliConfig c;
  std::string pool = "concat", feature_type = "hdf";
  take(f.object_weights, file, "object_weights", c.object_weights);
  take(f.scene_weights, file, "scene_weights", c.scene_weights);
  take(f.pool, file, "pool_op", pool);
  take(f.feature_type, file, "feature_type", feature_type);
  take(f.dataset, file, "dataset_root", c.dataset_root);
  take(f.protocol, file, "protocol", c.protocol);
  take(f.seed, file, "seed", c.seed);
  take(f.out, file, "output_dir", c.output_dir);
  take(f.threads, file, "threads", c.threads);
  take(f.train_per_class, file, "train_per_class", c.train_per_class);
  std::size_t test = 0;
  std::optional<std::size_t> test_flag = f.test_per_class;
  if (test_flag || (file.contains("test_per_class") && !file.at("test_per_class").is_null())) {
    take(test_flag, file, "test_per_class", test);
    c.test_per_class = test;
  }
  take(f.repetitions, file, "repetitions", c.repetitions);
  take(f.split_file, file, "split_file", c.split_file);
  take(f.folds, file, "folds", c.folds);
  c.pool = hdf::parse_pool_op(pool);
  c.feature_type = hdf::parse_feature_type(feature_type);
  if (c.threads == 0) throw hdf::ConfigError("--threads must be at least 1");
  return c;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw hdf::ConfigError(std::string(what) + " is required");
  if (!fs::is_regular_file(path)) throw hdf::ConfigError(std::string(what) + " '" + path + "' does not exist");
}

void require_dir(const std::string& path, const char* what) {
  if (path.empty()) throw hdf::ConfigError(std::string(what) + " is required");
  if (!fs::is_directory(path)) throw hdf::ConfigError(std::string(what) + " '" + path + "' is not a directory");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw hdf::DataError("cannot create output directory '" + dir + "'");
}

hdf::Backend load_backend(const std::string& path, hdf::BackendKind kind) {
  hdf::WeightBundle weights = hdf::load_weights(path);
  hdf::NetworkSpec spec = hdf::infer_network(weights);
  return hdf::Backend(kind, std::move(spec), std::move(weights));
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

hdf::FeatureConfig feature_config(const CliConfig& c) { return {c.feature_type, c.pool}; }

// --- slice --------------------------------------------------------------------

int cmd_slice(const std::string& image_path, Flags& flags) {
  CliConfig c = resolve(flags);
  require_file(image_path, "input image");
  std::array<float, 3> fill{0.0f, 0.0f, 0.0f};
  if (!c.object_weights.empty()) {
    require_file(c.object_weights, "object weights");
    fill = hdf::load_weights(c.object_weights).means;
  }
  const hdf::Raster raster = hdf::to_rgb(hdf::read_pnm(image_path));
  const hdf::Tensor working = hdf::working_image(raster);
  ensure_out_dir(c.output_dir);

  std::printf("%-8s %7s %5s %5s %6s %6s\n", "slice", "area", "top", "left", "height", "width");
  for (const auto& mask : hdf::all_masks()) {
    const std::string stem = std::string(hdf::to_string(mask.technique)) + "_" + std::to_string(mask.index);
    const hdf::SubImage sub = hdf::render_slice(working, mask, fill);
    hdf::io::write_file((fs::path(c.output_dir) / (stem + ".ppm")).string(), hdf::encode_ppm(sub.pixels));
    hdf::io::write_file((fs::path(c.output_dir) / (stem + ".pgm")).string(),
                        hdf::encode_pgm(mask.mask, hdf::kSliceGrid, hdf::kSliceGrid));
    std::printf("%-8s %7zu %5zu %5zu %6zu %6zu\n", stem.c_str(), mask.area(), mask.bbox.top, mask.bbox.left,
                mask.bbox.height, mask.bbox.width);
  }
  std::printf("wrote %zu files to %s\n", 2 * hdf::kSliceCount, c.output_dir.c_str());
  return kOk;
}

// --- extract ------------------------------------------------------------------

int cmd_extract(Flags& flags, const std::optional<std::string>& cache_flag) {
  CliConfig c = resolve(flags);
  require_dir(c.dataset_root, "dataset root");
  require_file(c.object_weights, "object weights");
  require_file(c.scene_weights, "scene weights");
  const std::string cache_path = cache_flag ? *cache_flag : (fs::path(c.output_dir) / "features.hdfc").string();

  const hdf::Backend object = load_backend(c.object_weights, hdf::BackendKind::object);
  const hdf::Backend scene = load_backend(c.scene_weights, hdf::BackendKind::scene);
  const hdf::DatasetManifest manifest = hdf::scan_dataset(c.dataset_root);
  if (manifest.skipped_files) std::fprintf(stderr, "warning: skipped %zu non-image files\n", manifest.skipped_files);
  const hdf::FeatureConfig config = feature_config(c);

  const auto images = hdf::flatten(manifest);
  hdf::FeatureCache cache;
  cache.dim = config.dim();
  cache.records.resize(images.size());
  std::vector<std::string> failures(images.size());
  hdf::parallel_for(images.size(), c.threads, [&](std::size_t i) {
    try {
      const hdf::Raster raster = hdf::to_rgb(hdf::read_pnm((manifest.root / images[i].path).string()));
      const auto parts = hdf::extract_components(object, scene, raster);
      std::vector<float> raw;
      for (const auto& p : parts) raw.insert(raw.end(), p.values.begin(), p.values.end());
      cache.records[i] = {static_cast<std::uint32_t>(images[i].label), images[i].path,
                          hdf::derive_feature(raw, config)};
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    std::fprintf(stderr, "error: %s: %s\n", images[i].path.c_str(), failures[i].c_str());
  }
  if (failed) {
    std::fprintf(stderr, "%zu of %zu images failed; no cache written\n", failed, images.size());
    return kDataError;
  }
  const fs::path parent = fs::path(cache_path).parent_path();
  if (!parent.empty()) ensure_out_dir(parent.string());
  hdf::save_cache(cache, cache_path);
  std::printf("extracted %zu %s features of dim %u to %s\n", cache.records.size(), config.label().c_str(), cache.dim,
              cache_path.c_str());
  return kOk;
}

// --- train / eval ----------------------------------------------------------------

std::pair<hdf::Matrix, std::vector<int>> to_matrix(const hdf::FeatureCache& cache) {
  hdf::Matrix x(static_cast<Eigen::Index>(cache.records.size()), static_cast<Eigen::Index>(cache.dim));
  std::vector<int> labels;
  for (std::size_t i = 0; i < cache.records.size(); ++i) {
    for (std::size_t j = 0; j < cache.dim; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cache.records[i].values[j];
    }
    labels.push_back(static_cast<int>(cache.records[i].label));
  }
  return {std::move(x), std::move(labels)};
}

int cmd_train(Flags& flags, const std::string& features, std::optional<int> fixed_c) {
  CliConfig c = resolve(flags);
  require_file(features, "feature cache");
  if (fixed_c && (*fixed_c < 1 || *fixed_c > 100)) throw hdf::ConfigError("--c must lie in 1..100");
  if (c.folds < 2) throw hdf::ConfigError("--folds must be at least 2");
  const hdf::FeatureCache cache = hdf::load_cache(features);
  auto [x, labels] = to_matrix(cache);

  json grid_json = nullptr;
  int best_c = fixed_c.value_or(0);
  if (!fixed_c) {
    hdf::GridOptions grid;
    grid.folds = c.folds;
    grid.seed = c.seed;
    grid.threads = c.threads;
    const hdf::GridSearchReport report = hdf::grid_search_c(x, labels, grid);
    best_c = report.best_c;
    grid_json = {{"c_values", report.c_values},
                 {"mean_accuracy", report.mean_accuracy},
                 {"best_c", report.best_c},
                 {"folds", report.folds}};
  }
  const hdf::LinearModel model = hdf::train_ovr(x, labels, best_c, {}, c.threads);
  const double train_acc = hdf::evaluate(model, x, labels);

  ensure_out_dir(c.output_dir);
  hdf::save_model(model, (fs::path(c.output_dir) / "model.hdfm").string());
  const json summary = {{"best_c", best_c}, {"train_accuracy", train_acc}, {"grid_search", grid_json}};
  hdf::io::write_file((fs::path(c.output_dir) / "train.json").string(), summary.dump(2) + "\n");
  std::printf("trained %zu-class model with C=%d, training accuracy %s%%\n", model.classes, best_c,
              percent(train_acc).c_str());
  return kOk;
}

int cmd_eval(Flags& flags, const std::string& model_path, const std::string& features) {
  CliConfig c = resolve(flags);
  require_file(model_path, "model file");
  require_file(features, "feature cache");
  const hdf::LinearModel model = hdf::load_model(model_path);
  const hdf::FeatureCache cache = hdf::load_cache(features, static_cast<std::uint32_t>(model.dim));
  auto [x, labels] = to_matrix(cache);
  const double accuracy = hdf::evaluate(model, x, labels);
  const json out = {{"model", model_path}, {"features", features}, {"samples", labels.size()}, {"accuracy", accuracy}};
  std::printf("%s\n", out.dump(2).c_str());
  if (flags.out || flags.config) {
    ensure_out_dir(c.output_dir);
    hdf::io::write_file((fs::path(c.output_dir) / "eval.json").string(), out.dump(2) + "\n");
  }
  return kOk;
}

// --- experiment -------------------------------------------------------------------

std::string render_tables(const hdf::ExperimentReport& report) {
  std::ostringstream os;
  auto table = [&](const char* title, const std::vector<std::pair<std::string, hdf::FeatureConfig>>& rows) {
    os << title << "\n";
    os << "  " << std::string(8, ' ');
    for (std::size_t r = 0; r < report.repetitions; ++r) os << "  rep" << (r + 1) << std::string(r + 1 < 10 ? 3 : 2, ' ');
    os << "  mean\n";
    for (const auto& [name, config] : rows) {
      const hdf::ConfigResult* res = report.find(config);
      if (!res) continue;
      char label[16];
      std::snprintf(label, sizeof(label), "  %-8s", name.c_str());
      os << label;
      for (double a : res->accuracy) {
        char cell[16];
        std::snprintf(cell, sizeof(cell), "  %6s", percent(a).c_str());
        os << cell;
      }
      char cell[16];
      std::snprintf(cell, sizeof(cell), "  %6s", percent(res->mean_accuracy).c_str());
      os << cell << "\n";
    }
  };
  os << "dataset " << report.dataset << ", protocol " << report.protocol << ", seed " << report.seed << ", "
     << report.repetitions << " repetition(s); classification accuracy (%)\n\n";
  table("Feature types", hdf::feature_type_rows());
  os << "\n";
  table("Aggregators", hdf::aggregator_rows());
  return os.str();
}

int cmd_experiment(Flags& flags, const std::optional<std::string>& cache_dir_flag) {
  CliConfig c = resolve(flags);
  require_dir(c.dataset_root, "dataset root");
  require_file(c.object_weights, "object weights");
  require_file(c.scene_weights, "scene weights");
  if (c.folds < 2) throw hdf::ConfigError("--folds must be at least 2");
  hdf::SplitProtocol protocol;
  if (c.protocol == "custom") {
    protocol = {"custom", c.test_per_class ? hdf::SplitKind::fixed_per_class : hdf::SplitKind::repeated_random,
                c.train_per_class, c.test_per_class, c.repetitions, c.seed};
  } else {
    protocol = hdf::SplitProtocol::named(c.protocol, c.seed);
  }
  protocol.validate();
  if (!c.split_file.empty()) require_file(c.split_file, "split file");

  const hdf::Backend object = load_backend(c.object_weights, hdf::BackendKind::object);
  const hdf::Backend scene = load_backend(c.scene_weights, hdf::BackendKind::scene);
  const hdf::DatasetManifest manifest = hdf::scan_dataset(c.dataset_root);
  if (manifest.skipped_files) std::fprintf(stderr, "warning: skipped %zu non-image files\n", manifest.skipped_files);
  hdf::SplitPlan plan;
  if (!c.split_file.empty()) {
    json doc;
    try {
      std::ifstream(c.split_file) >> doc;
    } catch (const json::exception& e) {
      throw hdf::DataError("split file is not valid JSON: " + std::string(e.what()));
    }
    plan = hdf::split_from_json(manifest, doc);
  } else {
    plan = hdf::make_split(manifest, protocol);
  }

  ensure_out_dir(c.output_dir);
  const fs::path cache_dir = cache_dir_flag ? fs::path(*cache_dir_flag) : fs::path(c.output_dir) / "cache";
  ensure_out_dir(cache_dir.string());
  const std::uint64_t digest =
      fnv1a(hdf::encode_weights(scene.weights()), fnv1a(hdf::encode_weights(object.weights())));
  const fs::path cache_path = cache_dir / ("components-" + hex64(digest) + ".hdfc");

  hdf::FeatureCache components;
  bool cached = false;
  if (fs::is_regular_file(cache_path)) {
    try {
      components = hdf::load_cache(cache_path.string(), hdf::kComponentDim);
      hdf::check_cache_matches(manifest, components);
      cached = true;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: ignoring stale cache %s: %s\n", cache_path.string().c_str(), e.what());
    }
  }
  if (!cached) {
    std::fprintf(stderr, "extracting features for %zu images\n", manifest.image_count());
    components = hdf::compute_components(manifest, object, scene, c.threads);
    hdf::save_cache(components, cache_path.string());
  }
  hdf::io::write_file((fs::path(c.output_dir) / "split.json").string(), hdf::split_to_json(manifest, plan).dump(2) + "\n");

  const std::string report_path = (fs::path(c.output_dir) / "report.json").string();
  hdf::ExperimentOptions options;
  options.protocol_name = c.split_file.empty() ? protocol.name : protocol.name + "+split-file";
  options.grid.folds = c.folds;
  options.grid.threads = c.threads;
  options.on_progress = [&](const hdf::ExperimentReport& partial) {
    hdf::io::write_file(report_path, hdf::to_json(partial).dump(2) + "\n");
    std::fprintf(stderr, "finished %s (%zu/%zu)\n", partial.results.back().config.label().c_str(),
                 partial.results.size(), options.configs.size());
  };
  const hdf::ExperimentReport report = hdf::run_experiment(manifest, components, plan, options);
  hdf::io::write_file(report_path, hdf::to_json(report).dump(2) + "\n");
  const std::string tables = render_tables(report);
  hdf::io::write_file((fs::path(c.output_dir) / "report.txt").string(), tables);
  std::printf("%s", tables.c_str());
  return kOk;
}

// --- validate-weights / bench / make-weights / make-synthetic ------------------------

int cmd_validate_weights(Flags& flags, const std::vector<std::string>& files) {
  CliConfig c = resolve(flags);
  std::vector<std::string> paths = files;
  if (!c.object_weights.empty()) paths.push_back(c.object_weights);
  if (!c.scene_weights.empty()) paths.push_back(c.scene_weights);
  if (paths.empty()) throw hdf::ConfigError("no weight files given");
  for (const auto& p : paths) require_file(p, "weight file");
  for (const auto& p : paths) {
    const hdf::WeightBundle bundle = hdf::load_weights(p);
    const hdf::NetworkSpec spec = hdf::infer_network(bundle);
    const char* arch = spec == hdf::NetworkSpec::vgg16_pool5() ? "vgg16-pool5" : "compact-pool5";
    std::printf("%s: ok, %s, %zu conv entries, means (%g, %g, %g)\n", p.c_str(), arch, bundle.layers.size(),
                bundle.means[0], bundle.means[1], bundle.means[2]);
  }
  return kOk;
}

int cmd_bench(std::size_t channels, std::size_t size, int repeats) {
  if (channels == 0 || size == 0 || repeats < 1) throw hdf::ConfigError("bench sizes must be positive");
  const hdf::ConvBenchmark b = hdf::benchmark_conv(channels, size, channels, 1, repeats);
  const json out = {{"layer", std::to_string(channels) + "x" + std::to_string(size) + "x" + std::to_string(size) +
                                  " -> " + std::to_string(channels)},
                    {"naive_seconds", b.naive_seconds},
                    {"fast_seconds", b.fast_seconds},
                    {"speedup", b.speedup},
                    {"max_relative_error", b.max_relative_error}};
  std::printf("%s\n", out.dump(2).c_str());
  return kOk;
}

int cmd_make_weights(const std::string& arch, std::uint64_t seed, const std::vector<float>& means,
                     const std::string& out) {
  if (out.empty()) throw hdf::ConfigError("--out is required");
  if (means.size() != 3) throw hdf::ConfigError("--means takes three values");
  hdf::NetworkSpec spec;
  if (arch == "compact") spec = hdf::NetworkSpec::compact_pool5();
  else if (arch == "vgg16") spec = hdf::NetworkSpec::vgg16_pool5();
  else throw hdf::ConfigError("--arch must be compact or vgg16");
  const hdf::WeightBundle bundle = hdf::random_weights(spec, seed, {means[0], means[1], means[2]});
  hdf::validate_weights(spec, bundle);
  const fs::path parent = fs::path(out).parent_path();
  if (!parent.empty()) ensure_out_dir(parent.string());
  hdf::save_weights(bundle, out);
  std::printf("wrote %s weights (%zu conv entries) to %s\n", arch.c_str(), bundle.layers.size(), out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid deep features: slicing, CNN feature extraction, fusion and linear classification"};
  app.require_subcommand(1);
  Flags flags;

  std::string image_path;
  auto* slice = app.add_subcommand("slice", "Write the 20 slices (PPM) and masks (PGM) of one image");
  slice->add_option("image", image_path, "Input PPM/PGM image")->required();
  add_shared_flags(slice, flags);

  std::optional<std::string> cache_path;
  auto* extract = app.add_subcommand("extract", "Extract features for every dataset image into an HDFC cache");
  add_shared_flags(extract, flags);
  extract->add_option("--dataset", flags.dataset, "Dataset root (one directory per class)");
  extract->add_option("--cache", cache_path, "Output cache path (default <out>/features.hdfc)");

  std::string features_path, model_path;
  std::optional<int> fixed_c;
  auto* train = app.add_subcommand("train", "Train a one-vs-rest model from an HDFC cache");
  add_shared_flags(train, flags);
  train->add_option("--features", features_path, "HDFC feature cache")->required();
  train->add_option("--c", fixed_c, "Use this C instead of grid search");
  train->add_option("--folds", flags.folds, "Cross-validation folds for grid search");

  auto* eval = app.add_subcommand("eval", "Score a model on an HDFC cache");
  add_shared_flags(eval, flags);
  eval->add_option("--model", model_path, "HDFM model file")->required();
  eval->add_option("--features", features_path, "HDFC feature cache")->required();

  std::optional<std::string> cache_dir;
  auto* experiment = app.add_subcommand("experiment", "Run split protocol, grid search and evaluation per feature");
  add_shared_flags(experiment, flags);
  experiment->add_option("--dataset", flags.dataset, "Dataset root (one directory per class)");
  experiment->add_option("--protocol", flags.protocol, "mit67|scene15|event8|custom");
  experiment->add_option("--train-per-class", flags.train_per_class, "custom protocol: training images per class");
  experiment->add_option("--test-per-class", flags.test_per_class, "custom protocol: test images per class");
  experiment->add_option("--repetitions", flags.repetitions, "custom protocol: number of splits");
  experiment->add_option("--split-file", flags.split_file, "Explicit split JSON (overrides the protocol draw)");
  experiment->add_option("--folds", flags.folds, "Cross-validation folds for grid search");
  experiment->add_option("--cache-dir", cache_dir, "Component cache directory (default <out>/cache)");

  std::vector<std::string> weight_files;
  auto* validate = app.add_subcommand("validate-weights", "Check HDFW files against the known trunks");
  add_shared_flags(validate, flags);
  validate->add_option("files", weight_files, "Weight files");

  std::size_t bench_channels = 64, bench_size = 224;
  int bench_repeats = 3;
  auto* bench = app.add_subcommand("bench", "Time the optimized convolution against the naive loop");
  bench->add_option("--channels", bench_channels, "Input and output channels");
  bench->add_option("--size", bench_size, "Spatial extent");
  bench->add_option("--repeats", bench_repeats, "Timed runs of the optimized path (best is kept)");

  std::string arch = "compact", weights_out;
  std::uint64_t weights_seed = 1;
  std::vector<float> means{0.0f, 0.0f, 0.0f};
  auto* make_weights = app.add_subcommand("make-weights", "Write a randomly initialised weight bundle");
  make_weights->add_option("--arch", arch, "compact|vgg16");
  make_weights->add_option("--seed", weights_seed, "Initialisation seed");
  make_weights->add_option("--means", means, "Three channel means in [0, 255]")->expected(3);
  make_weights->add_option("--out", weights_out, "Output HDFW path")->required();

  std::string synth_out;
  std::size_t synth_classes = 3, synth_per_class = 30, synth_size = 64;
  std::uint64_t synth_seed = 7;
  auto* make_synth = app.add_subcommand("make-synthetic", "Write a small synthetic PPM dataset");
  make_synth->add_option("--out", synth_out, "Dataset root to create")->required();
  make_synth->add_option("--classes", synth_classes, "Number of classes");
  make_synth->add_option("--per-class", synth_per_class, "Images per class");
  make_synth->add_option("--size", synth_size, "Image side length");
  make_synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*slice) return cmd_slice(image_path, flags);
    if (*extract) return cmd_extract(flags, cache_path);
    if (*train) return cmd_train(flags, features_path, fixed_c);
    if (*eval) return cmd_eval(flags, model_path, features_path);
    if (*experiment) return cmd_experiment(flags, cache_dir);
    if (*validate) return cmd_validate_weights(flags, weight_files);
    if (*bench) return cmd_bench(bench_channels, bench_size, bench_repeats);
    if (*make_weights) return cmd_make_weights(arch, weights_seed, means, weights_out);
    if (*make_synth) {
      if (synth_classes < 2 || synth_per_class < 1 || synth_size < 1) throw hdf::ConfigError("invalid synthetic sizes");
      hdf::write_synthetic_dataset(synth_out, synth_classes, synth_per_class, synth_size, synth_seed);
      std::printf("wrote %zu x %zu images to %s\n", synth_classes, synth_per_class, synth_out.c_str());
      return kOk;
    }
  } catch (const hdf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const hdf::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const hdf::FormatError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const hdf::ShapeError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternalError;
  }
  return kInternalError;
}
