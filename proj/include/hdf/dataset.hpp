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
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdf/error.hpp"
#include "hdf/random.hpp"

namespace hdf {

struct ClassEntry {
  std::string name;
  std::vector<std::string> paths;  // relative to the dataset root, lexicographic

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

/// Directory-per-class image listing. Class ids are positions in `classes`.
struct DatasetManifest {
  std::string name;
  std::filesystem::path root;
  std::vector<ClassEntry> classes;
  std::size_t skipped_files = 0;

  std::size_t image_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.paths.size();
    return n;
  }

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// A flat (class, image) enumeration of a manifest: global index i refers to
/// images()[i]. Order is class by class, then by path.
struct ImageRef {
  std::size_t label;
  std::size_t index_in_class;
  std::string path;  // relative
};

inline std::vector<ImageRef> flatten(const DatasetManifest& manifest) {
  std::vector<ImageRef> out;
  for (std::size_t k = 0; k < manifest.classes.size(); ++k) {
    for (std::size_t i = 0; i < manifest.classes[k].paths.size(); ++i) {
      out.push_back({k, i, manifest.classes[k].paths[i]});
    }
  }
  return out;
}

namespace detail {

inline bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

inline bool has_pnm_magic(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  return in && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6');
}

}  // namespace detail

/// Scans root/<class>/<image>. Only binary PGM/PPM files are ingested; other
/// files are skipped and counted.
inline DatasetManifest scan_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("dataset root '" + root.string() + "' is not a directory");
  DatasetManifest manifest;
  manifest.root = root;
  manifest.name = root.filename().empty() ? root.parent_path().filename().string() : root.filename().string();

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  for (const auto& dir : class_dirs) {
    ClassEntry cls;
    cls.name = dir.filename().string();
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (detail::has_image_extension(entry.path()) && detail::has_pnm_magic(entry.path())) {
        files.push_back((fs::path(cls.name) / entry.path().filename()).generic_string());
      } else {
        ++manifest.skipped_files;
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("class '" + cls.name + "' contains no readable PGM/PPM images");
    cls.paths = std::move(files);
    manifest.classes.push_back(std::move(cls));
  }
  if (manifest.classes.size() < 2) {
    throw DataError("dataset root '" + root.string() + "' needs at least 2 class directories, found " +
                    std::to_string(manifest.classes.size()));
  }
  return manifest;
}

// --- Split protocols -----------------------------------------------------------

enum class SplitKind { fixed_per_class, repeated_random };

struct SplitProtocol {
  std::string name = "custom";
  SplitKind kind = SplitKind::repeated_random;
  std::size_t train_per_class = 1;
  std::optional<std::size_t> test_per_class;  // nullopt: every remaining image
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;

  /// 80 train / 20 test per class, a single seeded split.
  static SplitProtocol mit67(std::uint64_t seed = 0) {
    return {"mit67", SplitKind::fixed_per_class, 80, 20, 1, seed};
  }
  /// 100 train per class, the rest for test, 10 repetitions.
  static SplitProtocol scene15(std::uint64_t seed = 0) {
    return {"scene15", SplitKind::repeated_random, 100, std::nullopt, 10, seed};
  }
  /// 70 train / 60 test per class, 10 repetitions.
  static SplitProtocol event8(std::uint64_t seed = 0) {
    return {"event8", SplitKind::repeated_random, 70, 60, 10, seed};
  }

  static SplitProtocol named(const std::string& name, std::uint64_t seed) {
    if (name == "mit67") return mit67(seed);
    if (name == "scene15") return scene15(seed);
    if (name == "event8") return event8(seed);
    throw ConfigError("unknown split protocol '" + name + "' (expected mit67|scene15|event8|custom)");
  }

  void validate() const {
    if (train_per_class < 1) throw ConfigError("split protocol needs train_per_class >= 1");
    if (repetitions < 1) throw ConfigError("split protocol needs repetitions >= 1");
    if (kind == SplitKind::fixed_per_class && !test_per_class) {
      throw ConfigError("fixed_per_class protocol needs an explicit test_per_class");
    }
    if (test_per_class && *test_per_class < 1) throw ConfigError("test_per_class must be positive");
  }
};

/// Per-class local image indices for one train/test draw.
struct SplitRepetition {
  std::vector<std::vector<std::size_t>> train;
  std::vector<std::vector<std::size_t>> test;

  friend bool operator==(const SplitRepetition&, const SplitRepetition&) = default;
};

struct SplitPlan {
  std::vector<SplitRepetition> repetitions;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

/// Shuffle stream for (seed, repetition, class). Each repetition has its own
/// counter-derived seed, so adding repetitions never changes earlier ones.
inline SplitMix64 split_stream(std::uint64_t seed, std::size_t repetition, std::size_t class_index) {
  return SplitMix64(mix_seed(seed, repetition + 1, class_index + 1));
}

inline SplitPlan make_split(const DatasetManifest& manifest, const SplitProtocol& protocol) {
  protocol.validate();
  for (const auto& cls : manifest.classes) {
    const std::size_t need = protocol.train_per_class + protocol.test_per_class.value_or(1);
    if (cls.paths.size() < need) {
      throw DataError("class '" + cls.name + "' has " + std::to_string(cls.paths.size()) + " images, protocol " +
                      protocol.name + " needs " + std::to_string(need));
    }
  }
  SplitPlan plan;
  plan.seed = protocol.seed;
  for (std::size_t r = 0; r < protocol.repetitions; ++r) {
    SplitRepetition rep;
    for (std::size_t k = 0; k < manifest.classes.size(); ++k) {
      const std::size_t n = manifest.classes[k].paths.size();
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      SplitMix64 rng = split_stream(protocol.seed, r, k);
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      const std::size_t n_train = protocol.train_per_class;
      const std::size_t n_test = protocol.test_per_class.value_or(n - n_train);
      std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
      std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                    order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
      std::sort(train.begin(), train.end());
      std::sort(test.begin(), test.end());
      rep.train.push_back(std::move(train));
      rep.test.push_back(std::move(test));
    }
    plan.repetitions.push_back(std::move(rep));
  }
  return plan;
}

// --- Split files ----------------------------------------------------------------

/// {dataset, seed, repetitions: [{train: {class: [paths]}, test: {...}}]}
inline nlohmann::json split_to_json(const DatasetManifest& manifest, const SplitPlan& plan) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : plan.repetitions) {
    nlohmann::json train = nlohmann::json::object(), test = nlohmann::json::object();
    for (std::size_t k = 0; k < manifest.classes.size(); ++k) {
      const auto& cls = manifest.classes[k];
      nlohmann::json tr = nlohmann::json::array(), te = nlohmann::json::array();
      for (std::size_t i : rep.train[k]) tr.push_back(cls.paths[i]);
      for (std::size_t i : rep.test[k]) te.push_back(cls.paths[i]);
      train[cls.name] = std::move(tr);
      test[cls.name] = std::move(te);
    }
    reps.push_back({{"train", std::move(train)}, {"test", std::move(test)}});
  }
  return {{"dataset", manifest.name}, {"seed", plan.seed}, {"repetitions", std::move(reps)}};
}

/// Resolves a split file against a manifest. Every listed path must exist in
/// its class; train and test must be disjoint.
inline SplitPlan split_from_json(const DatasetManifest& manifest, const nlohmann::json& doc) {
  try {
    SplitPlan plan;
    plan.seed = doc.value("seed", std::uint64_t{0});
    const auto& reps = doc.at("repetitions");
    if (!reps.is_array() || reps.empty()) throw DataError("split file has no repetitions");
    for (const auto& rep_doc : reps) {
      SplitRepetition rep;
      for (const auto& cls : manifest.classes) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < cls.paths.size(); ++i) index[cls.paths[i]] = i;
        auto resolve = [&](const char* part) {
          std::vector<std::size_t> out;
          const auto& section = rep_doc.at(part);
          if (!section.contains(cls.name)) return out;
          for (const auto& p : section.at(cls.name)) {
            const auto it = index.find(p.get<std::string>());
            if (it == index.end()) {
              throw DataError("split file lists unknown image '" + p.get<std::string>() + "' for class " + cls.name);
            }
            out.push_back(it->second);
          }
          std::sort(out.begin(), out.end());
          return out;
        };
        auto train = resolve("train");
        auto test = resolve("test");
        std::vector<std::size_t> both;
        std::set_intersection(train.begin(), train.end(), test.begin(), test.end(), std::back_inserter(both));
        if (!both.empty()) throw DataError("split file puts an image of class " + cls.name + " in train and test");
        if (train.empty() || test.empty()) throw DataError("split file leaves class " + cls.name + " without train or test images");
        rep.train.push_back(std::move(train));
        rep.test.push_back(std::move(test));
      }
      plan.repetitions.push_back(std::move(rep));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed split file: ") + e.what());
  }
}

}  // namespace hdf
