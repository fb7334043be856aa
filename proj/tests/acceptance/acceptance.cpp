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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "hdf/hdf.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kConvRelTol = 1e-5;
constexpr double kConvSuiteSeconds = 60.0;
constexpr double kMinSpeedup = 5.0;
constexpr double kPartitionSeconds = 5.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kBruteForceRelTol = 1e-3;
constexpr double kExperimentSeconds = 120.0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const fs::path& scratch() {
  static const fs::path dir = fs::temp_directory_path() / "hdf_acceptance";
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + HDF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

// 1 -------------------------------------------------------------------------------
Outcome conv_oracle_suite() {
  const auto t0 = Clock::now();
  hdf::SplitMix64 rng(20240501);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t cin = 1 + rng.below(6), cout = 1 + rng.below(6);
    const std::size_t h = 1 + rng.below(20), w = 1 + rng.below(20);
    const hdf::Tensor in = hdf::testing::random_tensor({cin, h, w}, rng, 3.0);
    const hdf::Tensor k = hdf::testing::random_tensor({cout, cin, 3, 3}, rng);
    const hdf::Tensor b = hdf::testing::random_tensor({cout}, rng);
    worst = std::max(worst, hdf::testing::max_relative_error(hdf::conv2d(in, k, b), hdf::testing::conv_oracle(in, k, b)));
  }
  const double secs = seconds_since(t0);
  return {worst <= kConvRelTol && secs < kConvSuiteSeconds,
          fmt("200 instances, max rel err %.2e (<= %.0e), %.2f s", worst, kConvRelTol, secs)};
}

// 2 -------------------------------------------------------------------------------
Outcome engine_speed() {
  const fs::path log = scratch() / "bench.json";
  if (run_cli("bench --channels 64 --size 224 --repeats 3", log) != 0) return {false, "bench command failed"};
  const auto doc = nlohmann::json::parse(hdf::io::read_file(log.string()));
  const double speedup = doc.at("speedup").get<double>();
  const double err = doc.at("max_relative_error").get<double>();
  return {speedup >= kMinSpeedup && err <= kConvRelTol,
          fmt("64x224x224 -> 64: speedup %.2fx (>= %.0fx), rel err vs naive %.2e", speedup, kMinSpeedup, err)};
}

// 3 -------------------------------------------------------------------------------
Outcome slicing_partitions() {
  const auto t0 = Clock::now();
  constexpr std::size_t N = hdf::kSliceGrid;
  bool ok = true;
  for (hdf::Technique t : hdf::kTechniques) {
    const auto masks = hdf::technique_slices(t);
    for (std::size_t r = 0; r < N; ++r) {
      for (std::size_t c = 0; c < N; ++c) {
        int hits = 0;
        for (const auto& m : masks) hits += m.contains(r, c);
        if (t == hdf::Technique::circ) {
          const double dy = r - 111.5, dx = c - 111.5;
          const int want = dy * dy + dx * dx < 112.0 * 112.0 ? 1 : 0;
          ok &= hits == want;
        } else {
          ok &= hits == 1;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {ok && secs < kPartitionSeconds,
          fmt("5 techniques x %.0f pixels enumerated, %.2f s (< %.0f s)", double(N * N), secs, kPartitionSeconds)};
}

// 4 -------------------------------------------------------------------------------
Outcome dimensional_contract() {
  const auto spec = hdf::NetworkSpec::compact_pool5();
  const hdf::Backend object(hdf::BackendKind::object, spec, hdf::random_weights(spec, 11, {120, 115, 100}));
  const hdf::Backend scene(hdf::BackendKind::scene, spec, hdf::random_weights(spec, 12, {105, 110, 115}));
  hdf::SplitMix64 rng(4);
  hdf::Raster img = hdf::make_raster(48, 64, 3);
  for (auto& v : img.pixels) v = static_cast<float>(rng.below(256));
  const auto parts = hdf::extract_components(object, scene, img);
  bool ok = hdf::all_masks().size() == 20;
  for (const auto& p : parts) ok &= p.values.size() == 512;
  std::string dims;
  for (hdf::PoolOp op : {hdf::PoolOp::max, hdf::PoolOp::mean, hdf::PoolOp::min, hdf::PoolOp::concat}) {
    const auto h = hdf::normalize(hdf::aggregate(op, parts));
    ok &= h.values.size() == (op == hdf::PoolOp::concat ? 2048u : 512u);
    dims += std::string(hdf::to_string(op)) + "=" + std::to_string(h.values.size()) + " ";
  }
  return {ok, "OP/OW/SP/SW=512, " + dims + "slices=" + std::to_string(hdf::all_masks().size())};
}

// 5 -------------------------------------------------------------------------------
Outcome classifier_correctness() {
  hdf::SplitMix64 rng(5);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng.below(12), d = 1 + rng.below(8);
    hdf::Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.normal();
    hdf::Vector y(static_cast<Eigen::Index>(n));
    std::vector<int> yi;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] = rng.below(2) ? 1.0 : -1.0;
      yi.push_back(static_cast<int>(y[i]));
    }
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) rows[i][j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double cost = 0.1 + 10.0 * rng.uniform();
    hdf::Vector w(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = rng.normal();
    const double b = rng.normal();
    hdf::Vector gw;
    double gb = 0.0;
    hdf::LogisticObjective(x, y, cost).gradient(w, b, gw, gb);
    auto f = [&](std::vector<double> ww, double bb) { return hdf::testing::logistic_objective(rows, yi, ww, bb, cost); };
    std::vector<double> base(w.data(), w.data() + w.size());
    const double h = 1e-5;
    for (std::size_t j = 0; j <= d; ++j) {
      std::vector<double> wp = base, wm = base;
      double bp = b, bm = b;
      if (j < d) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd = (f(wp, bp) - f(wm, bm)) / (2 * h);
      const double an = j < d ? gw[static_cast<Eigen::Index>(j)] : gb;
      worst_grad = std::max(worst_grad, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
    }
  }

  // Four separable blobs, 200 points in 16 dimensions.
  hdf::Matrix blobs(200, 16);
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    const int k = i % 4;
    labels.push_back(k);
    for (int j = 0; j < 16; ++j) blobs(i, j) = (j % 4 == k ? 4.0 : 0.0) + 0.5 * rng.normal();
  }
  const double blob_acc = hdf::evaluate(hdf::train_ovr(blobs, labels, 10.0), blobs, labels);

  const std::vector<std::vector<double>> pts{{0.0, 0.0}, {1.0, 0.5}, {0.2, 1.0}, {1.2, 1.1}};
  const std::vector<int> py{-1, 1, 1, -1};
  hdf::Matrix px(4, 2);
  for (int i = 0; i < 4; ++i) px.row(i) << pts[i][0], pts[i][1];
  const hdf::BinaryModel m = hdf::train_binary(px, py, 1.0, {1e-8, 1000});
  const double ours = hdf::testing::logistic_objective(pts, py, {m.weights[0], m.weights[1]}, m.bias, 1.0);
  const double brute = hdf::testing::brute_force_minimum(pts, py, 1.0);
  const double gap = std::abs(ours - brute) / brute;

  return {worst_grad <= kGradRelTol && blob_acc == 1.0 && gap <= kBruteForceRelTol,
          fmt("grad rel err %.1e (<= 1e-4), blob accuracy %.3f, brute-force gap %.1e (<= 1e-3)", worst_grad, blob_acc,
              gap)};
}

// 6 -------------------------------------------------------------------------------
hdf::DatasetManifest sized_manifest(std::size_t classes, std::size_t per_class) {
  hdf::DatasetManifest m;
  m.name = "sized";
  for (std::size_t k = 0; k < classes; ++k) {
    hdf::ClassEntry c;
    c.name = "class" + std::to_string(k);
    for (std::size_t i = 0; i < per_class + k; ++i) c.paths.push_back(c.name + "/" + std::to_string(i) + ".ppm");
    m.classes.push_back(std::move(c));
  }
  return m;
}

Outcome protocol_fidelity() {
  bool ok = true;
  auto check = [&](const hdf::DatasetManifest& m, const hdf::SplitProtocol& p, std::size_t reps, std::size_t train,
                   std::optional<std::size_t> test) {
    const hdf::SplitPlan plan = hdf::make_split(m, p);
    ok &= plan.repetitions.size() == reps;
    for (const auto& rep : plan.repetitions) {
      for (std::size_t k = 0; k < m.classes.size(); ++k) {
        const std::size_t n = m.classes[k].paths.size();
        ok &= rep.train[k].size() == train;
        ok &= rep.test[k].size() == test.value_or(n - train);
        std::set<std::size_t> all(rep.train[k].begin(), rep.train[k].end());
        all.insert(rep.test[k].begin(), rep.test[k].end());
        ok &= all.size() == rep.train[k].size() + rep.test[k].size();
      }
    }
  };
  check(sized_manifest(67, 100), hdf::SplitProtocol::mit67(1), 1, 80, 20);
  check(sized_manifest(15, 200), hdf::SplitProtocol::scene15(1), 10, 100, std::nullopt);
  check(sized_manifest(8, 130), hdf::SplitProtocol::event8(1), 10, 70, 60);
  return {ok, "mit67 80/20 x1, scene15 100/rest x10, event8 70/60 x10, train/test disjoint"};
}

// 7 -------------------------------------------------------------------------------
Outcome grid_search() {
  hdf::SplitMix64 rng(7);
  hdf::Matrix x(60, 6);
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const int k = i % 3;
    labels.push_back(k);
    for (int j = 0; j < 6; ++j) x(i, j) = (j % 3 == k ? 1.0 : 0.0) + 1.2 * rng.normal();
  }
  const hdf::GridSearchReport r = hdf::grid_search_c(x, labels, {});
  bool ok = r.c_values.size() == 100 && r.c_values.front() == 1 && r.c_values.back() == 100;
  for (std::size_t i = 0; i < r.c_values.size(); ++i) ok &= r.c_values[i] == static_cast<int>(i) + 1;
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.mean_accuracy.size(); ++i)
    if (r.mean_accuracy[i] > r.mean_accuracy[best]) best = i;
  ok &= r.best_c == r.c_values[best];

  // Leak check: record every row handed to tuning and compare with test rows.
  hdf::DatasetManifest m = sized_manifest(3, 12);
  hdf::FeatureCache comps;
  comps.dim = hdf::kComponentDim;
  for (const auto& img : hdf::flatten(m)) {
    hdf::FeatureRecord rec{static_cast<std::uint32_t>(img.label), img.path, std::vector<float>(hdf::kComponentDim)};
    for (std::size_t j = 0; j < rec.values.size(); ++j)
      rec.values[j] = static_cast<float>((j % 3 == img.label ? 1.0 : 0.0) + rng.normal());
    comps.records.push_back(std::move(rec));
  }
  const hdf::SplitPlan plan = hdf::make_split(m, {"custom", hdf::SplitKind::repeated_random, 6, 5, 2, 3});
  std::set<std::size_t> test_rows, train_rows, seen;
  std::vector<std::size_t> offset{0, m.classes[0].paths.size(), m.classes[0].paths.size() + m.classes[1].paths.size()};
  for (const auto& rep : plan.repetitions) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i : rep.test[k]) test_rows.insert(offset[k] + i);
      for (std::size_t i : rep.train[k]) train_rows.insert(offset[k] + i);
    }
  }
  hdf::ExperimentOptions opts;
  opts.configs = {{hdf::FeatureType::HDF, hdf::PoolOp::mean}};
  opts.grid.folds = 3;
  // One repetition at a time so a row that is train in one draw and test in
  // another is judged against its own draw.
  std::size_t leaks = 0;
  for (const auto& rep : plan.repetitions) {
    hdf::SplitPlan single{{rep}, plan.seed};
    std::set<std::size_t> rep_test;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t i : rep.test[k]) rep_test.insert(offset[k] + i);
    opts.on_tuning_row = [&](std::size_t row) {
      seen.insert(row);
      leaks += rep_test.count(row);
    };
    hdf::run_experiment(m, comps, single, opts);
  }
  ok &= leaks == 0 && seen == train_rows;
  return {ok, "C = " + std::to_string(r.c_values.front()) + ".." + std::to_string(r.c_values.back()) + ", best C " +
                  std::to_string(r.best_c) + " is the first maximum, test rows read during tuning: " +
                  std::to_string(leaks)};
}

// 8 and 9 -------------------------------------------------------------------------------
struct ExperimentRuns {
  bool ran = false;
  std::string first, second;
  double seconds[2] = {0.0, 0.0};
  std::string error;
};

ExperimentRuns run_experiments() {
  ExperimentRuns out;
  const fs::path data = scratch() / "synthetic", log = scratch() / "cli.log";
  const fs::path obj = scratch() / "object.hdfw", scn = scratch() / "scene.hdfw";
  if (run_cli("make-synthetic --out " + q(data) + " --classes 3 --per-class 30 --size 64 --seed 7", log) != 0 ||
      run_cli("make-weights --arch compact --seed 101 --means 123.68 116.78 103.94 --out " + q(obj), log) != 0 ||
      run_cli("make-weights --arch compact --seed 202 --means 105.49 113.0 116.06 --out " + q(scn), log) != 0) {
    out.error = "setup failed: " + hdf::io::read_file(log.string());
    return out;
  }
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = scratch() / ("run" + std::to_string(i));
    const auto t0 = Clock::now();
    const int rc = run_cli("experiment --dataset " + q(data) + " --object-weights " + q(obj) + " --scene-weights " +
                               q(scn) + " --train-per-class 20 --test-per-class 10 --repetitions 2 --seed 17 --out " +
                               q(dir),
                           log);
    out.seconds[i] = seconds_since(t0);
    if (rc != 0) {
      out.error = "experiment exited with " + std::to_string(rc) + ": " + hdf::io::read_file(log.string());
      return out;
    }
    (i == 0 ? out.first : out.second) = hdf::io::read_file((dir / "report.json").string());
  }
  out.ran = true;
  return out;
}

Outcome determinism(const ExperimentRuns& runs) {
  if (!runs.ran) return {false, runs.error};
  const bool same = runs.first == runs.second;
  const double worst = std::max(runs.seconds[0], runs.seconds[1]);
  return {same && worst < kExperimentSeconds,
          std::string(same ? "reports bit-identical" : "reports differ") +
              fmt(", runs took %.1f s and %.1f s (< %.0f s)", runs.seconds[0], runs.seconds[1], kExperimentSeconds)};
}

Outcome table_structure(const ExperimentRuns& runs) {
  if (!runs.ran) return {false, runs.error};
  const auto doc = nlohmann::json::parse(runs.first);
  const std::vector<std::string> types{"OP", "OW", "SP", "SW", "HDF"}, aggs{"Max", "Mean", "Min", "Concat"};
  const std::size_t reps = doc.at("repetitions").get<std::size_t>();
  auto check = [&](const nlohmann::json& table, const std::vector<std::string>& names) {
    if (table.size() != names.size()) return false;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& row = table[i];
      if (row.at("row") != names[i] || row.at("accuracy").size() != reps) return false;
      const auto acc = row.at("accuracy").get<std::vector<double>>();
      const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
      if (std::abs(mean - row.at("mean_accuracy").get<double>()) > 1e-12) return false;
    }
    return true;
  };
  const bool ok = check(doc.at("feature_types"), types) && check(doc.at("aggregators"), aggs);
  return {ok, "feature-type rows OP OW SP SW HDF, aggregator rows Max Mean Min Concat, " + std::to_string(reps) +
                  " repetitions + mean each"};
}

// 10 -------------------------------------------------------------------------------
template <typename Fn>
hdf::FormatErrc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const hdf::FormatError& e) {
    return e.code();
  }
  return hdf::FormatErrc::io;
}

Outcome format_round_trips() {
  const fs::path dir = scratch() / "formats";
  fs::create_directories(dir);
  bool ok = true;

  const auto spec = hdf::NetworkSpec::compact_pool5();
  const std::string w1 = (dir / "a.hdfw").string(), w2 = (dir / "b.hdfw").string();
  hdf::save_weights(hdf::random_weights(spec, 3, {1, 2, 3}), w1);
  hdf::save_weights(hdf::load_weights(w1), w2);
  ok &= hdf::io::read_file(w1) == hdf::io::read_file(w2);
  const std::string wbytes = hdf::io::read_file(w1);
  std::string wbad = wbytes;
  wbad[0] = 'X';
  ok &= error_code([&] { hdf::decode_weights(wbad); }) == hdf::FormatErrc::bad_magic;
  ok &= error_code([&] { hdf::decode_weights(wbytes.substr(0, wbytes.size() / 2)); }) == hdf::FormatErrc::truncated;

  hdf::FeatureCache cache;
  cache.dim = 4;
  cache.records = {{0, "a/1.ppm", {0.1f, -2.5f, 3e-8f, 7.0f}}, {2, "c/9.ppm", {1, 2, 3, 4}}};
  const std::string c1 = (dir / "a.hdfc").string(), c2 = (dir / "b.hdfc").string();
  hdf::save_cache(cache, c1);
  hdf::save_cache(hdf::load_cache(c1), c2);
  ok &= hdf::io::read_file(c1) == hdf::io::read_file(c2);
  const std::string cbytes = hdf::io::read_file(c1);
  std::string cbad = cbytes;
  cbad[1] = 'X';
  ok &= error_code([&] { hdf::decode_cache(cbad); }) == hdf::FormatErrc::bad_magic;
  ok &= error_code([&] { hdf::decode_cache(cbytes.substr(0, cbytes.size() - 3)); }) == hdf::FormatErrc::truncated;

  hdf::LinearModel model;
  model.classes = 2;
  model.dim = 3;
  model.best_c = 42;
  model.weights.resize(2, 3);
  model.weights << 0.1, -1.0 / 3.0, 2e-17, 5.0, 1e300, -0.0;
  model.bias.resize(2);
  model.bias << 0.7, -0.25;
  const std::string m1 = (dir / "a.hdfm").string(), m2 = (dir / "b.hdfm").string();
  hdf::save_model(model, m1);
  hdf::save_model(hdf::load_model(m1), m2);
  ok &= hdf::io::read_file(m1) == hdf::io::read_file(m2);
  const std::string mbytes = hdf::io::read_file(m1);
  ok &= error_code([&] { hdf::decode_model("MODEL" + mbytes.substr(4)); }) == hdf::FormatErrc::bad_magic;
  ok &= error_code([&] { hdf::decode_model(mbytes.substr(0, mbytes.find("class 1"))); }) == hdf::FormatErrc::truncated;

  return {ok, "HDFW, HDFC, HDFM save-load-save identical; bad magic and truncation give distinct errors"};
}

}  // namespace

int main() {
  fs::remove_all(scratch());
  fs::create_directories(scratch());

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  ExperimentRuns runs;
  bool runs_done = false;
  auto experiment_runs = [&]() -> const ExperimentRuns& {
    if (!runs_done) {
      runs = run_experiments();
      runs_done = true;
    }
    return runs;
  };
  const std::vector<Criterion> criteria = {
      {1, "convolution oracle suite", conv_oracle_suite},
      {2, "engine performance", engine_speed},
      {3, "slicing partitions", slicing_partitions},
      {4, "dimensional contract", dimensional_contract},
      {5, "classifier correctness", classifier_correctness},
      {6, "protocol fidelity", protocol_fidelity},
      {7, "grid search", grid_search},
      {8, "end-to-end determinism", [&] { return determinism(experiment_runs()); }},
      {9, "report table structure", [&] { return table_structure(experiment_runs()); }},
      {10, "format round-trips", format_round_trips},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  criterion %2d  %-26s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  fs::remove_all(scratch());
  return failures == 0 ? 0 : 1;
}
