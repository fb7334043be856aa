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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdf/binary_io.hpp"
#include "hdf/feature_cache.hpp"
#include "hdf/model_io.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path& work_dir() {
  static const fs::path dir = fs::temp_directory_path() / "hdf_cli_tests";
  return dir;
}

// Runs the CLI with `args`, capturing combined output into `log`.
int run_cli(const std::string& args, std::string* log = nullptr) {
  const fs::path log_file = work_dir() / "last_run.log";
  const std::string cmd = std::string("\"") + HDF_CLI_PATH + "\" " + args + " > \"" + log_file.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (log) {
    std::ifstream in(log_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *log = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(work_dir());
    fs::create_directories(work_dir());
    ASSERT_EQ(run_cli("make-synthetic --out " + q(dataset()) + " --classes 3 --per-class 4 --size 32 --seed 3"), 0);
    ASSERT_EQ(run_cli("make-weights --arch compact --seed 1 --means 120 110 100 --out " + q(object_weights())), 0);
    ASSERT_EQ(run_cli("make-weights --arch compact --seed 2 --means 100 100 100 --out " + q(scene_weights())), 0);
  }
  static void TearDownTestSuite() { fs::remove_all(work_dir()); }

  static fs::path dataset() { return work_dir() / "data"; }
  static fs::path object_weights() { return work_dir() / "object.hdfw"; }
  static fs::path scene_weights() { return work_dir() / "scene.hdfw"; }
  static std::string weight_flags() {
    return " --object-weights " + q(object_weights()) + " --scene-weights " + q(scene_weights());
  }
  static fs::path fresh(const std::string& name) {
    const fs::path p = work_dir() / name;
    fs::remove_all(p);
    return p;
  }
};

TEST_F(CliTest, UsageErrorsExitWithConfigCode) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("extract --bogus-flag 1"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST_F(CliTest, SliceWritesFortyFiles) {
  const fs::path out = fresh("slices");
  const fs::path image = dataset() / "class_0" / "img_000.ppm";
  std::string log;
  ASSERT_EQ(run_cli("slice " + q(image) + " --out " + q(out), &log), 0) << log;
  std::size_t ppm = 0, pgm = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    ppm += e.path().extension() == ".ppm";
    pgm += e.path().extension() == ".pgm";
  }
  EXPECT_EQ(ppm, 20u);
  EXPECT_EQ(pgm, 20u);
  EXPECT_TRUE(fs::exists(out / "circ_3.ppm"));
  EXPECT_TRUE(fs::exists(out / "rdiag_0.pgm"));
}

TEST_F(CliTest, SliceInputErrors) {
  EXPECT_EQ(run_cli("slice " + q(work_dir() / "missing.ppm") + " --out " + q(fresh("s2"))), 2);
  const fs::path junk = work_dir() / "junk.ppm";
  std::ofstream(junk) << "not an image";
  EXPECT_EQ(run_cli("slice " + q(junk) + " --out " + q(fresh("s3"))), 3);
}

TEST_F(CliTest, ExtractProducesExpectedCache) {
  const fs::path out = fresh("extract");
  std::string log;
  ASSERT_EQ(run_cli("extract --dataset " + q(dataset()) + weight_flags() + " --out " + q(out), &log), 0) << log;
  const hdf::FeatureCache cache = hdf::load_cache((out / "features.hdfc").string());
  EXPECT_EQ(cache.dim, 2048u);
  ASSERT_EQ(cache.records.size(), 12u);
  EXPECT_EQ(cache.records[4].label, 1u);
  EXPECT_EQ(cache.records[4].path, "class_1/img_000.ppm");

  // A second identical run gives identical bytes.
  const fs::path again = fresh("extract_again");
  ASSERT_EQ(run_cli("extract --dataset " + q(dataset()) + weight_flags() + " --out " + q(again)), 0);
  EXPECT_EQ(hdf::io::read_file((out / "features.hdfc").string()), hdf::io::read_file((again / "features.hdfc").string()));

  const fs::path ow = fresh("extract_ow");
  ASSERT_EQ(run_cli("extract --dataset " + q(dataset()) + weight_flags() + " --feature-type ow --cache " +
                    q(ow / "ow.hdfc")),
            0);
  EXPECT_EQ(hdf::load_cache((ow / "ow.hdfc").string()).dim, 512u);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  const fs::path out = fresh("config_run");
  const fs::path cfg = work_dir() / "config.json";
  std::ofstream(cfg) << nlohmann::json{{"dataset_root", dataset().string()},
                                       {"object_weights", object_weights().string()},
                                       {"scene_weights", scene_weights().string()},
                                       {"feature_type", "sw"},
                                       {"output_dir", out.string()}}
                            .dump();
  ASSERT_EQ(run_cli("extract --config " + q(cfg)), 0);
  EXPECT_EQ(hdf::load_cache((out / "features.hdfc").string()).dim, 512u);
  ASSERT_EQ(run_cli("extract --config " + q(cfg) + " --feature-type hdf --pool max --cache " + q(out / "max.hdfc")), 0);
  EXPECT_EQ(hdf::load_cache((out / "max.hdfc").string()).dim, 512u);
  ASSERT_EQ(run_cli("extract --config " + q(cfg) + " --feature-type hdf --cache " + q(out / "cat.hdfc")), 0);
  EXPECT_EQ(hdf::load_cache((out / "cat.hdfc").string()).dim, 2048u);
}

TEST_F(CliTest, InvalidConfigWritesNothing) {
  const fs::path out = fresh("never_created");
  const std::string base = "extract --dataset " + q(dataset()) + weight_flags() + " --out " + q(out);
  EXPECT_EQ(run_cli(base + " --pool median"), 2);
  EXPECT_EQ(run_cli(base + " --feature-type xyz"), 2);
  EXPECT_EQ(run_cli(base + " --threads 0"), 2);
  EXPECT_EQ(run_cli("extract --dataset " + q(work_dir() / "nowhere") + weight_flags() + " --out " + q(out)), 2);
  EXPECT_EQ(run_cli("experiment --dataset " + q(dataset()) + weight_flags() + " --out " + q(out) + " --folds 1"), 2);
  EXPECT_EQ(run_cli("experiment --dataset " + q(dataset()) + weight_flags() + " --out " + q(out) +
                    " --protocol caltech"),
            2);
  const fs::path bad_cfg = work_dir() / "bad.json";
  std::ofstream(bad_cfg) << "{ not json";
  EXPECT_EQ(run_cli("extract --config " + q(bad_cfg) + " --out " + q(out)), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, DataErrorsExitWithDataCode) {
  const fs::path broken = work_dir() / "broken.hdfw";
  std::ofstream(broken) << "HDFW garbage";
  const fs::path out = fresh("data_err");
  EXPECT_EQ(run_cli("extract --dataset " + q(dataset()) + " --object-weights " + q(broken) + " --scene-weights " +
                    q(scene_weights()) + " --out " + q(out)),
            3);
  EXPECT_EQ(run_cli("validate-weights " + q(broken)), 3);
  EXPECT_EQ(run_cli("validate-weights " + q(object_weights())), 0);
  // Too few images per class for the requested protocol.
  EXPECT_EQ(run_cli("experiment --dataset " + q(dataset()) + weight_flags() + " --protocol event8 --out " + q(out)), 3);
}

TEST_F(CliTest, TrainThenEvaluate) {
  const fs::path out = fresh("train");
  ASSERT_EQ(run_cli("extract --dataset " + q(dataset()) + weight_flags() + " --feature-type ow --out " + q(out)), 0);
  const fs::path features = out / "features.hdfc";
  std::string log;
  ASSERT_EQ(run_cli("train --features " + q(features) + " --folds 2 --out " + q(out), &log), 0) << log;
  const auto summary = nlohmann::json::parse(hdf::io::read_file((out / "train.json").string()));
  EXPECT_EQ(summary["grid_search"]["c_values"].size(), 100u);
  const hdf::LinearModel model = hdf::load_model((out / "model.hdfm").string());
  EXPECT_EQ(model.classes, 3u);
  EXPECT_EQ(model.dim, 512u);

  ASSERT_EQ(run_cli("eval --model " + q(out / "model.hdfm") + " --features " + q(features) + " --out " + q(out)), 0);
  const auto eval = nlohmann::json::parse(hdf::io::read_file((out / "eval.json").string()));
  EXPECT_EQ(eval["samples"], 12);
  EXPECT_DOUBLE_EQ(eval["accuracy"].get<double>(), summary["train_accuracy"].get<double>());

  // A 2048-dim cache against a 512-dim model is a data error.
  ASSERT_EQ(run_cli("extract --dataset " + q(dataset()) + weight_flags() + " --cache " + q(out / "cat.hdfc")), 0);
  EXPECT_EQ(run_cli("eval --model " + q(out / "model.hdfm") + " --features " + q(out / "cat.hdfc")), 3);
  EXPECT_EQ(run_cli("train --features " + q(features) + " --c 0 --out " + q(out)), 2);
}

TEST_F(CliTest, ExperimentWritesReportsAndReusesCache) {
  const fs::path out = fresh("experiment");
  const std::string base = "experiment --dataset " + q(dataset()) + weight_flags() +
                           " --train-per-class 2 --test-per-class 2 --repetitions 2 --folds 2 --seed 4";
  const std::string cmd = base + " --out " + q(out);
  std::string log;
  ASSERT_EQ(run_cli(cmd, &log), 0) << log;
  const std::string first = hdf::io::read_file((out / "report.json").string());
  const auto report = nlohmann::json::parse(first);
  EXPECT_TRUE(report["complete"].get<bool>());
  EXPECT_EQ(report["configurations"].size(), 8u);
  EXPECT_EQ(report["feature_types"].size(), 5u);
  EXPECT_EQ(report["aggregators"].size(), 4u);
  EXPECT_TRUE(fs::exists(out / "report.txt"));
  EXPECT_TRUE(fs::exists(out / "split.json"));

  ASSERT_EQ(run_cli(cmd, &log), 0) << log;
  EXPECT_EQ(log.find("extracting"), std::string::npos) << "component cache was not reused";
  EXPECT_EQ(hdf::io::read_file((out / "report.json").string()), first);

  // Replaying the written split gives the same accuracies.
  const fs::path replay = fresh("experiment_replay");
  ASSERT_EQ(run_cli(base + " --split-file " + q(out / "split.json") + " --cache-dir " + q(out / "cache") +
                        " --out " + q(replay)),
            0);
  const auto replayed = nlohmann::json::parse(hdf::io::read_file((replay / "report.json").string()));
  EXPECT_EQ(replayed["configurations"], report["configurations"]);
}

}  // namespace
