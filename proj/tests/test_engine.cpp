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

#include <filesystem>

#include "hdf/engine.hpp"
#include "hdf/weights.hpp"
#include "oracles.hpp"

namespace hdf {
namespace {

TEST(NetworkSpecTest, CanonicalTrunkLayout) {
  const NetworkSpec spec = NetworkSpec::vgg16_pool5();
  EXPECT_EQ(spec.conv_count(), 13u);
  EXPECT_EQ(spec.pool_count(), 5u);
  EXPECT_EQ(spec.input_channels(), 3u);
  EXPECT_EQ(spec.output_channels(), 512u);
  const std::vector<std::size_t> widths = {64, 64, 128, 128, 256, 256, 256, 512, 512, 512, 512, 512, 512};
  std::size_t i = 0;
  const auto& layers = spec.layers();
  for (std::size_t j = 0; j < layers.size(); ++j) {
    if (layers[j].kind != LayerKind::conv3x3) continue;
    EXPECT_EQ(layers[j].out_channels, widths[i++]);
    ASSERT_LT(j + 1, layers.size());
    EXPECT_EQ(layers[j + 1].kind, LayerKind::relu);
  }
}

TEST(NetworkSpecTest, RejectsChannelChainBreak) {
  EXPECT_THROW(NetworkSpec({LayerSpec::conv(3, 8), LayerSpec::conv(4, 8)}), ShapeError);
  EXPECT_THROW(NetworkSpec({LayerSpec::pool()}), ShapeError);
  EXPECT_THROW(NetworkSpec({LayerSpec::conv(3, 0)}), ShapeError);
}

TEST(WeightsTest, ValidateAgainstSpec) {
  const NetworkSpec spec = NetworkSpec::compact_pool5();
  WeightBundle w = random_weights(spec, 1, {120.0f, 110.0f, 100.0f});
  EXPECT_NO_THROW(validate_weights(spec, w));
  WeightBundle missing = w;
  missing.layers.pop_back();
  EXPECT_THROW(validate_weights(spec, missing), ShapeError);
  WeightBundle bad_mean = w;
  bad_mean.means[1] = 300.0f;
  EXPECT_THROW(validate_weights(spec, bad_mean), ShapeError);
  WeightBundle bad_shape = w;
  bad_shape.layers[0].kernel = Tensor({16, 4, 3, 3});
  EXPECT_THROW(validate_weights(spec, bad_shape), ShapeError);
}

TEST(WeightsTest, RoundTripIsBitIdentical) {
  const WeightBundle w = random_weights(NetworkSpec::compact_pool5(), 42, {123.68f, 116.779f, 103.939f});
  const std::string bytes = encode_weights(w);
  const WeightBundle back = decode_weights(bytes);
  EXPECT_EQ(back, w);
  EXPECT_EQ(encode_weights(back), bytes);

  const auto path = std::filesystem::temp_directory_path() / "hdf_weights_roundtrip.hdfw";
  save_weights(w, path.string());
  EXPECT_EQ(load_weights(path.string()), w);
  std::filesystem::remove(path);
}

TEST(WeightsTest, LayoutMatchesDocumentedFormat) {
  WeightBundle w;
  w.means = {1.0f, 2.0f, 3.0f};
  w.layers.push_back({"ab", Tensor({1, 1, 3, 3}, 0.5f), Tensor({1}, -1.0f)});
  const std::string bytes = encode_weights(w);
  // magic + version + 3 means + count + (len + name + 4 dims + 9 floats + dim + 1 float)
  EXPECT_EQ(bytes.size(), 4u + 4 + 12 + 4 + (4 + 2 + 16 + 36 + 4 + 4));
  EXPECT_EQ(bytes.substr(0, 4), "HDFW");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes.substr(28, 2), "ab");
}

FormatErrc decode_error(const std::string& bytes) {
  try {
    decode_weights(bytes);
  } catch (const FormatError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return FormatErrc::io;
}

TEST(WeightsTest, DistinctErrors) {
  const WeightBundle w = random_weights(NetworkSpec::compact_pool5(), 3);
  const std::string good = encode_weights(w);

  std::string magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), FormatErrc::bad_magic);

  std::string version = good;
  version[4] = 2;
  EXPECT_EQ(decode_error(version), FormatErrc::unsupported_version);

  EXPECT_EQ(decode_error(good.substr(0, good.size() - 7)), FormatErrc::truncated);
  EXPECT_EQ(decode_error(good + "x"), FormatErrc::trailing_data);

  // Bias length disagreeing with the kernel's output channels.
  WeightBundle broken = w;
  broken.layers[0].bias = Tensor({15});
  EXPECT_EQ(decode_error(encode_weights(broken)), FormatErrc::shape_mismatch);
}

TEST(WeightsTest, HeaderCountBeyondEntriesIsTruncatedBundle) {
  // 13 declared entries but only 12 written; tiny channels keep the file small.
  WeightBundle w;
  for (int i = 0; i < 12; ++i) w.layers.push_back({"conv" + std::to_string(i), Tensor({1, 1, 3, 3}), Tensor({1})});
  std::string bytes = encode_weights(w);
  bytes[20] = 13;  // entry count field
  try {
    decode_weights(bytes);
    FAIL() << "expected truncated bundle";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.code(), FormatErrc::truncated);
    EXPECT_NE(std::string(e.what()).find("truncated bundle"), std::string::npos);
  }
}

TEST(EngineTest, ZeroWeightsGiveZeroPool5) {
  const NetworkSpec spec = NetworkSpec::vgg16_pool5();
  WeightBundle w = random_weights(spec, 0);
  for (auto& layer : w.layers) {
    for (float& v : layer.kernel.values()) v = 0.0f;
  }
  const Tensor out = forward_to_pool5(spec, w, Tensor({3, 224, 224}));
  ASSERT_EQ(out.shape(), (Shape{512, 7, 7}));
  for (float v : out.values()) ASSERT_EQ(v, 0.0f);
}

TEST(EngineTest, CanonicalTrunkGives512x7x7) {
  const NetworkSpec spec = NetworkSpec::vgg16_pool5();
  const WeightBundle w = random_weights(spec, 9);
  SplitMix64 rng(10);
  const Tensor image = testing::random_tensor({3, 224, 224}, rng, 50.0);
  const Tensor out = forward_to_pool5(spec, w, image);
  EXPECT_EQ(out.shape(), (Shape{512, 7, 7}));
  EXPECT_TRUE(out.all_finite());
}

TEST(EngineTest, SmallSpecMatchesComposedOracles) {
  const NetworkSpec spec({LayerSpec::conv(3, 4), LayerSpec::rectifier(), LayerSpec::conv(4, 2), LayerSpec::rectifier(),
                          LayerSpec::pool()});
  const WeightBundle w = random_weights(spec, 5);
  SplitMix64 rng(6);
  const Tensor image = testing::random_tensor({3, 8, 8}, rng);
  Tensor expected = testing::relu_oracle(testing::conv_oracle(image, w.layers[0].kernel, w.layers[0].bias));
  expected = testing::relu_oracle(testing::conv_oracle(expected, w.layers[1].kernel, w.layers[1].bias));
  expected = testing::maxpool_oracle(expected);
  const Tensor got = forward(spec, w, image);
  ASSERT_EQ(got.shape(), (Shape{2, 4, 4}));
  EXPECT_LE(testing::max_relative_error(got, expected), 1e-5);
}

TEST(EngineTest, RejectsBadInputs) {
  const NetworkSpec spec = NetworkSpec::compact_pool5();
  const WeightBundle w = random_weights(spec, 1);
  EXPECT_THROW(forward_to_pool5(spec, w, Tensor({3, 112, 112})), ShapeError);
  EXPECT_THROW(forward_to_pool5(spec, w, Tensor({1, 224, 224})), ShapeError);
  EXPECT_THROW(forward_to_pool5(NetworkSpec::vgg16_pool5(), w, Tensor({3, 224, 224})), ShapeError);
}

TEST(EngineTest, DeterministicAcrossRunsAndThreads) {
  const NetworkSpec spec = NetworkSpec::compact_pool5();
  const WeightBundle w = random_weights(spec, 2);
  SplitMix64 rng(3);
  const Tensor image = testing::random_tensor({3, 224, 224}, rng, 60.0);
  const Tensor a = forward_to_pool5(spec, w, image, 1);
  EXPECT_EQ(forward_to_pool5(spec, w, image, 1), a);
  EXPECT_EQ(forward_to_pool5(spec, w, image, 4), a);
}

TEST(EngineTest, InfersKnownTrunks) {
  EXPECT_EQ(infer_network(random_weights(NetworkSpec::compact_pool5(), 1)), NetworkSpec::compact_pool5());
  WeightBundle odd;
  odd.layers.push_back({"x", Tensor({2, 3, 3, 3}), Tensor({2})});
  EXPECT_THROW(infer_network(odd), ShapeError);
}

}  // namespace
}  // namespace hdf
