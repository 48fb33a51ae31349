// Copyright 2026 The PMA-URL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pma/head.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gradcheck.h"
#include "pma/errors.h"
#include "pma/model.h"

namespace pma {
namespace {

using testing::MaxGradError;
using testing::Probe;
using testing::RandomLeaf;
using testing::TensorD;

template <typename T>
DualChannelOutput<T> FakeOutput(int layers, int64_t rows, int64_t c, Rng& rng) {
  DualChannelOutput<T> out;
  out.rows = rows;
  for (int l = 0; l < layers; ++l) {
    std::vector<T> a(static_cast<size_t>(rows * c));
    std::vector<T> b(static_cast<size_t>(rows * c));
    for (auto& v : a) v = static_cast<T>(rng.Normal());
    for (auto& v : b) v = static_cast<T>(rng.Normal());
    out.token.push_back(Tensor<T>::FromData({rows, c}, a));
    out.chars.push_back(Tensor<T>::FromData({rows, c}, b));
  }
  return out;
}

void Zero(Tensor<double> t) {
  for (double& v : t.mutable_data()) v = 0.0;
}

TEST(HeadConfig, PaperShapes) {
  HeadConfig config;
  EXPECT_EQ(config.layers_used, 12);
  EXPECT_EQ(config.reduction, 3);
  EXPECT_EQ(config.AttentionHidden(), 4);
  EXPECT_EQ(config.SppBinCount(), 7);
  Rng rng(1);
  auto params = HeadParams<float>::Init(config, 64, rng);
  EXPECT_EQ(params.attention_w0.shape(), (Shape{4, 12}));
  EXPECT_EQ(params.attention_w1.shape(), (Shape{12, 4}));
  EXPECT_EQ(params.merge_w.shape(), (Shape{1, 128, 64}));
  EXPECT_EQ(HeadConfig::FromJson(config.ToJson()).ToJson(), config.ToJson());
}

TEST(SelectLayers, LastKAndEven) {
  EXPECT_EQ(SelectLayers(12, 2, LayerSelection::kLastK), (std::vector<int>{10, 11}));
  EXPECT_EQ(SelectLayers(12, 12, LayerSelection::kLastK).size(), 12u);
  EXPECT_EQ(SelectLayers(12, 4, LayerSelection::kEvenlySpaced),
            (std::vector<int>{0, 4, 7, 11}));
  EXPECT_THROW(SelectLayers(12, 13, LayerSelection::kLastK), Error);
}

TEST(BuildStack, PaperShape) {
  HeadConfig config;
  Rng rng(2);
  auto params = HeadParams<float>::Init(config, 64, rng);
  std::vector<DualChannelOutput<float>> batch;
  for (int64_t rows : {5, 40, 200, 17}) batch.push_back(FakeOutput<float>(12, rows, 64, rng));
  auto stack = BuildStack<float>(batch, params, config);
  EXPECT_EQ(stack.shape(), (Shape{4, 12, 200, 64}));
}

TEST(BuildStack, PermutationOfLayerMajorStack) {
  HeadConfig config;
  config.layers_used = 3;
  config.seq_len = 6;
  Rng rng(3);
  auto params = HeadParams<double>::Init(config, 4, rng);
  std::vector<DualChannelOutput<double>> batch = {FakeOutput<double>(3, 6, 4, rng),
                                                  FakeOutput<double>(3, 4, 4, rng)};
  auto stack = BuildStack<double>(batch, params, config);
  // X[n][h] computed directly from the merge definition.
  for (int64_t n = 0; n < 3; ++n) {
    for (int64_t h = 0; h < 2; ++h) {
      const auto& out = batch[static_cast<size_t>(h)];
      std::vector<TensorD> parts = {out.token[static_cast<size_t>(n)],
                                    out.chars[static_cast<size_t>(n)]};
      auto x = Add(Conv1d(Concat<double>(parts, 1), params.merge_w, 1, ConvPadding{}),
                   params.merge_b);
      for (int64_t w = 0; w < 6; ++w)
        for (int64_t c = 0; c < 4; ++c) {
          double expected = w < out.rows ? x.at({w, c}) : 0.0;
          EXPECT_EQ(stack.at({h, n, w, c}), expected);
        }
    }
  }
}

TEST(BuildStack, IdentityMergeKeepsTokenChannel) {
  HeadConfig config;
  config.layers_used = 2;
  config.seq_len = 5;
  Rng rng(4);
  auto params = HeadParams<double>::Init(config, 3, rng);
  auto w = params.merge_w.mutable_data();
  std::fill(w.begin(), w.end(), 0.0);
  for (int64_t i = 0; i < 3; ++i) w[static_cast<size_t>(i * 3 + i)] = 1.0;
  std::vector<DualChannelOutput<double>> batch = {FakeOutput<double>(2, 5, 3, rng)};
  auto stack = BuildStack<double>(batch, params, config);
  for (int64_t n = 0; n < 2; ++n)
    for (int64_t p = 0; p < 5; ++p)
      for (int64_t c = 0; c < 3; ++c)
        EXPECT_EQ(stack.at({0, n, p, c}), batch[0].token[static_cast<size_t>(n)].at({p, c}));
}

TEST(LayerAttention, ZeroMlpGivesHalf) {
  HeadConfig config;
  Rng rng(5);
  auto params = HeadParams<double>::Init(config, 4, rng);
  Zero(params.attention_w0);
  Zero(params.attention_w1);
  auto stack = RandomLeaf({2, 12, 7, 4}, rng);
  auto result = LayerAttention(stack, params);
  for (double m : result.map.data()) EXPECT_EQ(m, 0.5);
  for (size_t i = 0; i < stack.size(); ++i) {
    EXPECT_EQ(result.weighted.data()[i], 0.5 * stack.data()[i]);
  }
}

TEST(LayerAttention, ConstantAcrossLayersGivesEqualWeights) {
  HeadConfig config;
  Rng rng(6);
  auto params = HeadParams<double>::Init(config, 4, rng);
  std::vector<double> plane(7 * 4);
  for (double& v : plane) v = rng.Normal();
  std::vector<double> data;
  for (int n = 0; n < 12; ++n) data.insert(data.end(), plane.begin(), plane.end());
  auto stack = TensorD::FromData({1, 12, 7, 4}, data);
  auto result = LayerAttention(stack, params);
  // Equal pooled inputs per layer; the MLP still mixes layers, so weights
  // differ only through W1 rows. Proportions within each layer are kept.
  for (int64_t n = 0; n < 12; ++n) {
    double m = result.map.at({0, n});
    EXPECT_GT(m, 0.0);
    EXPECT_LT(m, 1.0);
    for (int64_t p = 0; p < 7; ++p)
      for (int64_t c = 0; c < 4; ++c)
        EXPECT_NEAR(result.weighted.at({0, n, p, c}), m * stack.at({0, n, p, c}), 1e-15);
  }
  Zero(params.attention_w1);
  auto flat = LayerAttention(stack, params);
  for (int64_t n = 1; n < 12; ++n) EXPECT_EQ(flat.map.at({0, n}), flat.map.at({0, 0}));
}

TEST(LayerAttention, ScalingOneLayerLeavesOtherPoolsAlone) {
  Rng rng(7);
  auto stack = RandomLeaf({1, 12, 6, 3}, rng);
  std::vector<double> scaled(stack.data().begin(), stack.data().end());
  const int64_t layer = 5;
  for (int64_t i = 0; i < 18; ++i) scaled[static_cast<size_t>(layer * 18 + i)] *= 3.0;
  auto other = TensorD::FromData({1, 12, 6, 3}, scaled);
  auto pools = [](const TensorD& s) {
    auto plane = Reshape(s, {1, 12, -1});
    return std::pair{MeanAxis(plane, 2), MaxAxis(plane, 2)};
  };
  auto [avg_a, max_a] = pools(stack);
  auto [avg_b, max_b] = pools(other);
  for (int64_t n = 0; n < 12; ++n) {
    if (n == layer) continue;
    EXPECT_EQ(avg_a.at({0, n}), avg_b.at({0, n}));
    EXPECT_EQ(max_a.at({0, n}), max_b.at({0, n}));
  }
}

TEST(LayerAttention, MapStrictlyInsideUnitInterval) {
  HeadConfig config;
  Rng rng(8);
  auto params = HeadParams<double>::Init(config, 4, rng);
  for (int trial = 0; trial < 20; ++trial) {
    auto stack = RandomLeaf({1, 12, 5, 4}, rng, -30, 30);
    for (double m : LayerAttention(stack, params).map.data()) {
      EXPECT_GT(m, 0.0);
      EXPECT_LT(m, 1.0);
    }
  }
}

TEST(Spp, BinArithmetic) {
  PoolBins bins = SppBins(200, 4);
  ASSERT_EQ(bins.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(bins[i].first, static_cast<int64_t>(50 * i));
    EXPECT_EQ(bins[i].second - bins[i].first, 50);
  }
  EXPECT_EQ(SppBins(200, 1), (PoolBins{{0, 200}}));
  PoolBins odd = SppBins(50, 4);
  EXPECT_EQ(odd.front(), (std::pair<int64_t, int64_t>{0, 13}));
  EXPECT_EQ(odd.back().second, 50);
  for (int level : {0, 201}) {
    try {
      SppBins(200, level);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidLevel);
    }
  }
}

TEST(Spp, OutputLengthIndependentOfW) {
  std::vector<int> levels = {1, 2, 4};
  for (int64_t w : {50, 200}) {
    auto x = Tensor<float>::Zeros({1, 12, w, 64});
    auto out = Spp(x, std::span<const int>(levels));
    EXPECT_EQ(static_cast<int64_t>(out.size()), 12 * 64 * 7) << w;
  }
}

TEST(Spp, GlobalLevelIsBruteForceMax) {
  Rng rng(9);
  auto x = RandomLeaf({2, 3, 9, 4}, rng);
  std::vector<int> levels = {1};
  auto out = Spp(x, std::span<const int>(levels));
  for (int64_t h = 0; h < 2; ++h)
    for (int64_t n = 0; n < 3; ++n)
      for (int64_t c = 0; c < 4; ++c) {
        double best = -1e300;
        for (int64_t w = 0; w < 9; ++w) best = std::max(best, x.at({h, n, w, c}));
        EXPECT_EQ(out.at({h, n, 0, c}), best);
      }
}

TEST(Classify, ZeroAffineIsUniform) {
  HeadConfig config;
  config.num_classes = 4;
  Rng rng(10);
  auto params = HeadParams<double>::Init(config, 8, rng);
  Zero(params.fc_w);
  auto spp = RandomLeaf({3, 12, 7, 8}, rng);
  auto out = Classify(spp, params, 0.1, {});
  for (double p : out.probs.data()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Classify, EqualLogitsAndShiftInvariance) {
  for (double z : {-40.0, 0.0, 3.0, 700.0}) {
    auto probs = Softmax(TensorD::FromData({1, 2}, {z, z}), -1);
    EXPECT_DOUBLE_EQ(probs.data()[0], 0.5);
    EXPECT_DOUBLE_EQ(probs.data()[1], 0.5);
  }
  auto base = Softmax(TensorD::FromData({1, 3}, {0.2, -1.0, 2.0}), -1);
  auto shifted = Softmax(TensorD::FromData({1, 3}, {100.2, 99.0, 102.0}), -1);
  for (size_t i = 0; i < 3; ++i) EXPECT_NEAR(base.data()[i], shifted.data()[i], 1e-12);
}

TEST(Classify, GradientThroughSppAndClassifier) {
  HeadConfig config;
  config.layers_used = 3;
  config.reduction = 3;
  config.seq_len = 10;
  Rng rng(11);
  auto params = HeadParams<double>::Init(config, 4, rng);
  auto stack = RandomLeaf({2, 3, 10, 4}, rng);
  std::vector<int> levels = {1, 2, 4};
  auto loss = [&] {
    auto att = LayerAttention(stack, params);
    auto pred = Classify(Spp(att.weighted, std::span<const int>(levels)), params, 0.0, {});
    std::vector<int32_t> labels = {1, 0};
    return CrossEntropyWithLogits(pred.logits, std::span<const int32_t>(labels));
  };
  EXPECT_LT(MaxGradError(loss, {stack, params.attention_w0, params.attention_b0,
                                params.attention_w1, params.attention_b1, params.fc_w,
                                params.fc_b}),
            1e-3);
}

ModelConfig TinyModel(int vocab_size) {
  ModelConfig c;
  c.encoder.n_layers = 2;
  c.encoder.hidden = 8;
  c.encoder.n_heads = 2;
  c.encoder.gru_hidden = 4;
  c.encoder.char_dim = 4;
  c.encoder.max_positions = 12;
  c.encoder.vocab_size = vocab_size;
  c.head.layers_used = 2;
  c.head.seq_len = 12;
  return c;
}

TEST(Model, ComposedGradientCheck) {
  std::vector<std::string> corpus = {"http://paypal.com/login", "http://paypal.com/login"};
  Vocab vocab = TrainBpe(corpus, 280);
  auto model = Model<double>::Init(TinyModel(vocab.size()), 5);
  std::vector<TokenSequence> batch = {Encode("http://paypal.com", vocab, 12),
                                      Encode("http://x.org/a", vocab, 12)};
  std::vector<int32_t> labels = {1, 0};
  auto loss = [&] {
    auto out = model.Forward(batch, {});
    return CrossEntropyWithLogits(out.prediction.logits, std::span<const int32_t>(labels));
  };
  // The char LayerNorm sees low-variance rows at init; central differences need
  // the smaller step to get below their truncation error.
  EXPECT_LT(MaxGradError(loss, model.Parameters(), 1e-6), 1e-3);
}

TEST(Model, CheckpointRoundTrip) {
  auto model = Model<float>::Init(TinyModel(kBaseVocabSize), 6);
  auto path = std::filesystem::temp_directory_path() / "pma_model_test.ckpt";
  model.Save(path);
  auto loaded = Model<float>::Load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded.Serialize(), model.Serialize());
  std::vector<TokenSequence> batch = {Encode("http://a.com", Vocab(), 12)};
  auto a = model.Forward(batch, {});
  auto b = loaded.Forward(batch, {});
  EXPECT_EQ(a.prediction.probs.data()[1], b.prediction.probs.data()[1]);
}

TEST(Model, WidthMismatchNamesBothShapes) {
  auto model = Model<float>::Init(TinyModel(kBaseVocabSize), 7);
  Checkpoint ckpt = ParseCheckpoint(model.Serialize());
  auto header = nlohmann::json::parse(ckpt.config_json);
  header["model"]["encoder"]["hidden"] = 16;
  header["model"]["encoder"]["n_heads"] = 2;
  ckpt.config_json = header.dump();
  try {
    Model<float>::FromCheckpoint(ckpt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadCheckpoint);
    std::string message = e.what();
    EXPECT_NE(message.find("(260,8)"), std::string::npos) << message;
    EXPECT_NE(message.find("(260,16)"), std::string::npos) << message;
  }
}

}  // namespace
}  // namespace pma
