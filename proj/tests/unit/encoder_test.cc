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

#include "pma/encoder.h"

#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.h"
#include "pma/errors.h"
#include "pma/ops.h"

namespace pma {
namespace {

using testing::MaxGradError;
using testing::Probe;
using testing::RandomLeaf;
using testing::TensorD;

EncoderConfig TinyConfig() {
  EncoderConfig c;
  c.n_layers = 2;
  c.hidden = 8;
  c.n_heads = 2;
  c.gru_hidden = 4;
  c.char_dim = 4;
  c.max_positions = 12;
  c.vocab_size = kBaseVocabSize;
  c.dropout = 0.1;
  return c;
}

void ZeroAll(const Tensor<double>& t) {
  Tensor<double> copy = t;
  for (double& v : copy.mutable_data()) v = 0.0;
}

// Leaves of every parameter, for gradient checks.
std::vector<TensorD> Leaves(const EncoderParams<double>& p) {
  std::vector<TensorD> out;
  for (auto& [name, t] : p.Named()) out.push_back(t);
  return out;
}

TEST(EncoderConfig, JsonRoundTripAndValidation) {
  EncoderConfig c = TinyConfig();
  EncoderConfig back = EncoderConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  c.n_heads = 3;
  EXPECT_THROW(c.Validate(), Error);
  EncoderConfig d;
  EXPECT_EQ(d.n_layers, 12);
  EXPECT_EQ(d.FilterCounts(), (std::vector<int>{32, 32}));
}

TEST(EmbedChars, RowsAreTableRows) {
  Rng rng(1);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  std::vector<int32_t> ids = {kPadId, 7, 200, 7};
  auto e = EmbedChars(params, std::span<const int32_t>(ids));
  for (size_t j = 0; j < ids.size(); ++j)
    for (int64_t d = 0; d < 4; ++d)
      EXPECT_EQ(e.at({static_cast<int64_t>(j), d}),
                params.char_embedding.at({ids[j], d}));
  std::vector<int32_t> bad = {kCharVocabSize};
  EXPECT_THROW(EmbedChars(params, std::span<const int32_t>(bad)), Error);
}

TEST(EmbedChars, GradientCountsLookups) {
  Rng rng(2);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  std::vector<int32_t> ids = {5, 9, 11};
  auto grads = Backward(Sum(EmbedChars(params, std::span<const int32_t>(ids))));
  auto g = grads.AsTensor(params.char_embedding);
  for (int64_t row = 0; row < kCharVocabSize; ++row) {
    double expected = (row == 5 || row == 9 || row == 11) ? 1.0 : 0.0;
    for (int64_t d = 0; d < 4; ++d) EXPECT_EQ(g.at({row, d}), expected);
  }
  EXPECT_LT(MaxGradError(
                [&] { return Sum(EmbedChars(params, std::span<const int32_t>(ids))); },
                {params.char_embedding}),
            1e-3);
}

TEST(BiGru, PadSuffixDoesNotLeak) {
  Rng rng(3);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  auto e = RandomLeaf({5, 4}, rng);
  auto padded_rows = RandomLeaf({3, 4}, rng);
  std::vector<TensorD> parts = {e, padded_rows};
  auto e_padded = Concat<double>(parts, 0);
  auto h = BiGru(params, e, 5);
  auto hp = BiGru(params, e_padded, 5);
  ASSERT_EQ(hp.shape(), (Shape{8, 8}));
  for (int64_t t = 0; t < 5; ++t)
    for (int64_t j = 0; j < 8; ++j) EXPECT_EQ(h.at({t, j}), hp.at({t, j}));
  for (int64_t t = 5; t < 8; ++t)
    for (int64_t j = 0; j < 8; ++j) EXPECT_EQ(hp.at({t, j}), 0.0);
}

TEST(BiGru, ZeroParamsGiveZeros) {
  Rng rng(4);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  for (auto* gru : {&params.gru_forward, &params.gru_backward}) {
    ZeroAll(gru->w_in);
    ZeroAll(gru->b_in);
    ZeroAll(gru->w_rec);
    ZeroAll(gru->b_rec);
  }
  auto h = BiGru(params, RandomLeaf({1, 4}, rng), 1);
  for (double v : h.data()) EXPECT_EQ(v, 0.0);
}

TEST(BiGru, ReversalSwapsHalvesUnderMirroredWeights) {
  Rng rng(5);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  params.gru_backward = params.gru_forward;
  auto x = RandomLeaf({3, 4}, rng);
  std::vector<double> flipped;
  for (int64_t t = 2; t >= 0; --t)
    for (int64_t j = 0; j < 4; ++j) flipped.push_back(x.at({t, j}));
  auto h = BiGru(params, x, 3);
  auto hr = BiGru(params, TensorD::FromData({3, 4}, flipped), 3);
  for (int64_t t = 0; t < 3; ++t)
    for (int64_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(h.at({t, j}), hr.at({2 - t, 4 + j}), 1e-14);
      EXPECT_NEAR(h.at({t, 4 + j}), hr.at({2 - t, j}), 1e-14);
    }
}

TEST(CharTokenEmbed, SingleCharUsesSameStateTwice) {
  Rng rng(6);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  auto h = RandomLeaf({4, 8}, rng);
  std::vector<TokenSpan> spans = {{0, 1}, {1, 3}};
  auto out = CharTokenEmbed(params, h, std::span<const TokenSpan>(spans));
  ASSERT_EQ(out.shape(), (Shape{2, 8}));
  auto row = Slice(h, 0, 0, 1);
  std::vector<TensorD> pair = {row, row};
  auto manual = LayerNorm(Add(MatMul(Concat<double>(pair, 1), params.char_proj_w),
                              params.char_proj_b),
                          -1, 1e-12);
  for (int64_t j = 0; j < 8; ++j) EXPECT_NEAR(out.at({0, j}), manual.at({0, j}), 1e-15);
}

TEST(CharTokenEmbed, MiddleCharacterIgnored) {
  Rng rng(7);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  auto h = RandomLeaf({3, 8}, rng);
  std::vector<TokenSpan> spans = {{0, 3}};
  auto base = CharTokenEmbed(params, h, std::span<const TokenSpan>(spans));
  for (int64_t j = 0; j < 8; ++j) h.mutable_data()[static_cast<size_t>(8 + j)] += 5.0;
  auto moved = CharTokenEmbed(params, h, std::span<const TokenSpan>(spans));
  for (size_t i = 0; i < base.size(); ++i) EXPECT_EQ(base.data()[i], moved.data()[i]);
}

TEST(CharTokenEmbed, EmptySpan) {
  Rng rng(8);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  auto h = RandomLeaf({3, 8}, rng);
  std::vector<TokenSpan> spans = {{0, 0}};
  try {
    CharTokenEmbed(params, h, std::span<const TokenSpan>(spans));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySpan);
  }
}

TEST(TransformerLayer, PermutationEquivariant) {
  Rng rng(9);
  EncoderConfig config = TinyConfig();
  auto params = EncoderParams<double>::Init(config, rng);
  auto x = RandomLeaf({4, 8}, rng);
  std::vector<double> swapped(x.data().begin(), x.data().end());
  for (int j = 0; j < 8; ++j) std::swap(swapped[static_cast<size_t>(8 + j)], swapped[static_cast<size_t>(24 + j)]);
  auto y = TransformerLayer(params.layers[0], config, x, {}, {});
  auto ys = TransformerLayer(params.layers[0], config, TensorD::FromData({4, 8}, swapped), {}, {});
  for (int64_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(y.at({1, j}), ys.at({3, j}), 1e-12);
    EXPECT_NEAR(y.at({3, j}), ys.at({1, j}), 1e-12);
    EXPECT_NEAR(y.at({0, j}), ys.at({0, j}), 1e-12);
  }
}

TEST(TransformerLayer, FullyMaskedQueriesGiveNoAttentionGradient) {
  Rng rng(10);
  EncoderConfig config = TinyConfig();
  auto params = EncoderParams<double>::Init(config, rng);
  auto x = RandomLeaf({3, 8}, rng);
  std::vector<uint8_t> none = {0, 0, 0};
  auto grads = Backward(Probe(TransformerLayer(params.layers[0], config, x,
                                               std::span<const uint8_t>(none), {})));
  auto gq = grads.AsTensor(params.layers[0].wq);
  auto gk = grads.AsTensor(params.layers[0].wk);
  for (double g : gq.data()) EXPECT_EQ(g, 0.0);
  for (double g : gk.data()) EXPECT_EQ(g, 0.0);
}

TEST(TransformerLayer, GradientCheck) {
  Rng rng(11);
  EncoderConfig config = TinyConfig();
  auto params = EncoderParams<double>::Init(config, rng);
  auto x = RandomLeaf({4, 8}, rng);
  std::vector<uint8_t> valid = {1, 1, 0, 1};
  const auto& l = params.layers[0];
  EXPECT_LT(MaxGradError(
                [&] {
                  return Probe(TransformerLayer(l, config, x,
                                                std::span<const uint8_t>(valid), {}));
                },
                {x, l.wq, l.wk, l.wv, l.wo, l.ffn_w1, l.ffn_w2, l.ln1_gamma, l.ln2_beta}),
            1e-3);
}

TEST(Interaction, ZeroFusionReducesToLayerNorm) {
  Rng rng(12);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  auto& block = params.interactions[0];
  for (auto& w : block.fuse_w) ZeroAll(w);
  auto t = RandomLeaf({3, 8}, rng);
  auto h = RandomLeaf({3, 8}, rng);
  auto out = HeterogeneousInteraction(block, t, h, {}, 0.0, {});
  auto expected = LayerNorm(t, -1, 1e-12);
  for (size_t i = 0; i < out.token.size(); ++i) {
    EXPECT_NEAR(out.token.data()[i], expected.data()[i], 1e-12);
  }
}

TEST(Interaction, ShapesIndependentOfWindows) {
  for (std::vector<int> windows : {std::vector<int>{2, 3}, std::vector<int>{1, 4, 5}}) {
    EncoderConfig config = TinyConfig();
    config.filter_windows = windows;
    Rng rng(13);
    auto params = EncoderParams<double>::Init(config, rng);
    auto t = RandomLeaf({5, 8}, rng);
    auto out = HeterogeneousInteraction(params.interactions[0], t, t, {}, 0.0, {});
    EXPECT_EQ(out.token.shape(), (Shape{5, 8}));
    EXPECT_EQ(out.chars.shape(), (Shape{5, 8}));
  }
}

TEST(Interaction, GradientReachesBothChannels) {
  Rng rng(14);
  auto params = EncoderParams<double>::Init(TinyConfig(), rng);
  const auto& block = params.interactions[0];
  auto t = RandomLeaf({2, 8}, rng);
  auto h = RandomLeaf({2, 8}, rng);
  auto g_token = Backward(Probe(HeterogeneousInteraction(block, t, h, {}, 0.0, {}).token));
  auto g_chars = Backward(Probe(HeterogeneousInteraction(block, t, h, {}, 0.0, {}).chars));
  auto nonzero = [](std::span<const double> g) {
    for (double v : g)
      if (v != 0.0) return true;
    return false;
  };
  EXPECT_TRUE(nonzero(g_token.Get(h)));
  EXPECT_TRUE(nonzero(g_chars.Get(t)));
  EXPECT_LT(MaxGradError(
                [&] { return Probe(HeterogeneousInteraction(block, t, h, {}, 0.0, {}).token); },
                {t, h}),
            1e-3);
  EXPECT_LT(MaxGradError(
                [&] { return Probe(HeterogeneousInteraction(block, t, h, {}, 0.0, {}).chars); },
                {t, h}),
            1e-3);
}

class EncodeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<std::string> corpus = {"http://paypal.com/login", "http://paypal.com/login",
                                       "https://bank.example.org/a?b=c"};
    vocab_ = TrainBpe(corpus, 300);
  }
  EncoderConfig Tiny() const {
    EncoderConfig c = TinyConfig();
    c.vocab_size = vocab_.size();
    return c;
  }
  Vocab vocab_;
};

TEST_F(EncodeTest, DefaultDepthIsTwelve) {
  EncoderConfig config;
  config.hidden = 16;
  config.gru_hidden = 4;
  config.char_dim = 4;
  config.vocab_size = vocab_.size();
  Rng rng(15);
  auto params = EncoderParams<float>::Init(config, rng);
  auto out = Encode(Encode("http://a.com", vocab_), params, config, {});
  EXPECT_EQ(out.token.size(), 12u);
  EXPECT_EQ(out.chars.size(), 12u);
}

TEST_F(EncodeTest, SingleLayerEqualsManualComposition) {
  EncoderConfig config = Tiny();
  config.n_layers = 1;
  Rng rng(16);
  auto params = EncoderParams<double>::Init(config, rng);
  TokenSequence seq = Encode("http://a.com", vocab_, 12);
  auto out = Encode(seq, params, config, {});
  const int64_t m = seq.length;
  std::vector<int32_t> positions;
  for (int i = 0; i < m; ++i) positions.push_back(i);
  auto tok = Add(EmbeddingLookup(params.token_embedding,
                                 std::span<const int32_t>(seq.subword_ids.data(), m)),
                 EmbeddingLookup(params.position_embedding, std::span<const int32_t>(positions)));
  tok = Add(Mul(LayerNorm(tok, -1, 1e-12), params.embed_ln_gamma), params.embed_ln_beta);
  auto e = EmbedChars(params, std::span<const int32_t>(seq.char_ids.data(), seq.char_length));
  auto h = BiGru(params, NormalizeCharEmbeddings(params, e), seq.char_length);
  auto chars = CharTokenEmbed(params, h, std::span<const TokenSpan>(seq.spans.data(), m));
  auto t = TransformerLayer(params.layers[0], config, tok, {}, {});
  auto pair = HeterogeneousInteraction(params.interactions[0], t, chars, {}, 0.0, {});
  for (size_t i = 0; i < pair.token.size(); ++i) {
    EXPECT_EQ(out.token[0].data()[i], pair.token.data()[i]);
    EXPECT_EQ(out.chars[0].data()[i], pair.chars.data()[i]);
  }
}

TEST_F(EncodeTest, DeterministicInEvalMode) {
  EncoderConfig config = Tiny();
  Rng rng(17);
  auto params = EncoderParams<double>::Init(config, rng);
  TokenSequence seq = Encode("http://paypal.com", vocab_, 12);
  Rng a(1);
  Rng b(2);
  auto x = Encode(seq, params, config, {false, &a});
  auto y = Encode(seq, params, config, {false, &b});
  for (size_t l = 0; l < x.token.size(); ++l)
    for (size_t i = 0; i < x.token[l].size(); ++i)
      EXPECT_EQ(x.token[l].data()[i], y.token[l].data()[i]);
}

TEST_F(EncodeTest, LayersAreNormalised) {
  EncoderConfig config = Tiny();
  Rng rng(18);
  auto params = EncoderParams<double>::Init(config, rng);
  auto out = Encode(Encode("http://paypal.com/login", vocab_, 12), params, config, {});
  for (const auto& channel : {out.token, out.chars}) {
    for (const auto& t : channel) {
      for (int64_t r = 0; r < t.dim(0); ++r) {
        double mean = 0;
        double var = 0;
        for (int64_t c = 0; c < 8; ++c) mean += t.at({r, c}) / 8;
        for (int64_t c = 0; c < 8; ++c) var += std::pow(t.at({r, c}) - mean, 2) / 8;
        EXPECT_LT(std::abs(mean), 1e-3);
        EXPECT_NEAR(var, 1.0, 1e-3);
      }
    }
  }
}

TEST_F(EncodeTest, PadRowsNeverInfluenceRealRows) {
  EncoderConfig config = Tiny();
  config.max_positions = 200;
  Rng rng(19);
  auto params = EncoderParams<double>::Init(config, rng);
  TokenSequence seq = Encode("http://paypal.com/login", vocab_, 200);
  auto trimmed = Encode(seq, params, config, {}, true);
  auto full = Encode(seq, params, config, {}, false);
  ASSERT_EQ(full.rows, 200);
  for (size_t l = 0; l < trimmed.token.size(); ++l) {
    for (int64_t r = 0; r < trimmed.rows; ++r)
      for (int64_t c = 0; c < 8; ++c) {
        EXPECT_NEAR(trimmed.token[l].at({r, c}), full.token[l].at({r, c}), 1e-5);
        EXPECT_NEAR(trimmed.chars[l].at({r, c}), full.chars[l].at({r, c}), 1e-5);
      }
  }
}

TEST_F(EncodeTest, CharacterFlipChangesCharChannel) {
  EncoderConfig config = Tiny();
  Rng rng(20);
  auto params = EncoderParams<double>::Init(config, rng);
  TokenSequence a = Encode("http://xq.com", Vocab(), 12);
  TokenSequence b = Encode("http://xz.com", Vocab(), 12);
  ASSERT_EQ(a.length, b.length);
  auto oa = Encode(a, params, config, {});
  auto ob = Encode(b, params, config, {});
  double delta = 0;
  for (int64_t c = 0; c < 8; ++c) {
    delta += std::abs(oa.chars.back().at({9, c}) - ob.chars.back().at({9, c}));
  }
  EXPECT_GT(delta, 0.0);
}

TEST_F(EncodeTest, FullGradientCheck) {
  EncoderConfig config = Tiny();
  Rng rng(21);
  auto params = EncoderParams<double>::Init(config, rng);
  TokenSequence seq = Encode("http://paypal.com", vocab_, 12);
  auto probe = [&] {
    auto out = Encode(seq, params, config, {});
    TensorD total = Probe(out.token[0], 1);
    for (size_t l = 0; l < out.token.size(); ++l) {
      total = Add(total, Probe(out.token[l], 10 + l));
      total = Add(total, Probe(out.chars[l], 20 + l));
    }
    return total;
  };
  EXPECT_LT(MaxGradError(probe, Leaves(params)), 1e-3);
}

TEST_F(EncodeTest, GradientCheckWithDropoutMask) {
  EncoderConfig config = Tiny();
  config.n_layers = 1;
  Rng rng(22);
  auto params = EncoderParams<double>::Init(config, rng);
  TokenSequence seq = Encode("http://a.com", vocab_, 12);
  auto probe = [&] {
    Rng mask(3);
    auto out = Encode(seq, params, config, {true, &mask});
    return Add(Probe(out.token[0], 1), Probe(out.chars[0], 2));
  };
  const auto& l = params.layers[0];
  EXPECT_LT(MaxGradError(probe, {l.wq, l.ffn_w1, params.char_proj_w,
                                 params.gru_forward.w_rec}),
            1e-3);
}

}  // namespace
}  // namespace pma
