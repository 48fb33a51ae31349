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

#include "pma/ops.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gradcheck.h"
#include "pma/errors.h"

namespace pma {
namespace {

using testing::MaxGradError;
using testing::Probe;
using testing::RandomLeaf;
using testing::TensorD;

constexpr double kTol = 1e-3;

TEST(OpsExamples, GeluAtZero) {
  auto y = Gelu(TensorD::FromData({1}, {0.0}));
  EXPECT_EQ(y.item(), 0.0);
}

TEST(OpsExamples, SigmoidAtZero) {
  auto y = Sigmoid(TensorD::FromData({1}, {0.0}));
  EXPECT_DOUBLE_EQ(y.item(), 0.5);
}

TEST(OpsExamples, PermuteSwapsLeadingAxes) {
  auto x = TensorD::Zeros({12, 4, 200, 64});
  auto y = Permute(x, {1, 0, 2, 3});
  EXPECT_EQ(y.shape(), (Shape{4, 12, 200, 64}));
}

TEST(OpsExamples, PermuteMovesValues) {
  Rng rng(3);
  auto x = RandomLeaf({3, 2, 4, 5}, rng);
  auto y = Permute(x, {1, 0, 2, 3});
  for (int64_t a = 0; a < 3; ++a)
    for (int64_t b = 0; b < 2; ++b)
      for (int64_t c = 0; c < 4; ++c)
        for (int64_t d = 0; d < 5; ++d)
          EXPECT_EQ(y.at({b, a, c, d}), x.at({a, b, c, d}));
}

TEST(OpsExamples, MaxPoolWindowTwoStrideTwo) {
  auto y = MaxPool(TensorD::FromData({4}, {1, 3, 2, 5}), 2, 2);
  ASSERT_EQ(y.shape(), (Shape{2}));
  EXPECT_EQ(y.data()[0], 3.0);
  EXPECT_EQ(y.data()[1], 5.0);
}

TEST(OpsExamples, AvgPoolWindowTwoStrideTwo) {
  auto y = AvgPool(TensorD::FromData({4}, {1, 3, 2, 5}), 2, 2);
  EXPECT_EQ(y.data()[0], 2.0);
  EXPECT_EQ(y.data()[1], 3.5);
}

TEST(OpsErrors, ShapeMismatch) {
  auto a = TensorD::Zeros({2, 3});
  auto b = TensorD::Zeros({4, 5});
  EXPECT_THROW(MatMul(a, b), Error);
  EXPECT_THROW(Add(a, b), Error);
  try {
    Add(a, b);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(OpsErrors, NonFiniteTrips) {
  auto a = TensorD::FromData({1}, {1e308});
  try {
    Scale(a, 10.0);
    FAIL() << "expected NonFiniteValue";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue);
  }
}

TEST(OpsErrors, DropoutRateRange) {
  Rng rng(1);
  auto x = TensorD::Zeros({3});
  EXPECT_THROW(Dropout(x, 1.0, rng, true), Error);
  EXPECT_THROW(Dropout(x, -0.1, rng, true), Error);
}

TEST(OpsErrors, EmbeddingIdOutOfRange) {
  auto table = TensorD::Zeros({4, 2});
  std::vector<int32_t> ids = {0, 4};
  try {
    EmbeddingLookup(table, std::span<const int32_t>(ids));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIdOutOfRange);
  }
}

TEST(OpsErrors, LabelOutOfRange) {
  auto logits = TensorD::Zeros({2, 2});
  std::vector<int32_t> labels = {0, 2};
  try {
    CrossEntropyWithLogits(logits, std::span<const int32_t>(labels));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelOutOfRange);
  }
}

TEST(OpsGraph, EdgeOnlyWhenInputRequiresGrad) {
  auto a = TensorD::Full({2}, 1.0, false);
  auto b = TensorD::Full({2}, 1.0, true);
  EXPECT_FALSE(Add(a, a).requires_grad());
  EXPECT_TRUE(Add(a, b).requires_grad());
  NoGradGuard guard;
  EXPECT_FALSE(Add(a, b).requires_grad());
}

// One finite-difference oracle per op kind.
class GradCheck : public ::testing::Test {
 protected:
  Rng rng_{2024};
};

TEST_F(GradCheck, MatMul) {
  auto a = RandomLeaf({3, 4}, rng_);
  auto b = RandomLeaf({4, 5}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(MatMul(a, b)); }, {a, b}), kTol);
}

TEST_F(GradCheck, MatMulTransposedAndLeadingDims) {
  auto a = RandomLeaf({2, 3, 4}, rng_);
  auto b = RandomLeaf({5, 4}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(MatMul(a, b, true)); }, {a, b}),
            kTol);
}

TEST_F(GradCheck, MatMulBatched) {
  auto a = RandomLeaf({2, 3, 4}, rng_);
  auto b = RandomLeaf({2, 4, 2}, rng_);
  auto bt = RandomLeaf({2, 2, 4}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(MatMul(a, b)); }, {a, b}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(MatMul(a, bt, true)); }, {a, bt}),
            kTol);
}

TEST_F(GradCheck, AddSubMulBroadcast) {
  auto a = RandomLeaf({3, 1, 4}, rng_);
  auto b = RandomLeaf({2, 4}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(Add(a, b)); }, {a, b}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Sub(a, b)); }, {a, b}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Mul(a, b)); }, {a, b}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Scale(a, -1.5)); }, {a}), kTol);
}

TEST_F(GradCheck, ConcatStackSlice) {
  auto a = RandomLeaf({2, 3}, rng_);
  auto b = RandomLeaf({2, 2}, rng_);
  auto c = RandomLeaf({2, 3}, rng_);
  EXPECT_LT(MaxGradError(
                [&] {
                  std::vector<TensorD> parts = {a, b};
                  return Probe(Concat<double>(parts, 1));
                },
                {a, b}),
            kTol);
  EXPECT_LT(MaxGradError(
                [&] {
                  std::vector<TensorD> parts = {a, c};
                  return Probe(Stack<double>(parts));
                },
                {a, c}),
            kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Slice(a, 1, 1, 2)); }, {a}), kTol);
}

TEST_F(GradCheck, ReshapePermute) {
  auto a = RandomLeaf({2, 3, 4}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(Reshape(a, {4, -1})); }, {a}),
            kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Permute(a, {2, 0, 1})); }, {a}),
            kTol);
}

TEST_F(GradCheck, Conv1d) {
  auto x = RandomLeaf({7, 3}, rng_);
  auto xb = RandomLeaf({2, 6, 3}, rng_);
  auto w = RandomLeaf({3, 3, 2}, rng_);
  EXPECT_LT(MaxGradError(
                [&] { return Probe(Conv1d(x, w, 1, ConvPadding::Same(3))); },
                {x, w}),
            kTol);
  EXPECT_LT(MaxGradError(
                [&] { return Probe(Conv1d(xb, w, 2, ConvPadding{1, 0})); },
                {xb, w}),
            kTol);
}

TEST_F(GradCheck, Pooling) {
  auto x = RandomLeaf({3, 8}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(MaxPool(x, 3, 2)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(AvgPool(x, 3, 2)); }, {x}), kTol);
  PoolBins bins = {{0, 2}, {1, 3}};
  EXPECT_LT(MaxGradError(
                [&] { return Probe(Pool(x, 0, bins, PoolKind::kMax)); }, {x}),
            kTol);
}

TEST_F(GradCheck, SoftmaxVariants) {
  auto x = RandomLeaf({3, 5}, rng_);
  std::vector<uint8_t> valid = {1, 0, 1, 1, 0};
  EXPECT_LT(MaxGradError([&] { return Probe(Softmax(x, 0)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Softmax(x, -1)); }, {x}), kTol);
  EXPECT_LT(MaxGradError(
                [&] {
                  return Probe(MaskedSoftmax(x, std::span<const uint8_t>(valid)));
                },
                {x}),
            kTol);
}

TEST_F(GradCheck, LayerNorm) {
  auto x = RandomLeaf({3, 6}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(LayerNorm(x, -1, 1e-12)); }, {x}),
            kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(LayerNorm(x, 0, 1e-5)); }, {x}),
            kTol);
}

TEST_F(GradCheck, Activations) {
  auto x = RandomLeaf({10}, rng_);
  EXPECT_LT(MaxGradError([&] { return Probe(Gelu(x)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Sigmoid(x)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Tanh(x)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(Relu(x)); }, {x}), kTol);
}

TEST_F(GradCheck, Dropout) {
  auto x = RandomLeaf({20}, rng_);
  EXPECT_LT(MaxGradError(
                [&] {
                  Rng mask_rng(5);
                  return Probe(Dropout(x, 0.3, mask_rng, true));
                },
                {x}),
            kTol);
}

TEST_F(GradCheck, EmbeddingLookup) {
  auto table = RandomLeaf({5, 3}, rng_);
  std::vector<int32_t> ids = {4, 0, 4, 2};
  EXPECT_LT(MaxGradError(
                [&] {
                  return Probe(
                      EmbeddingLookup(table, std::span<const int32_t>(ids)));
                },
                {table}),
            kTol);
}

TEST_F(GradCheck, CrossEntropy) {
  auto logits = RandomLeaf({4, 3}, rng_);
  std::vector<int32_t> labels = {0, 2, 1, 2};
  std::vector<double> weights = {1.0, 0.5, 2.0};
  EXPECT_LT(MaxGradError(
                [&] {
                  return CrossEntropyWithLogits(
                      logits, std::span<const int32_t>(labels));
                },
                {logits}),
            kTol);
  EXPECT_LT(MaxGradError(
                [&] {
                  return CrossEntropyWithLogits(
                      logits, std::span<const int32_t>(labels),
                      std::span<const double>(weights));
                },
                {logits}),
            kTol);
}

TEST_F(GradCheck, Reductions) {
  auto x = RandomLeaf({3, 4, 2}, rng_);
  EXPECT_LT(MaxGradError([&] { return Mean(x); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(SumAxis(x, 1)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(MeanAxis(x, 0)); }, {x}), kTol);
  EXPECT_LT(MaxGradError([&] { return Probe(MaxAxis(x, -1)); }, {x}), kTol);
}

TEST_F(GradCheck, GruScan) {
  auto x = RandomLeaf({4, 6}, rng_);
  auto w = RandomLeaf({2, 6}, rng_, -1, 1);
  auto b = RandomLeaf({6}, rng_, -1, 1);
  for (bool reverse : {false, true}) {
    EXPECT_LT(MaxGradError([&] { return Probe(GruScan(x, w, b, reverse)); },
                           {x, w, b}),
              kTol);
  }
}

TEST(OpsExamples, GruZeroParamsGiveZeroStates) {
  auto x = TensorD::Zeros({1, 9});
  auto w = TensorD::Zeros({3, 9});
  auto b = TensorD::Zeros({9});
  auto h = GruScan(x, w, b, false);
  ASSERT_EQ(h.shape(), (Shape{1, 3}));
  for (double v : h.data()) EXPECT_EQ(v, 0.0);
}

TEST(OpsProperties, GruReverseEqualsForwardOnReversedInput) {
  Rng rng(21);
  auto x = RandomLeaf({5, 6}, rng);
  auto w = RandomLeaf({2, 6}, rng, -1, 1);
  auto b = RandomLeaf({6}, rng, -1, 1);
  std::vector<double> flipped;
  for (int64_t t = 4; t >= 0; --t)
    for (int64_t j = 0; j < 6; ++j) flipped.push_back(x.at({t, j}));
  auto xr = TensorD::FromData({5, 6}, flipped);
  auto back = GruScan(x, w, b, true);
  auto fwd = GruScan(xr, w, b, false);
  for (int64_t t = 0; t < 5; ++t)
    for (int64_t j = 0; j < 2; ++j)
      EXPECT_DOUBLE_EQ(back.at({t, j}), fwd.at({4 - t, j}));
}

TEST(OpsProperties, SoftmaxNormalised) {
  Rng rng(8);
  auto x = RandomLeaf({6, 9}, rng, -10, 10);
  for (int axis : {0, 1}) {
    auto y = Softmax(x, axis);
    auto totals = SumAxis(y, axis);
    for (double t : totals.data()) EXPECT_NEAR(t, 1.0, 1e-9);
    for (double v : y.data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(OpsProperties, MaskedSoftmaxIgnoresMaskedKeys) {
  auto x = TensorD::FromData({2, 3}, {1, 100, 2, 0, 0, 0});
  std::vector<uint8_t> valid = {1, 0, 1};
  auto y = MaskedSoftmax(x, std::span<const uint8_t>(valid));
  EXPECT_EQ(y.at({0, 1}), 0.0);
  EXPECT_NEAR(y.at({0, 0}) + y.at({0, 2}), 1.0, 1e-12);
  std::vector<uint8_t> none = {0, 0, 0};
  auto z = MaskedSoftmax(x, std::span<const uint8_t>(none));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST(OpsProperties, LayerNormMoments) {
  Rng rng(9);
  auto x = RandomLeaf({5, 32}, rng, -50, 50);
  auto y = LayerNorm(x, -1, 1e-12);
  for (int64_t r = 0; r < 5; ++r) {
    double mean = 0;
    double var = 0;
    for (int64_t c = 0; c < 32; ++c) mean += y.at({r, c});
    mean /= 32;
    for (int64_t c = 0; c < 32; ++c) var += std::pow(y.at({r, c}) - mean, 2);
    var /= 32;
    EXPECT_LT(std::abs(mean), 1e-6);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}

TEST(OpsProperties, DropoutRateZeroIsIdentity) {
  Rng rng(10);
  auto x = RandomLeaf({50}, rng);
  auto y = Dropout(x, 0.0, rng, true);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
  auto z = Dropout(x, 0.5, rng, false);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_EQ(z.data()[i], x.data()[i]);
}

TEST(OpsProperties, DropoutPreservesExpectation) {
  Rng init(11);
  auto x = RandomLeaf({16}, init, 0.5, 2.0);
  std::vector<double> mean(16, 0.0);
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    auto y = Dropout(x, 0.3, rng, true);
    for (size_t i = 0; i < 16; ++i) mean[i] += y.data()[i] / 1000.0;
  }
  for (size_t i = 0; i < 16; ++i) {
    EXPECT_NEAR(mean[i], x.data()[i], 0.05 * x.data()[i]) << i;
  }
}

TEST(OpsProperties, ConvSamePaddingKeepsLength) {
  for (int window : {1, 2, 3, 4}) {
    auto x = TensorD::Zeros({11, 3});
    auto w = TensorD::Zeros({window, 3, 5});
    auto y = Conv1d(x, w, 1, ConvPadding::Same(window));
    EXPECT_EQ(y.shape(), (Shape{11, 5})) << window;
  }
}

TEST(OpsProperties, CrossEntropyUniformIsLn2) {
  auto logits = TensorD::Zeros({3, 2});
  std::vector<int32_t> labels = {0, 1, 1};
  auto loss = CrossEntropyWithLogits(logits, std::span<const int32_t>(labels));
  EXPECT_NEAR(loss.item(), std::log(2.0), 1e-12);
}

TEST(OpsProperties, CrossEntropyHugeCorrectLogit) {
  auto logits = TensorD::FromData({1, 2}, {500.0, 0.0});
  std::vector<int32_t> labels = {0};
  auto loss = CrossEntropyWithLogits(logits, std::span<const int32_t>(labels));
  EXPECT_LT(loss.item(), 1e-12);
}

TEST(OpsProperties, CrossEntropyBatchMean) {
  auto a = TensorD::FromData({1, 2}, {0.3, -1.2});
  auto b = TensorD::FromData({1, 2}, {2.0, 0.5});
  auto ab = TensorD::FromData({2, 2}, {0.3, -1.2, 2.0, 0.5});
  std::vector<int32_t> one = {1};
  std::vector<int32_t> zero = {0};
  std::vector<int32_t> both = {1, 0};
  double la = CrossEntropyWithLogits(a, std::span<const int32_t>(one)).item();
  double lb = CrossEntropyWithLogits(b, std::span<const int32_t>(zero)).item();
  double lab = CrossEntropyWithLogits(ab, std::span<const int32_t>(both)).item();
  EXPECT_NEAR(lab, (la + lb) / 2, 1e-12);
}

TEST(OpsPrecision, FloatMatchesDouble) {
  Rng rng(12);
  auto a = RandomLeaf({4, 6}, rng);
  auto b = RandomLeaf({6, 3}, rng);
  std::vector<float> af(a.data().begin(), a.data().end());
  std::vector<float> bf(b.data().begin(), b.data().end());
  auto yd = Gelu(MatMul(a, b));
  auto yf = Gelu(MatMul(Tensor<float>::FromData({4, 6}, af),
                        Tensor<float>::FromData({6, 3}, bf)));
  for (size_t i = 0; i < yd.size(); ++i) {
    EXPECT_NEAR(yf.data()[i], yd.data()[i], 1e-4);
  }
}

}  // namespace
}  // namespace pma
