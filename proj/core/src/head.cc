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

#include <cmath>

#include "pma/errors.h"

namespace pma {
namespace {

template <typename T>
Tensor<T> TruncatedNormal(Shape shape, Rng& rng) {
  std::vector<T> data(static_cast<size_t>(NumElements(shape)));
  for (T& v : data) {
    double z;
    do {
      z = rng.Normal();
    } while (std::abs(z) > 2.0);
    v = static_cast<T>(z * 0.02);
  }
  return Tensor<T>::FromData(std::move(shape), std::move(data), true);
}

const char* SelectionName(LayerSelection s) {
  return s == LayerSelection::kLastK ? "last" : "even";
}

}  // namespace

int HeadConfig::AttentionHidden() const {
  return (layers_used + reduction - 1) / reduction;
}

int HeadConfig::SppBinCount() const {
  int total = 0;
  for (int n : spp_levels) total += n;
  return total;
}

void HeadConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "head config: " + what);
  };
  if (layers_used < 1) fail("layers_used must be >= 1");
  if (reduction < 1) fail("reduction must be >= 1");
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (seq_len < 1) fail("seq_len must be >= 1");
  if (spp_levels.empty()) fail("at least one pyramid level");
  for (int n : spp_levels) SppBins(seq_len, n);
}

nlohmann::json HeadConfig::ToJson() const {
  return {{"layers_used", layers_used},
          {"selection", SelectionName(selection)},
          {"reduction", reduction},
          {"spp_levels", spp_levels},
          {"num_classes", num_classes},
          {"dropout", dropout},
          {"seq_len", seq_len}};
}

HeadConfig HeadConfig::FromJson(const nlohmann::json& j) {
  HeadConfig c;
  c.layers_used = j.value("layers_used", c.layers_used);
  std::string selection = j.value("selection", std::string("last"));
  if (selection == "last") {
    c.selection = LayerSelection::kLastK;
  } else if (selection == "even") {
    c.selection = LayerSelection::kEvenlySpaced;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown layer selection '" + selection + "'");
  }
  c.reduction = j.value("reduction", c.reduction);
  c.spp_levels = j.value("spp_levels", c.spp_levels);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.dropout = j.value("dropout", c.dropout);
  c.seq_len = j.value("seq_len", c.seq_len);
  c.Validate();
  return c;
}

template <typename T>
HeadParams<T> HeadParams<T>::Init(const HeadConfig& config, int hidden, Rng& rng) {
  config.Validate();
  const int64_t c = hidden;
  const int64_t layers = config.layers_used;
  const int64_t h = config.AttentionHidden();
  HeadParams p;
  p.merge_w = TruncatedNormal<T>({1, 2 * c, c}, rng);
  p.merge_b = Tensor<T>::Zeros({c}, true);
  p.attention_w0 = TruncatedNormal<T>({h, layers}, rng);
  p.attention_b0 = Tensor<T>::Zeros({h}, true);
  p.attention_w1 = TruncatedNormal<T>({layers, h}, rng);
  p.attention_b1 = Tensor<T>::Zeros({layers}, true);
  p.fc_w = TruncatedNormal<T>({c, config.num_classes}, rng);
  p.fc_b = Tensor<T>::Zeros({config.num_classes}, true);
  return p;
}

template <typename T>
NamedTensors<T> HeadParams<T>::Named() const {
  return {{"head.merge.w", merge_w},           {"head.merge.b", merge_b},
          {"head.attention.w0", attention_w0}, {"head.attention.b0", attention_b0},
          {"head.attention.w1", attention_w1}, {"head.attention.b1", attention_b1},
          {"head.fc.w", fc_w},                 {"head.fc.b", fc_b}};
}

std::vector<int> SelectLayers(int n_layers, int k, LayerSelection selection) {
  if (k < 1 || k > n_layers) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot select " + std::to_string(k) + " of " +
                    std::to_string(n_layers) + " layers");
  }
  std::vector<int> out;
  if (selection == LayerSelection::kLastK) {
    for (int i = n_layers - k; i < n_layers; ++i) out.push_back(i);
  } else if (k == 1) {
    out.push_back(n_layers - 1);
  } else {
    // Spread from the lowest to the topmost layer.
    for (int i = 0; i < k; ++i) {
      out.push_back(static_cast<int>(std::lround(
          static_cast<double>(i) * (n_layers - 1) / (k - 1))));
    }
  }
  return out;
}

template <typename T>
Tensor<T> BuildStack(std::span<const DualChannelOutput<T>> batch,
                     const HeadParams<T>& params, const HeadConfig& config) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  const int n_layers = static_cast<int>(batch[0].token.size());
  const std::vector<int> layers =
      SelectLayers(n_layers, config.layers_used, config.selection);
  const int64_t w = config.seq_len;
  std::vector<Tensor<T>> per_layer;
  for (int l : layers) {
    std::vector<Tensor<T>> samples;
    for (const DualChannelOutput<T>& out : batch) {
      if (static_cast<int>(out.token.size()) != n_layers ||
          static_cast<int>(out.chars.size()) != n_layers) {
        throw Error(ErrorCode::kShapeMismatch, "encoder outputs disagree on layer count");
      }
      const Tensor<T>& t = out.token[static_cast<size_t>(l)];
      const Tensor<T>& h = out.chars[static_cast<size_t>(l)];
      if (t.shape() != h.shape() || t.rank() != 2) {
        throw Error(ErrorCode::kShapeMismatch,
                    "channels " + ShapeString(t.shape()) + " / " + ShapeString(h.shape()));
      }
      const int64_t m = t.dim(0);
      if (m > w) {
        throw Error(ErrorCode::kShapeMismatch,
                    std::to_string(m) + " positions exceed W=" + std::to_string(w));
      }
      std::vector<Tensor<T>> channels = {t, h};
      Tensor<T> merged = Add(Conv1d(Concat<T>(channels, 1), params.merge_w, 1, ConvPadding{}),
                             params.merge_b);
      if (m < w) {
        std::vector<Tensor<T>> rows = {merged, Tensor<T>::Zeros({w - m, merged.dim(1)})};
        merged = Concat<T>(rows, 0);
      }
      samples.push_back(merged);
    }
    per_layer.push_back(Stack<T>(samples));
  }
  return Permute(Stack<T>(per_layer), {1, 0, 2, 3});
}

template <typename T>
AttentionResult<T> LayerAttention(const Tensor<T>& stack, const HeadParams<T>& params) {
  if (stack.rank() != 4 || stack.dim(1) != params.attention_w0.dim(1)) {
    throw Error(ErrorCode::kShapeMismatch,
                "stack " + ShapeString(stack.shape()) + " does not match " +
                    std::to_string(params.attention_w0.dim(1)) + " attention channels");
  }
  const int64_t batch = stack.dim(0);
  const int64_t layers = stack.dim(1);
  Tensor<T> plane = Reshape(stack, {batch, layers, -1});
  auto mlp = [&params](const Tensor<T>& f) {
    Tensor<T> hidden = Relu(Add(MatMul(f, params.attention_w0, true), params.attention_b0));
    return Add(MatMul(hidden, params.attention_w1, true), params.attention_b1);
  };
  Tensor<T> map = Sigmoid(Add(mlp(MeanAxis(plane, 2)), mlp(MaxAxis(plane, 2))));
  return {Mul(stack, Reshape(map, {batch, layers, 1, 1})), map};
}

PoolBins SppBins(int64_t w, int level) {
  if (level < 1 || level > w) {
    throw Error(ErrorCode::kInvalidLevel,
                "pyramid level " + std::to_string(level) + " outside [1, " +
                    std::to_string(w) + "]");
  }
  const int64_t window = (w + level - 1) / level;
  const int64_t stride = w / level;
  PoolBins bins;
  for (int i = 0; i < level; ++i) {
    int64_t begin = i * stride;
    int64_t end = std::min(begin + window, w);
    if (i == level - 1) end = w;
    bins.emplace_back(begin, end);
  }
  return bins;
}

template <typename T>
Tensor<T> Spp(const Tensor<T>& weighted, std::span<const int> levels) {
  if (weighted.rank() != 4) {
    throw Error(ErrorCode::kShapeMismatch,
                "spp expects (H, N, W, C), got " + ShapeString(weighted.shape()));
  }
  if (levels.empty()) throw Error(ErrorCode::kInvalidLevel, "no pyramid levels");
  PoolBins bins;
  for (int n : levels) {
    PoolBins level = SppBins(weighted.dim(2), n);
    bins.insert(bins.end(), level.begin(), level.end());
  }
  return Pool(weighted, 2, bins, PoolKind::kMax);
}

template <typename T>
Prediction<T> Classify(const Tensor<T>& spp, const HeadParams<T>& params,
                       double dropout, ForwardMode mode) {
  if (spp.rank() != 4) {
    throw Error(ErrorCode::kShapeMismatch,
                "classify expects (H, N, bins, C), got " + ShapeString(spp.shape()));
  }
  const int64_t batch = spp.dim(0);
  Tensor<T> summary = MeanAxis(Reshape(spp, {batch, -1, spp.dim(3)}), 1);
  if (mode.training && dropout > 0.0) {
    if (mode.rng == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "training forward needs an rng");
    }
    summary = Dropout(summary, dropout, *mode.rng, true);
  }
  Tensor<T> logits = Add(MatMul(summary, params.fc_w), params.fc_b);
  return {logits, Softmax(logits, -1)};
}

#define PMA_INSTANTIATE_HEAD(T)                                                \
  template struct HeadParams<T>;                                              \
  template Tensor<T> BuildStack(std::span<const DualChannelOutput<T>>,        \
                                const HeadParams<T>&, const HeadConfig&);     \
  template AttentionResult<T> LayerAttention(const Tensor<T>&,                \
                                             const HeadParams<T>&);           \
  template Tensor<T> Spp(const Tensor<T>&, std::span<const int>);             \
  template Prediction<T> Classify(const Tensor<T>&, const HeadParams<T>&,     \
                                  double, ForwardMode);

PMA_INSTANTIATE_HEAD(float)
PMA_INSTANTIATE_HEAD(double)

#undef PMA_INSTANTIATE_HEAD

}  // namespace pma
