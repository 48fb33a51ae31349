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

#ifndef PMA_HEAD_H_
#define PMA_HEAD_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pma/checkpoint.h"
#include "pma/encoder.h"
#include "pma/ops.h"
#include "pma/rng.h"
#include "pma/tensor.h"

namespace pma {

enum class LayerSelection { kLastK, kEvenlySpaced };

struct HeadConfig {
  // Encoder layers stacked into the feature map (the attention channel count).
  int layers_used = 12;
  LayerSelection selection = LayerSelection::kLastK;
  // Attention MLP reduction ratio.
  int reduction = 3;
  std::vector<int> spp_levels = {1, 2, 4};
  int num_classes = 2;
  double dropout = 0.1;
  // Fixed position extent W of the feature map.
  int seq_len = 200;

  // ceil(layers_used / reduction).
  int AttentionHidden() const;
  int SppBinCount() const;
  // Throws InvalidArgument / InvalidLevel.
  void Validate() const;

  nlohmann::json ToJson() const;
  static HeadConfig FromJson(const nlohmann::json& j);
};

template <typename T>
struct HeadParams {
  // Window-1 convolution merging [T_l ; H_l] back to the hidden width.
  Tensor<T> merge_w, merge_b;
  // Shared attention MLP: W0 (hidden x layers), W1 (layers x hidden).
  Tensor<T> attention_w0, attention_b0, attention_w1, attention_b1;
  Tensor<T> fc_w, fc_b;

  static HeadParams Init(const HeadConfig& config, int hidden, Rng& rng);
  NamedTensors<T> Named() const;
};

// Indices (0 = lowest) of the encoder layers that feed the stack.
std::vector<int> SelectLayers(int n_layers, int k, LayerSelection selection);

// Merges both channels of every selected layer, zero-pads positions to W,
// stacks layers along a new axis 0 giving (N, H, W, C) and swaps the first two
// axes, returning (H, N, W, C).
template <typename T>
Tensor<T> BuildStack(std::span<const DualChannelOutput<T>> batch,
                     const HeadParams<T>& params, const HeadConfig& config);

template <typename T>
struct AttentionResult {
  Tensor<T> weighted;  // (H, N, W, C)
  Tensor<T> map;       // (H, N), entries in (0, 1)
};

// sigmoid(MLP(avg) + MLP(max)) over the per-layer (W, C) plane, then scales
// each layer of the stack by its weight.
template <typename T>
AttentionResult<T> LayerAttention(const Tensor<T>& stack,
                                  const HeadParams<T>& params);

// Bins of one pyramid level over an axis of length w: window ceil(w/n),
// stride floor(w/n), the last bin stretched to w. Throws InvalidLevel.
PoolBins SppBins(int64_t w, int level);

// Max-pools the position axis of (H, N, W, C) at every level and concatenates
// the bins: (H, N, sum(levels), C), i.e. N * C * sum(levels) values a sample.
template <typename T>
Tensor<T> Spp(const Tensor<T>& weighted, std::span<const int> levels);

template <typename T>
struct Prediction {
  Tensor<T> logits;  // (H, K)
  Tensor<T> probs;   // (H, K)
};

// Mean over the (layer, bin) groups to a C-wide summary, dropout, affine to K
// logits and softmax.
template <typename T>
Prediction<T> Classify(const Tensor<T>& spp, const HeadParams<T>& params,
                       double dropout, ForwardMode mode);

}  // namespace pma

#endif  // PMA_HEAD_H_
