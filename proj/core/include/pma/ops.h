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

#ifndef PMA_OPS_H_
#define PMA_OPS_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pma/rng.h"
#include "pma/tensor.h"

namespace pma {

// Differentiable forward ops. Every op validates shapes (ShapeMismatch),
// rejects non-finite outputs (NonFiniteValue) and records a graph edge when
// any input requires grad. Axis arguments accept negative values.

// (..., M, K) x (K, N), or batched (B, M, K) x (B, K, N). With transpose_b the
// right operand is given as (N, K) / (B, N, K).
template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b,
                 bool transpose_b = false);

// Elementwise with numpy-style broadcasting.
template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Scale(const Tensor<T>& a, double factor);

template <typename T>
Tensor<T> Concat(std::span<const Tensor<T>> parts, int axis);
// Stacks equally shaped tensors along a new leading axis.
template <typename T>
Tensor<T> Stack(std::span<const Tensor<T>> parts);
template <typename T>
Tensor<T> Slice(const Tensor<T>& a, int axis, int64_t start, int64_t length);
// One extent may be -1 and is inferred.
template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, Shape shape);
template <typename T>
Tensor<T> Permute(const Tensor<T>& a, std::vector<int> order);

struct ConvPadding {
  int left = 0;
  int right = 0;
  // Keeps the length unchanged at stride 1.
  static ConvPadding Same(int window) {
    return {(window - 1) / 2, window - 1 - (window - 1) / 2};
  }
};

// x: (L, Cin) or (B, L, Cin); weight: (window, Cin, Cout). Output
// (Lout, Cout) / (B, Lout, Cout) with Lout = (L + pad - window) / stride + 1.
template <typename T>
Tensor<T> Conv1d(const Tensor<T>& x, const Tensor<T>& weight, int stride,
                 ConvPadding padding);

enum class PoolKind { kMax, kAverage };

// Half-open [begin, end) ranges along one axis.
using PoolBins = std::vector<std::pair<int64_t, int64_t>>;

// Pools each bin along `axis`; the output extent on that axis is bins.size().
template <typename T>
Tensor<T> Pool(const Tensor<T>& x, int axis, const PoolBins& bins,
               PoolKind kind);
// Sliding-window pooling; windows that would run past the end are dropped.
template <typename T>
Tensor<T> MaxPool(const Tensor<T>& x, int window, int stride, int axis = -1);
template <typename T>
Tensor<T> AvgPool(const Tensor<T>& x, int window, int stride, int axis = -1);

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis);
// Softmax over the last axis treating entries with key_valid[j] == 0 as -inf.
// Rows without a single valid key come out as zeros.
template <typename T>
Tensor<T> MaskedSoftmax(const Tensor<T>& x,
                        std::span<const uint8_t> key_valid);
// Normalises to zero mean, unit (biased) variance along `axis`. No affine.
template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, int axis, double eps);

template <typename T>
Tensor<T> Gelu(const Tensor<T>& x);
template <typename T>
Tensor<T> Sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> Tanh(const Tensor<T>& x);
template <typename T>
Tensor<T> Relu(const Tensor<T>& x);

// Inverted dropout. Identity when !training or rate == 0.
template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, double rate, Rng& rng, bool training);

// table: (V, D). Output (ids.size(), D). Throws IdOutOfRange.
template <typename T>
Tensor<T> EmbeddingLookup(const Tensor<T>& table,
                          std::span<const int32_t> ids);

// logits: (B, K). Mean of -log softmax(logits)[label]; with class weights the
// mean is weighted by the weight of each sample's label.
template <typename T>
Tensor<T> CrossEntropyWithLogits(const Tensor<T>& logits,
                                 std::span<const int32_t> labels,
                                 std::span<const double> class_weights = {});

// GRU recurrence over precomputed input projections x_proj (L, 3g) laid out as
// [reset | update | candidate]. w_rec: (g, 3g), b_rec: (3g). Starts from a zero
// state and returns every state (L, g); with `reverse` the scan runs from the
// last row to the first and row t still holds the state at position t.
//   r = sigmoid(xr + h W_r + b_r), z = sigmoid(xz + h W_z + b_z)
//   n = tanh(xn + r * (h W_n + b_n)), h' = (1 - z) * h + z * n
template <typename T>
Tensor<T> GruScan(const Tensor<T>& x_proj, const Tensor<T>& w_rec,
                  const Tensor<T>& b_rec, bool reverse);

template <typename T>
Tensor<T> Sum(const Tensor<T>& x);
template <typename T>
Tensor<T> Mean(const Tensor<T>& x);
template <typename T>
Tensor<T> SumAxis(const Tensor<T>& x, int axis);
template <typename T>
Tensor<T> MeanAxis(const Tensor<T>& x, int axis);
template <typename T>
Tensor<T> MaxAxis(const Tensor<T>& x, int axis);

}  // namespace pma

#endif  // PMA_OPS_H_
