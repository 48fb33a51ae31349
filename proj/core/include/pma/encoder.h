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

#ifndef PMA_ENCODER_H_
#define PMA_ENCODER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pma/checkpoint.h"
#include "pma/rng.h"
#include "pma/tensor.h"
#include "pma/tokenizer.h"

namespace pma {

struct EncoderConfig {
  int n_layers = 12;
  int hidden = 64;
  int n_heads = 4;
  // GRU width per direction; the first/last character pair is 4 * gru_hidden.
  int gru_hidden = 32;
  int char_dim = 32;
  // 0 means 4 * hidden.
  int ffn_hidden = 0;
  std::vector<int> filter_windows = {2, 3};
  double dropout = 0.1;
  int max_positions = kDefaultMaxLen;
  int vocab_size = kDefaultVocabSize;
  int char_vocab_size = kCharVocabSize;

  int ffn_width() const { return ffn_hidden > 0 ? ffn_hidden : 4 * hidden; }
  // Filters per window; together they add up to `hidden`.
  std::vector<int> FilterCounts() const;
  // Throws InvalidArgument.
  void Validate() const;

  nlohmann::json ToJson() const;
  static EncoderConfig FromJson(const nlohmann::json& j);
};

template <typename T>
struct TransformerParams {
  Tensor<T> ln1_gamma, ln1_beta;
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<T> ln2_gamma, ln2_beta;
  Tensor<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

// The fuse-then-divide block run after every transformer layer.
template <typename T>
struct InteractionParams {
  Tensor<T> token_w, token_b;
  Tensor<T> char_w, char_b;
  // One (window, 2C, filters) kernel per window size.
  std::vector<Tensor<T>> fuse_w, fuse_b;
  Tensor<T> divide_token_w, divide_token_b;
  Tensor<T> divide_char_w, divide_char_b;
  Tensor<T> token_ln_gamma, token_ln_beta;
  Tensor<T> char_ln_gamma, char_ln_beta;
};

template <typename T>
struct GruParams {
  Tensor<T> w_in, b_in, w_rec, b_rec;
};

template <typename T>
struct EncoderParams {
  Tensor<T> token_embedding, position_embedding;
  Tensor<T> embed_ln_gamma, embed_ln_beta;
  Tensor<T> char_embedding;
  Tensor<T> char_embed_ln_gamma, char_embed_ln_beta;
  GruParams<T> gru_forward, gru_backward;
  Tensor<T> char_proj_w, char_proj_b;
  Tensor<T> char_ln_gamma, char_ln_beta;
  std::vector<TransformerParams<T>> layers;
  std::vector<InteractionParams<T>> interactions;

  // Truncated normal (sigma 0.02) for matrices and embeddings, orthogonal
  // blocks for GRU recurrent weights, zero biases, unit LayerNorm gains.
  static EncoderParams Init(const EncoderConfig& config, Rng& rng);
  // Stable names in a fixed order, e.g. "encoder.layer.3.wq".
  NamedTensors<T> Named() const;
};

// Dropout switch and mask source for one forward pass.
struct ForwardMode {
  bool training = false;
  Rng* rng = nullptr;
};

// Row j is the char_embedding row of char_ids[j]. Throws IdOutOfRange.
// The GRU consumes these rows after NormalizeCharEmbeddings.
template <typename T>
Tensor<T> EmbedChars(const EncoderParams<T>& params,
                     std::span<const int32_t> char_ids);

// Affine LayerNorm over the character embedding width.
template <typename T>
Tensor<T> NormalizeCharEmbeddings(const EncoderParams<T>& params,
                                  const Tensor<T>& e);

// Bidirectional GRU over the first `length` rows of e; later rows get zero
// states. Output (rows, 2g) as [forward | backward].
template <typename T>
Tensor<T> BiGru(const EncoderParams<T>& params, const Tensor<T>& e,
                int64_t length);

// Projects [h(first char); h(last char)] of every span to the hidden width,
// then applies the character-channel LayerNorm. Throws EmptySpan.
template <typename T>
Tensor<T> CharTokenEmbed(const EncoderParams<T>& params, const Tensor<T>& h,
                         std::span<const TokenSpan> spans);

// Pre-norm multi-head self-attention and feed-forward block. Keys with
// valid[j] == 0 are masked out.
template <typename T>
Tensor<T> TransformerLayer(const TransformerParams<T>& layer,
                           const EncoderConfig& config, const Tensor<T>& x,
                           std::span<const uint8_t> valid, ForwardMode mode);

template <typename T>
struct ChannelPair {
  Tensor<T> token;
  Tensor<T> chars;
};

// Channel transforms, convolutional fusion over positions (masked rows are
// zeroed first), GELU division, residual and LayerNorm.
template <typename T>
ChannelPair<T> HeterogeneousInteraction(const InteractionParams<T>& block,
                                        const Tensor<T>& t, const Tensor<T>& h,
                                        std::span<const uint8_t> valid,
                                        double dropout, ForwardMode mode);

// Token and character representations after every layer, lowest first.
template <typename T>
struct DualChannelOutput {
  std::vector<Tensor<T>> token;
  std::vector<Tensor<T>> chars;
  // Rows carried by each tensor.
  int64_t rows = 0;
};

// With `trim`, only the CLS..SEP rows are encoded; PAD rows would not
// influence them anyway.
template <typename T>
DualChannelOutput<T> Encode(const TokenSequence& seq,
                            const EncoderParams<T>& params,
                            const EncoderConfig& config, ForwardMode mode,
                            bool trim = true);

}  // namespace pma

#endif  // PMA_ENCODER_H_
