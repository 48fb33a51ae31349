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

#include <cmath>
#include <utility>

#include "pma/errors.h"
#include "pma/ops.h"

namespace pma {
namespace {

constexpr double kInitStd = 0.02;
constexpr double kLayerNormEps = 1e-12;

template <typename T>
Tensor<T> TruncatedNormal(Shape shape, Rng& rng) {
  std::vector<T> data(static_cast<size_t>(NumElements(shape)));
  for (T& v : data) {
    double z;
    do {
      z = rng.Normal();
    } while (std::abs(z) > 2.0);
    v = static_cast<T>(z * kInitStd);
  }
  return Tensor<T>::FromData(std::move(shape), std::move(data), true);
}

template <typename T>
Tensor<T> ZerosParam(Shape shape) {
  return Tensor<T>::Zeros(std::move(shape), true);
}

template <typename T>
Tensor<T> OnesParam(Shape shape) {
  return Tensor<T>::Full(std::move(shape), T(1), true);
}

// Gram-Schmidt on a Gaussian matrix.
std::vector<double> OrthogonalBlock(int64_t n, Rng& rng) {
  std::vector<double> q(static_cast<size_t>(n * n));
  for (double& v : q) v = rng.Normal();
  for (int64_t i = 0; i < n; ++i) {
    double* row = q.data() + i * n;
    for (int64_t j = 0; j < i; ++j) {
      const double* prev = q.data() + j * n;
      double dot = 0;
      for (int64_t k = 0; k < n; ++k) dot += row[k] * prev[k];
      for (int64_t k = 0; k < n; ++k) row[k] -= dot * prev[k];
    }
    double norm = 0;
    for (int64_t k = 0; k < n; ++k) norm += row[k] * row[k];
    norm = std::sqrt(norm);
    for (int64_t k = 0; k < n; ++k) row[k] /= norm;
  }
  return q;
}

// (g, 3g) made of three orthogonal g x g blocks side by side.
template <typename T>
Tensor<T> RecurrentInit(int64_t g, Rng& rng) {
  std::vector<T> data(static_cast<size_t>(g * 3 * g));
  for (int64_t block = 0; block < 3; ++block) {
    std::vector<double> q = OrthogonalBlock(g, rng);
    for (int64_t i = 0; i < g; ++i)
      for (int64_t j = 0; j < g; ++j)
        data[static_cast<size_t>(i * 3 * g + block * g + j)] =
            static_cast<T>(q[static_cast<size_t>(i * g + j)]);
  }
  return Tensor<T>::FromData({g, 3 * g}, std::move(data), true);
}

template <typename T>
GruParams<T> InitGru(int64_t in, int64_t g, Rng& rng) {
  GruParams<T> p;
  p.w_in = TruncatedNormal<T>({in, 3 * g}, rng);
  p.b_in = ZerosParam<T>({3 * g});
  p.w_rec = RecurrentInit<T>(g, rng);
  p.b_rec = ZerosParam<T>({3 * g});
  return p;
}

template <typename T>
Tensor<T> Affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  return Add(MatMul(x, w), b);
}

template <typename T>
Tensor<T> AffineLayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                          const Tensor<T>& beta) {
  return Add(Mul(LayerNorm(x, -1, kLayerNormEps), gamma), beta);
}

template <typename T>
Tensor<T> MaybeDropout(const Tensor<T>& x, double rate, ForwardMode mode) {
  if (!mode.training || rate == 0.0) return x;
  if (mode.rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "training forward needs an rng");
  }
  return Dropout(x, rate, *mode.rng, true);
}

bool AllValid(std::span<const uint8_t> valid) {
  for (uint8_t v : valid)
    if (v == 0) return false;
  return true;
}

template <typename T>
Tensor<T> ZeroInvalidRows(const Tensor<T>& x, std::span<const uint8_t> valid) {
  if (valid.empty() || AllValid(valid)) return x;
  std::vector<T> mask(valid.size());
  for (size_t i = 0; i < valid.size(); ++i) mask[i] = valid[i] ? T(1) : T(0);
  return Mul(x, Tensor<T>::FromData({static_cast<int64_t>(valid.size()), 1},
                                    std::move(mask)));
}

template <typename T>
void VisitParams(const EncoderParams<T>& p,
                 const std::function<void(const std::string&, const Tensor<T>&)>& f) {
  f("encoder.token_embedding", p.token_embedding);
  f("encoder.position_embedding", p.position_embedding);
  f("encoder.embed_ln.gamma", p.embed_ln_gamma);
  f("encoder.embed_ln.beta", p.embed_ln_beta);
  f("encoder.char_embedding", p.char_embedding);
  f("encoder.char_embed_ln.gamma", p.char_embed_ln_gamma);
  f("encoder.char_embed_ln.beta", p.char_embed_ln_beta);
  for (const auto& [name, gru] :
       {std::pair{"forward", &p.gru_forward}, std::pair{"backward", &p.gru_backward}}) {
    std::string prefix = std::string("encoder.gru.") + name;
    f(prefix + ".w_in", gru->w_in);
    f(prefix + ".b_in", gru->b_in);
    f(prefix + ".w_rec", gru->w_rec);
    f(prefix + ".b_rec", gru->b_rec);
  }
  f("encoder.char_proj.w", p.char_proj_w);
  f("encoder.char_proj.b", p.char_proj_b);
  f("encoder.char_ln.gamma", p.char_ln_gamma);
  f("encoder.char_ln.beta", p.char_ln_beta);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const std::string prefix = "encoder.layer." + std::to_string(l) + ".";
    const TransformerParams<T>& t = p.layers[l];
    f(prefix + "ln1.gamma", t.ln1_gamma);
    f(prefix + "ln1.beta", t.ln1_beta);
    f(prefix + "wq", t.wq);
    f(prefix + "bq", t.bq);
    f(prefix + "wk", t.wk);
    f(prefix + "bk", t.bk);
    f(prefix + "wv", t.wv);
    f(prefix + "bv", t.bv);
    f(prefix + "wo", t.wo);
    f(prefix + "bo", t.bo);
    f(prefix + "ln2.gamma", t.ln2_gamma);
    f(prefix + "ln2.beta", t.ln2_beta);
    f(prefix + "ffn.w1", t.ffn_w1);
    f(prefix + "ffn.b1", t.ffn_b1);
    f(prefix + "ffn.w2", t.ffn_w2);
    f(prefix + "ffn.b2", t.ffn_b2);
    const InteractionParams<T>& x = p.interactions[l];
    f(prefix + "interact.token.w", x.token_w);
    f(prefix + "interact.token.b", x.token_b);
    f(prefix + "interact.char.w", x.char_w);
    f(prefix + "interact.char.b", x.char_b);
    for (size_t j = 0; j < x.fuse_w.size(); ++j) {
      f(prefix + "interact.fuse." + std::to_string(j) + ".w", x.fuse_w[j]);
      f(prefix + "interact.fuse." + std::to_string(j) + ".b", x.fuse_b[j]);
    }
    f(prefix + "interact.divide_token.w", x.divide_token_w);
    f(prefix + "interact.divide_token.b", x.divide_token_b);
    f(prefix + "interact.divide_char.w", x.divide_char_w);
    f(prefix + "interact.divide_char.b", x.divide_char_b);
    f(prefix + "interact.token_ln.gamma", x.token_ln_gamma);
    f(prefix + "interact.token_ln.beta", x.token_ln_beta);
    f(prefix + "interact.char_ln.gamma", x.char_ln_gamma);
    f(prefix + "interact.char_ln.beta", x.char_ln_beta);
  }
}

}  // namespace

std::vector<int> EncoderConfig::FilterCounts() const {
  std::vector<int> counts;
  const int n = static_cast<int>(filter_windows.size());
  for (int j = 0; j < n; ++j) counts.push_back(hidden / n + (j < hidden % n ? 1 : 0));
  return counts;
}

void EncoderConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "encoder config: " + what);
  };
  if (n_layers < 1) fail("n_layers must be >= 1");
  if (hidden < 1 || n_heads < 1 || gru_hidden < 1 || char_dim < 1) {
    fail("sizes must be positive");
  }
  if (hidden % n_heads != 0) {
    fail("hidden " + std::to_string(hidden) + " not divisible by n_heads " +
         std::to_string(n_heads));
  }
  if (filter_windows.empty() ||
      static_cast<int>(filter_windows.size()) > hidden) {
    fail("need between 1 and hidden filter windows");
  }
  for (int s : filter_windows)
    if (s < 1) fail("filter windows must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (max_positions < 3) fail("max_positions must be >= 3");
  if (vocab_size < kBaseVocabSize) fail("vocab_size below the byte alphabet");
  if (char_vocab_size < kCharVocabSize) fail("char_vocab_size too small");
}

nlohmann::json EncoderConfig::ToJson() const {
  return {{"n_layers", n_layers},       {"hidden", hidden},
          {"n_heads", n_heads},         {"gru_hidden", gru_hidden},
          {"char_dim", char_dim},       {"ffn_hidden", ffn_width()},
          {"filter_windows", filter_windows},
          {"dropout", dropout},         {"max_positions", max_positions},
          {"vocab_size", vocab_size},   {"char_vocab_size", char_vocab_size}};
}

EncoderConfig EncoderConfig::FromJson(const nlohmann::json& j) {
  EncoderConfig c;
  c.n_layers = j.value("n_layers", c.n_layers);
  c.hidden = j.value("hidden", c.hidden);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.gru_hidden = j.value("gru_hidden", c.gru_hidden);
  c.char_dim = j.value("char_dim", c.char_dim);
  c.ffn_hidden = j.value("ffn_hidden", c.ffn_hidden);
  c.filter_windows = j.value("filter_windows", c.filter_windows);
  c.dropout = j.value("dropout", c.dropout);
  c.max_positions = j.value("max_positions", c.max_positions);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.char_vocab_size = j.value("char_vocab_size", c.char_vocab_size);
  c.Validate();
  return c;
}

template <typename T>
EncoderParams<T> EncoderParams<T>::Init(const EncoderConfig& config, Rng& rng) {
  config.Validate();
  const int64_t c = config.hidden;
  const int64_t g = config.gru_hidden;
  const int64_t ffn = config.ffn_width();
  EncoderParams p;
  p.token_embedding = TruncatedNormal<T>({config.vocab_size, c}, rng);
  p.position_embedding = TruncatedNormal<T>({config.max_positions, c}, rng);
  p.embed_ln_gamma = OnesParam<T>({c});
  p.embed_ln_beta = ZerosParam<T>({c});
  p.char_embedding = TruncatedNormal<T>({config.char_vocab_size, config.char_dim}, rng);
  p.char_embed_ln_gamma = OnesParam<T>({config.char_dim});
  p.char_embed_ln_beta = ZerosParam<T>({config.char_dim});
  p.gru_forward = InitGru<T>(config.char_dim, g, rng);
  p.gru_backward = InitGru<T>(config.char_dim, g, rng);
  p.char_proj_w = TruncatedNormal<T>({4 * g, c}, rng);
  p.char_proj_b = ZerosParam<T>({c});
  p.char_ln_gamma = OnesParam<T>({c});
  p.char_ln_beta = ZerosParam<T>({c});
  const std::vector<int> filters = config.FilterCounts();
  for (int l = 0; l < config.n_layers; ++l) {
    TransformerParams<T> t;
    t.ln1_gamma = OnesParam<T>({c});
    t.ln1_beta = ZerosParam<T>({c});
    t.wq = TruncatedNormal<T>({c, c}, rng);
    t.bq = ZerosParam<T>({c});
    t.wk = TruncatedNormal<T>({c, c}, rng);
    t.bk = ZerosParam<T>({c});
    t.wv = TruncatedNormal<T>({c, c}, rng);
    t.bv = ZerosParam<T>({c});
    t.wo = TruncatedNormal<T>({c, c}, rng);
    t.bo = ZerosParam<T>({c});
    t.ln2_gamma = OnesParam<T>({c});
    t.ln2_beta = ZerosParam<T>({c});
    t.ffn_w1 = TruncatedNormal<T>({c, ffn}, rng);
    t.ffn_b1 = ZerosParam<T>({ffn});
    t.ffn_w2 = TruncatedNormal<T>({ffn, c}, rng);
    t.ffn_b2 = ZerosParam<T>({c});
    p.layers.push_back(std::move(t));

    InteractionParams<T> x;
    x.token_w = TruncatedNormal<T>({c, c}, rng);
    x.token_b = ZerosParam<T>({c});
    x.char_w = TruncatedNormal<T>({c, c}, rng);
    x.char_b = ZerosParam<T>({c});
    for (size_t j = 0; j < filters.size(); ++j) {
      x.fuse_w.push_back(
          TruncatedNormal<T>({config.filter_windows[j], 2 * c, filters[j]}, rng));
      x.fuse_b.push_back(ZerosParam<T>({filters[j]}));
    }
    x.divide_token_w = TruncatedNormal<T>({c, c}, rng);
    x.divide_token_b = ZerosParam<T>({c});
    x.divide_char_w = TruncatedNormal<T>({c, c}, rng);
    x.divide_char_b = ZerosParam<T>({c});
    x.token_ln_gamma = OnesParam<T>({c});
    x.token_ln_beta = ZerosParam<T>({c});
    x.char_ln_gamma = OnesParam<T>({c});
    x.char_ln_beta = ZerosParam<T>({c});
    p.interactions.push_back(std::move(x));
  }
  return p;
}

template <typename T>
NamedTensors<T> EncoderParams<T>::Named() const {
  NamedTensors<T> out;
  VisitParams<T>(*this, [&out](const std::string& name, const Tensor<T>& t) {
    out.emplace_back(name, t);
  });
  return out;
}

template <typename T>
Tensor<T> EmbedChars(const EncoderParams<T>& params,
                     std::span<const int32_t> char_ids) {
  return EmbeddingLookup(params.char_embedding, char_ids);
}

template <typename T>
Tensor<T> NormalizeCharEmbeddings(const EncoderParams<T>& params,
                                  const Tensor<T>& e) {
  return AffineLayerNorm(e, params.char_embed_ln_gamma, params.char_embed_ln_beta);
}

template <typename T>
Tensor<T> BiGru(const EncoderParams<T>& params, const Tensor<T>& e,
                int64_t length) {
  const int64_t rows = e.dim(0);
  const int64_t g = params.gru_forward.w_rec.dim(0);
  if (length < 0 || length > rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "gru length " + std::to_string(length) + " outside [0, " +
                    std::to_string(rows) + "]");
  }
  if (length == 0) return Tensor<T>::Zeros({rows, 2 * g});
  Tensor<T> real = length == rows ? e : Slice(e, 0, 0, length);
  const GruParams<T>& fw = params.gru_forward;
  const GruParams<T>& bw = params.gru_backward;
  Tensor<T> forward = GruScan(Affine(real, fw.w_in, fw.b_in), fw.w_rec, fw.b_rec, false);
  Tensor<T> backward = GruScan(Affine(real, bw.w_in, bw.b_in), bw.w_rec, bw.b_rec, true);
  std::vector<Tensor<T>> halves = {forward, backward};
  Tensor<T> h = Concat<T>(halves, 1);
  if (length == rows) return h;
  std::vector<Tensor<T>> parts = {h, Tensor<T>::Zeros({rows - length, 2 * g})};
  return Concat<T>(parts, 0);
}

template <typename T>
Tensor<T> CharTokenEmbed(const EncoderParams<T>& params, const Tensor<T>& h,
                         std::span<const TokenSpan> spans) {
  std::vector<int32_t> first;
  std::vector<int32_t> last;
  first.reserve(spans.size());
  last.reserve(spans.size());
  for (size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].length <= 0) {
      throw Error(ErrorCode::kEmptySpan,
                  "token " + std::to_string(i) + " has an empty character span");
    }
    first.push_back(spans[i].start);
    last.push_back(spans[i].start + spans[i].length - 1);
  }
  std::vector<Tensor<T>> ends = {EmbeddingLookup(h, std::span<const int32_t>(first)),
                                 EmbeddingLookup(h, std::span<const int32_t>(last))};
  return AffineLayerNorm(Affine(Concat<T>(ends, 1), params.char_proj_w, params.char_proj_b),
                         params.char_ln_gamma, params.char_ln_beta);
}

template <typename T>
Tensor<T> TransformerLayer(const TransformerParams<T>& layer,
                           const EncoderConfig& config, const Tensor<T>& x,
                           std::span<const uint8_t> valid, ForwardMode mode) {
  const int64_t m = x.dim(0);
  const int64_t c = x.dim(1);
  const int64_t heads = config.n_heads;
  const int64_t d = c / heads;
  std::vector<uint8_t> all_valid;
  if (valid.empty()) {
    all_valid.assign(static_cast<size_t>(m), 1);
    valid = all_valid;
  }
  if (static_cast<int64_t>(valid.size()) != m) {
    throw Error(ErrorCode::kShapeMismatch, "attention mask length " +
                                               std::to_string(valid.size()) +
                                               " != rows " + std::to_string(m));
  }
  Tensor<T> normed = AffineLayerNorm(x, layer.ln1_gamma, layer.ln1_beta);
  auto split_heads = [&](const Tensor<T>& t) {
    return Permute(Reshape(t, {m, heads, d}), {1, 0, 2});
  };
  Tensor<T> q = split_heads(Affine(normed, layer.wq, layer.bq));
  Tensor<T> k = split_heads(Affine(normed, layer.wk, layer.bk));
  Tensor<T> v = split_heads(Affine(normed, layer.wv, layer.bv));
  Tensor<T> scores = Scale(MatMul(q, k, true), 1.0 / std::sqrt(static_cast<double>(d)));
  Tensor<T> probs = MaskedSoftmax(scores, valid);
  Tensor<T> context = Reshape(Permute(MatMul(probs, v), {1, 0, 2}), {m, c});
  Tensor<T> attended = MaybeDropout(Affine(context, layer.wo, layer.bo), config.dropout, mode);
  Tensor<T> residual = Add(x, attended);
  Tensor<T> hidden = Gelu(Affine(AffineLayerNorm(residual, layer.ln2_gamma, layer.ln2_beta),
                                 layer.ffn_w1, layer.ffn_b1));
  Tensor<T> ffn = MaybeDropout(Affine(hidden, layer.ffn_w2, layer.ffn_b2), config.dropout, mode);
  return Add(residual, ffn);
}

template <typename T>
ChannelPair<T> HeterogeneousInteraction(const InteractionParams<T>& block,
                                        const Tensor<T>& t, const Tensor<T>& h,
                                        std::span<const uint8_t> valid,
                                        double dropout, ForwardMode mode) {
  if (t.shape() != h.shape() || t.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "interaction channels " + ShapeString(t.shape()) + " and " +
                    ShapeString(h.shape()) + " differ");
  }
  Tensor<T> t_prime = Affine(t, block.token_w, block.token_b);
  Tensor<T> h_prime = Affine(h, block.char_w, block.char_b);
  std::vector<Tensor<T>> both = {t_prime, h_prime};
  Tensor<T> fused_in = ZeroInvalidRows(Concat<T>(both, 1), valid);
  std::vector<Tensor<T>> filters;
  for (size_t j = 0; j < block.fuse_w.size(); ++j) {
    const int window = static_cast<int>(block.fuse_w[j].dim(0));
    filters.push_back(Add(Conv1d(fused_in, block.fuse_w[j], 1, ConvPadding::Same(window)),
                          block.fuse_b[j]));
  }
  Tensor<T> fused = Tanh(Concat<T>(filters, 1));
  Tensor<T> token_out = MaybeDropout(
      Gelu(Affine(fused, block.divide_token_w, block.divide_token_b)), dropout, mode);
  Tensor<T> char_out = MaybeDropout(
      Gelu(Affine(fused, block.divide_char_w, block.divide_char_b)), dropout, mode);
  return {AffineLayerNorm(Add(t, token_out), block.token_ln_gamma, block.token_ln_beta),
          AffineLayerNorm(Add(h, char_out), block.char_ln_gamma, block.char_ln_beta)};
}

template <typename T>
DualChannelOutput<T> Encode(const TokenSequence& seq,
                            const EncoderParams<T>& params,
                            const EncoderConfig& config, ForwardMode mode,
                            bool trim) {
  const int64_t m = trim ? seq.length : seq.size();
  const int64_t chars = trim ? seq.char_length : seq.char_size();
  if (m < 1 || m > config.max_positions) {
    throw Error(ErrorCode::kInvalidArgument,
                "sequence of " + std::to_string(m) + " tokens outside [1, " +
                    std::to_string(config.max_positions) + "]");
  }
  std::span<const int32_t> ids(seq.subword_ids.data(), static_cast<size_t>(m));
  std::span<const int32_t> char_ids(seq.char_ids.data(), static_cast<size_t>(chars));
  std::span<const TokenSpan> spans(seq.spans.data(), static_cast<size_t>(m));
  std::vector<uint8_t> valid(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) valid[static_cast<size_t>(i)] = ids[static_cast<size_t>(i)] != kPadId;

  std::vector<int32_t> positions(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) positions[static_cast<size_t>(i)] = static_cast<int32_t>(i);
  Tensor<T> token = Add(EmbeddingLookup(params.token_embedding, ids),
                        EmbeddingLookup(params.position_embedding,
                                        std::span<const int32_t>(positions)));
  token = MaybeDropout(AffineLayerNorm(token, params.embed_ln_gamma, params.embed_ln_beta),
                       config.dropout, mode);

  Tensor<T> e = NormalizeCharEmbeddings(params, EmbedChars(params, char_ids));
  Tensor<T> h = BiGru(params, e, trim ? chars : std::min<int64_t>(chars, seq.char_length));
  Tensor<T> char_channel = MaybeDropout(CharTokenEmbed(params, h, spans), config.dropout, mode);

  DualChannelOutput<T> out;
  out.rows = m;
  for (int l = 0; l < config.n_layers; ++l) {
    Tensor<T> t = TransformerLayer(params.layers[static_cast<size_t>(l)], config, token,
                                   valid, mode);
    ChannelPair<T> pair = HeterogeneousInteraction(
        params.interactions[static_cast<size_t>(l)], t, char_channel, valid,
        config.dropout, mode);
    token = pair.token;
    char_channel = pair.chars;
    out.token.push_back(token);
    out.chars.push_back(char_channel);
  }
  return out;
}

#define PMA_INSTANTIATE_ENCODER(T)                                             \
  template struct EncoderParams<T>;                                           \
  template Tensor<T> EmbedChars(const EncoderParams<T>&,                      \
                                std::span<const int32_t>);                    \
  template Tensor<T> NormalizeCharEmbeddings(const EncoderParams<T>&,         \
                                             const Tensor<T>&);               \
  template Tensor<T> BiGru(const EncoderParams<T>&, const Tensor<T>&,         \
                           int64_t);                                          \
  template Tensor<T> CharTokenEmbed(const EncoderParams<T>&, const Tensor<T>&,\
                                    std::span<const TokenSpan>);              \
  template Tensor<T> TransformerLayer(const TransformerParams<T>&,            \
                                      const EncoderConfig&, const Tensor<T>&, \
                                      std::span<const uint8_t>, ForwardMode); \
  template ChannelPair<T> HeterogeneousInteraction(                           \
      const InteractionParams<T>&, const Tensor<T>&, const Tensor<T>&,        \
      std::span<const uint8_t>, double, ForwardMode);                         \
  template DualChannelOutput<T> Encode(const TokenSequence&,                  \
                                       const EncoderParams<T>&,               \
                                       const EncoderConfig&, ForwardMode, bool);

PMA_INSTANTIATE_ENCODER(float)
PMA_INSTANTIATE_ENCODER(double)

#undef PMA_INSTANTIATE_ENCODER

}  // namespace pma
