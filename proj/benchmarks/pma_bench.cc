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


#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "pma/model.h"
#include "pma/ops.h"
#include "pma/rng.h"
#include "pma/synth.h"
#include "pma/tokenizer.h"
#include "pma/training.h"

namespace pma {
namespace {

Tensor<float> RandomMatrix(int64_t rows, int64_t cols, Rng& rng) {
  std::vector<float> v(static_cast<size_t>(rows * cols));
  for (float& x : v) x = static_cast<float>(rng.Normal());
  return Tensor<float>::FromData({rows, cols}, std::move(v));
}

void BM_MatMul(benchmark::State& state) {
  const int64_t n = state.range(0);
  Rng rng(1);
  Tensor<float> a = RandomMatrix(n, n, rng);
  Tensor<float> b = RandomMatrix(n, n, rng);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(MatMul(a, b).data().data());
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(128)->Arg(256);

std::vector<std::string> Corpus(int64_t n) {
  std::vector<std::string> urls;
  for (const UrlRecord& r : SynthesizeCorpus({n, 0.5, 4})) urls.push_back(r.url);
  return urls;
}

const Vocab& SharedVocab() {
  static const Vocab vocab = [] {
    std::vector<std::string> urls = Corpus(4000);
    return TrainBpe(urls, 4096);
  }();
  return vocab;
}

void BM_BpeEncode(benchmark::State& state) {
  const Vocab& vocab = SharedVocab();
  std::vector<std::string> urls = Corpus(256);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Encode(urls[i++ % urls.size()], vocab, 200).length);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BpeEncode);

void BM_BpeTrain(benchmark::State& state) {
  std::vector<std::string> urls = Corpus(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(TrainBpe(urls, 1024).size());
}
BENCHMARK(BM_BpeTrain)->Arg(2000)->Unit(benchmark::kMillisecond);

Model<float> DeskModel() {
  Preset preset = Preset::Named("desk");
  preset.model.encoder.vocab_size = SharedVocab().size();
  return Model<float>::Init(preset.model, 1);
}

void BM_ModelForward(benchmark::State& state) {
  Model<float> model = DeskModel();
  TokenSequence seq =
      Encode("http://secure-login.paypal.com.account-verify.tk/webscr?cmd=_login", SharedVocab(),
             200)
          .Trimmed();
  NoGradGuard no_grad;
  for (auto _ : state) {
    auto out = model.Forward(std::span<const TokenSequence>(&seq, 1), {});
    benchmark::DoNotOptimize(out.prediction.probs.data().data());
  }
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

void BM_TrainSample(benchmark::State& state) {
  Model<float> model = DeskModel();
  TokenSequence seq =
      Encode("http://secure-login.paypal.com.account-verify.tk/webscr?cmd=_login", SharedVocab(),
             200)
          .Trimmed();
  Rng rng(3);
  for (auto _ : state) {
    auto out = model.Forward(std::span<const TokenSequence>(&seq, 1), {true, &rng});
    const int32_t label = 1;
    Tensor<float> loss = CrossEntropyWithLogits(out.prediction.logits, std::span(&label, 1));
    benchmark::DoNotOptimize(Backward(loss).size());
  }
}
BENCHMARK(BM_TrainSample)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pma

BENCHMARK_MAIN();
