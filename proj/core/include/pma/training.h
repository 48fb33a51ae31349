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

#ifndef PMA_TRAINING_H_
#define PMA_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pma/dataset.h"
#include "pma/metrics.h"
#include "pma/model.h"
#include "pma/tokenizer.h"

namespace pma {

enum class Precision { kFloat32, kFloat64 };

struct TrainConfig {
  int batch_size = 64;
  double lr = 2e-5;
  double weight_decay = 1e-4;
  int epochs = 5;
  uint64_t seed = 0;
  // Validation cadence: every eval_every steps when positive, otherwise
  // evals_per_epoch evenly spaced points per epoch.
  int64_t eval_every = 0;
  int evals_per_epoch = 1;
  // Stops after this many optimizer steps when positive.
  int64_t max_steps = 0;
  // Inverse-frequency loss weights; off by default.
  bool class_weights = false;
  Precision precision = Precision::kFloat32;
  // Validation workers; not part of the serialized config.
  int eval_threads = 1;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

// Model and training settings as one named bundle. Dropout and the sequence
// length live in the model half.
struct Preset {
  std::string name;
  ModelConfig model;
  TrainConfig train;
  int vocab_size = 4096;

  // "paper": C=768, 12 heads, lr 2e-5. "desk": C=64, 4 heads, lr 1e-3.
  // Both: batch 64, weight decay 1e-4, 5 epochs, dropout 0.1, W=200, N=12.
  static Preset Named(const std::string& name);
  // key=value; throws InvalidArgument naming the key when it is unknown or
  // the value does not parse.
  void ApplyOverride(const std::string& assignment);
  void SetDropout(double rate);
  nlohmann::json ToJson() const;
};

struct Example {
  TokenSequence tokens;  // trimmed
  int32_t label = 0;
};

std::vector<Example> MakeExamples(std::span<const UrlRecord> records, const Vocab& vocab,
                                  int max_len);

struct StepRecord {
  int64_t step = 0;
  int epoch = 0;
  // Mean loss of the batch before the update.
  double loss = 0.0;
  double lr = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  // Binary view: malicious score is 1 - p(class 0).
  Metrics metrics;
  std::optional<MultiClassMetrics> multi;
  std::vector<double> scores;
  std::vector<int32_t> labels;
};

struct EvalRecord {
  int64_t step = 0;
  double epoch = 0.0;
  EvalResult result;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  // Index into evals of the minimum validation loss; -1 before any eval.
  int best = -1;
  std::filesystem::path best_checkpoint;

  nlohmann::json EvalJson(size_t index) const;
};

struct TrainHooks {
  // Return false to stop after this step.
  std::function<bool(const StepRecord&)> after_step;
  std::function<void(const EvalRecord&, bool is_best)> after_eval;
};

// Eval mode, one sample at a time, split over `threads` read-only workers.
// Results do not depend on the thread count or on the order of `data`.
template <typename T>
EvalResult Evaluate(const Model<T>& model, std::span<const Example> data,
                    double threshold = 0.5, int threads = 1);

// Shuffled mini-batches for cfg.epochs, one AdamW step per batch with the
// batch-mean gradient. On return the model holds the parameters of the best
// validation point. With a non-empty run_dir writes train.log,
// val_metrics.jsonl and best.ckpt there.
template <typename T>
TrainLog Fit(Model<T>& model, std::span<const Example> train,
             std::span<const Example> val, const TrainConfig& config,
             const std::filesystem::path& run_dir = {}, const TrainHooks& hooks = {});

struct AblationRow {
  int layers = 0;
  double val_loss = 0.0;
  Metrics metrics;
};

// One fit and evaluation per layer count, each from the same seed.
std::vector<AblationRow> LayerAblation(const Preset& preset, std::span<const Example> train,
                                       std::span<const Example> val,
                                       std::span<const Example> test,
                                       std::span<const int> layer_counts,
                                       const std::function<void(const AblationRow&)>& progress = {});
// "layers,accuracy,precision,recall,f1,auc" then one row per count.
std::string AblationCsv(std::span<const AblationRow> rows);

}  // namespace pma

#endif  // PMA_TRAINING_H_
