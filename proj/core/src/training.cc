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

#include "pma/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "pma/errors.h"
#include "pma/ops.h"
#include "pma/optim.h"
#include "pma/rng.h"

namespace pma {
namespace {

[[noreturn]] void BadOverride(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "override '" + key + "': " + why);
}

int64_t ParseInt(const std::string& key, const std::string& value) {
  size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    BadOverride(key, "'" + value + "' is not an integer");
  }
  if (used != value.size()) BadOverride(key, "'" + value + "' is not an integer");
  return v;
}

double ParseDouble(const std::string& key, const std::string& value) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    BadOverride(key, "'" + value + "' is not a number");
  }
  if (used != value.size()) BadOverride(key, "'" + value + "' is not a number");
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  BadOverride(key, "'" + value + "' is not a boolean");
}

std::string PrecisionName(Precision p) { return p == Precision::kFloat64 ? "f64" : "f32"; }

Precision ParsePrecision(const std::string& s) {
  if (s == "f32" || s == "float32") return Precision::kFloat32;
  if (s == "f64" || s == "float64") return Precision::kFloat64;
  throw Error(ErrorCode::kInvalidArgument, "precision must be f32 or f64, got '" + s + "'");
}

// Local step indices (1-based) within an epoch after which validation runs.
std::vector<int64_t> EvalPoints(int64_t steps_per_epoch, int evals_per_epoch) {
  std::vector<int64_t> points;
  for (int k = 1; k <= evals_per_epoch; ++k) {
    int64_t p = (static_cast<int64_t>(k) * steps_per_epoch + evals_per_epoch / 2) / evals_per_epoch;
    p = std::clamp<int64_t>(p, 1, steps_per_epoch);
    if (points.empty() || points.back() != p) points.push_back(p);
  }
  return points;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "train config: " + what);
  };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr must be a non-negative number");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (evals_per_epoch < 1) fail("evals_per_epoch must be >= 1");
  if (eval_every < 0 || max_steps < 0) fail("eval_every and max_steps must be >= 0");
  if (eval_threads < 1) fail("eval_threads must be >= 1");
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"batch_size", batch_size},   {"lr", lr},
          {"weight_decay", weight_decay}, {"epochs", epochs},
          {"seed", seed},               {"eval_every", eval_every},
          {"evals_per_epoch", evals_per_epoch}, {"max_steps", max_steps},
          {"class_weights", class_weights}, {"precision", PrecisionName(precision)}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<int>();
  c.lr = j.at("lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.eval_every = j.at("eval_every").get<int64_t>();
  c.evals_per_epoch = j.at("evals_per_epoch").get<int>();
  c.max_steps = j.at("max_steps").get<int64_t>();
  c.class_weights = j.at("class_weights").get<bool>();
  c.precision = ParsePrecision(j.at("precision").get<std::string>());
  c.Validate();
  return c;
}

Preset Preset::Named(const std::string& name) {
  Preset p;
  p.name = name;
  EncoderConfig& e = p.model.encoder;
  HeadConfig& h = p.model.head;
  e.n_layers = 12;
  e.max_positions = 200;
  h.layers_used = 12;
  h.seq_len = 200;
  h.reduction = 3;
  h.spp_levels = {1, 2, 4};
  p.train.batch_size = 64;
  p.train.weight_decay = 1e-4;
  p.train.epochs = 5;
  if (name == "paper") {
    e.hidden = 768;
    e.n_heads = 12;
    e.gru_hidden = 192;
    e.char_dim = 256;
    p.train.lr = 2e-5;
  } else if (name == "desk") {
    e.hidden = 64;
    e.n_heads = 4;
    e.gru_hidden = 32;
    e.char_dim = 32;
    p.train.lr = 1e-3;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown preset '" + name + "' (expected paper or desk)");
  }
  p.SetDropout(0.1);
  return p;
}

void Preset::SetDropout(double rate) {
  model.encoder.dropout = rate;
  model.head.dropout = rate;
}

void Preset::ApplyOverride(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kInvalidArgument, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  auto as_int = [&] { return static_cast<int>(ParseInt(key, value)); };
  EncoderConfig& e = model.encoder;
  HeadConfig& h = model.head;
  if (key == "batch_size") train.batch_size = as_int();
  else if (key == "lr") train.lr = ParseDouble(key, value);
  else if (key == "weight_decay") train.weight_decay = ParseDouble(key, value);
  else if (key == "epochs") train.epochs = as_int();
  else if (key == "seed") train.seed = static_cast<uint64_t>(ParseInt(key, value));
  else if (key == "eval_every") train.eval_every = ParseInt(key, value);
  else if (key == "evals_per_epoch") train.evals_per_epoch = as_int();
  else if (key == "max_steps") train.max_steps = ParseInt(key, value);
  else if (key == "class_weights") train.class_weights = ParseBool(key, value);
  else if (key == "precision") train.precision = ParsePrecision(value);
  else if (key == "dropout") SetDropout(ParseDouble(key, value));
  else if (key == "vocab_size") vocab_size = as_int();
  else if (key == "n_layers") e.n_layers = as_int();
  else if (key == "hidden") e.hidden = as_int();
  else if (key == "n_heads") e.n_heads = as_int();
  else if (key == "gru_hidden") e.gru_hidden = as_int();
  else if (key == "char_dim") e.char_dim = as_int();
  else if (key == "ffn_hidden") e.ffn_hidden = as_int();
  else if (key == "seq_len") e.max_positions = h.seq_len = as_int();
  else if (key == "layers") h.layers_used = as_int();
  else if (key == "reduction") h.reduction = as_int();
  else if (key == "num_classes") h.num_classes = as_int();
  else if (key == "selection") {
    if (value == "last") h.selection = LayerSelection::kLastK;
    else if (value == "even") h.selection = LayerSelection::kEvenlySpaced;
    else BadOverride(key, "expected last or even");
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown override key '" + key + "'");
  }
}

nlohmann::json Preset::ToJson() const {
  return {{"name", name}, {"model", model.ToJson()}, {"train", train.ToJson()},
          {"vocab_size", vocab_size}};
}

std::vector<Example> MakeExamples(std::span<const UrlRecord> records, const Vocab& vocab,
                                  int max_len) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const UrlRecord& r : records) {
    out.push_back({Encode(r.url, vocab, max_len).Trimmed(), r.label});
  }
  return out;
}

nlohmann::json TrainLog::EvalJson(size_t index) const {
  const EvalRecord& e = evals.at(index);
  nlohmann::json j = {{"step", e.step},
                      {"epoch", e.epoch},
                      {"val_loss", e.result.loss},
                      {"metrics", e.result.metrics.ToJson()},
                      {"best", static_cast<int>(index) == best}};
  if (e.result.multi) j["multiclass"] = e.result.multi->ToJson();
  return j;
}

template <typename T>
EvalResult Evaluate(const Model<T>& model, std::span<const Example> data, double threshold,
                    int threads) {
  if (data.empty()) throw Error(ErrorCode::kDataEmpty, "nothing to evaluate");
  const int k = model.config().head.num_classes;
  for (const Example& ex : data) {
    if (ex.label < 0 || ex.label >= k) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(ex.label));
    }
  }
  const size_t n = data.size();
  std::vector<double> probs(n * static_cast<size_t>(k));
  std::vector<double> losses(n);
  auto work = [&](size_t begin, size_t end) {
    NoGradGuard no_grad;
    for (size_t i = begin; i < end; ++i) {
      const Example& ex = data[i];
      auto out = model.Forward(std::span<const TokenSequence>(&ex.tokens, 1), {});
      std::span<const T> p = out.prediction.probs.data();
      std::span<const T> z = out.prediction.logits.data();
      // Log-sum-exp in double for the per-sample loss.
      double max_z = -std::numeric_limits<double>::infinity();
      for (T v : z) max_z = std::max(max_z, static_cast<double>(v));
      double sum = 0.0;
      for (T v : z) sum += std::exp(static_cast<double>(v) - max_z);
      losses[i] = max_z + std::log(sum) - static_cast<double>(z[static_cast<size_t>(ex.label)]);
      for (int c = 0; c < k; ++c) probs[i * static_cast<size_t>(k) + static_cast<size_t>(c)] = p[static_cast<size_t>(c)];
    }
  };
  const size_t workers = std::clamp<size_t>(static_cast<size_t>(std::max(threads, 1)), 1, n);
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(n * w / workers, n * (w + 1) / workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  EvalResult result;
  double loss_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    loss_sum += losses[i];
    result.scores.push_back(1.0 - probs[i * static_cast<size_t>(k)]);
    result.labels.push_back(data[i].label == 0 ? 0 : 1);
  }
  result.loss = loss_sum / static_cast<double>(n);
  result.metrics = ComputeMetrics(result.scores, result.labels, threshold);
  if (k > 2) {
    std::vector<int32_t> labels;
    for (const Example& ex : data) labels.push_back(ex.label);
    std::vector<std::string> names;
    for (int c = 0; c < k; ++c) names.push_back("class" + std::to_string(c));
    result.multi = ComputeMultiClassMetrics(probs, labels, names);
  }
  return result;
}

template <typename T>
TrainLog Fit(Model<T>& model, std::span<const Example> train, std::span<const Example> val,
             const TrainConfig& config, const std::filesystem::path& run_dir,
             const TrainHooks& hooks) {
  config.Validate();
  if (train.empty()) throw Error(ErrorCode::kDataEmpty, "training set is empty");
  if (val.empty()) throw Error(ErrorCode::kDataEmpty, "validation set is empty");
  const int k = model.config().head.num_classes;
  std::vector<double> class_weight(static_cast<size_t>(k), 1.0);
  {
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (const Example& ex : train) {
      if (ex.label < 0 || ex.label >= k) {
        throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(ex.label));
      }
      ++counts[static_cast<size_t>(ex.label)];
    }
    if (config.class_weights) {
      for (size_t c = 0; c < counts.size(); ++c) {
        class_weight[c] = counts[c] == 0 ? 0.0
                                         : static_cast<double>(train.size()) /
                                               (static_cast<double>(k) * static_cast<double>(counts[c]));
      }
    }
  }

  std::ofstream step_log;
  std::ofstream eval_log;
  if (!run_dir.empty()) {
    std::filesystem::create_directories(run_dir);
    step_log.open(run_dir / "train.log", std::ios::binary | std::ios::trunc);
    eval_log.open(run_dir / "val_metrics.jsonl", std::ios::binary | std::ios::trunc);
    if (!step_log || !eval_log) {
      throw Error(ErrorCode::kIo, "cannot write logs under '" + run_dir.string() + "'");
    }
    step_log << "step\tepoch\tloss\tlr\n";
  }

  std::vector<Tensor<T>> params = model.Parameters();
  AdamWOptions options;
  options.lr = config.lr;
  options.weight_decay = config.weight_decay;
  AdamWState<T> state(options, std::span<const Tensor<T>>(params));
  std::vector<std::vector<T>> grads(params.size());
  for (size_t i = 0; i < params.size(); ++i) grads[i].assign(params[i].size(), T(0));
  std::vector<std::vector<T>> best_params;

  const int64_t n = static_cast<int64_t>(train.size());
  const int64_t batch = config.batch_size;
  const int64_t steps_per_epoch = (n + batch - 1) / batch;
  const std::vector<int64_t> points = EvalPoints(steps_per_epoch, config.evals_per_epoch);
  const Rng shuffle_base(DeriveSeed(config.seed, "shuffle"));
  const Rng dropout_base(DeriveSeed(config.seed, "dropout"));

  TrainLog log;
  int64_t step = 0;
  bool stop = false;
  bool evaluated_last = false;
  auto run_eval = [&](int epoch, int64_t local) {
    EvalRecord record;
    record.step = step;
    record.epoch = epoch + static_cast<double>(local) / static_cast<double>(steps_per_epoch);
    record.result = Evaluate(model, val, 0.5, config.eval_threads);
    log.evals.push_back(std::move(record));
    const bool is_best = log.best < 0 ||
                         log.evals.back().result.loss < log.evals[static_cast<size_t>(log.best)].result.loss;
    if (is_best) {
      log.best = static_cast<int>(log.evals.size()) - 1;
      best_params.resize(params.size());
      for (size_t i = 0; i < params.size(); ++i) {
        best_params[i].assign(params[i].data().begin(), params[i].data().end());
      }
      if (!run_dir.empty()) {
        log.best_checkpoint = run_dir / "best.ckpt";
        model.Save(log.best_checkpoint);
      }
    }
    if (eval_log.is_open()) eval_log << log.EvalJson(log.evals.size() - 1).dump() << '\n' << std::flush;
    if (hooks.after_eval) hooks.after_eval(log.evals.back(), is_best);
    evaluated_last = true;
  };

  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    Rng shuffle = shuffle_base.Substream(static_cast<uint64_t>(epoch));
    shuffle.Shuffle(std::span<int64_t>(order));
    size_t next_point = 0;
    for (int64_t local = 1; local <= steps_per_epoch && !stop; ++local) {
      const int64_t begin = (local - 1) * batch;
      const int64_t end = std::min(n, begin + batch);
      ++step;
      Rng dropout = dropout_base.Substream(static_cast<uint64_t>(step));
      ForwardMode mode{true, &dropout};
      double weight_sum = 0.0;
      for (int64_t i = begin; i < end; ++i) {
        weight_sum += class_weight[static_cast<size_t>(train[static_cast<size_t>(order[static_cast<size_t>(i)])].label)];
      }
      for (auto& g : grads) std::fill(g.begin(), g.end(), T(0));
      double loss_sum = 0.0;
      for (int64_t i = begin; i < end && weight_sum > 0.0; ++i) {
        const Example& ex = train[static_cast<size_t>(order[static_cast<size_t>(i)])];
        const double w = class_weight[static_cast<size_t>(ex.label)] / weight_sum;
        if (w == 0.0) continue;
        Gradients<T> g;
        try {
          auto out = model.Forward(std::span<const TokenSequence>(&ex.tokens, 1), mode);
          Tensor<T> loss = CrossEntropyWithLogits(out.prediction.logits,
                                                  std::span<const int32_t>(&ex.label, 1));
          loss_sum += w * static_cast<double>(loss.item());
          g = Backward(loss);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNonFiniteValue) throw;
          throw Error(ErrorCode::kDivergenceDetected,
                      "non-finite value at step " + std::to_string(step) + ": " + e.what());
        }
        const T scale = static_cast<T>(w);
        for (size_t p = 0; p < params.size(); ++p) {
          std::span<const T> gp = g.Get(params[p]);
          if (gp.empty()) continue;
          T* acc = grads[p].data();
          const size_t size = gp.size();
#pragma omp simd
          for (size_t j = 0; j < size; ++j) acc[j] += scale * gp[j];
        }
      }
      if (!std::isfinite(loss_sum)) {
        throw Error(ErrorCode::kDivergenceDetected, "loss is not finite at step " + std::to_string(step));
      }
      AdamWStep(state, std::span<Tensor<T>>(params), std::span<const std::vector<T>>(grads));
      for (const Tensor<T>& p : params) {
        for (T v : p.data()) {
          if (!std::isfinite(static_cast<double>(v))) {
            throw Error(ErrorCode::kDivergenceDetected,
                        "parameter became non-finite at step " + std::to_string(step));
          }
        }
      }
      StepRecord record{step, epoch, loss_sum, config.lr};
      log.steps.push_back(record);
      if (step_log.is_open()) {
        step_log << step << '\t' << epoch << '\t' << FormatDouble(loss_sum) << '\t'
                 << FormatDouble(config.lr) << '\n';
      }
      evaluated_last = false;
      const bool eval_now = config.eval_every > 0
                                ? step % config.eval_every == 0
                                : next_point < points.size() && points[next_point] == local;
      if (config.eval_every == 0 && eval_now) ++next_point;
      if (eval_now) run_eval(epoch, local);
      if (hooks.after_step && !hooks.after_step(record)) stop = true;
      if (config.max_steps > 0 && step >= config.max_steps) stop = true;
      if (stop && !evaluated_last) run_eval(epoch, local);
    }
  }
  if (log.evals.empty()) run_eval(config.epochs - 1, steps_per_epoch);
  step_log.flush();
  for (size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].mutable_data();
    std::copy(best_params[i].begin(), best_params[i].end(), dst.begin());
  }
  return log;
}

std::vector<AblationRow> LayerAblation(const Preset& preset, std::span<const Example> train,
                                       std::span<const Example> val,
                                       std::span<const Example> test,
                                       std::span<const int> layer_counts,
                                       const std::function<void(const AblationRow&)>& progress) {
  std::vector<AblationRow> rows;
  for (int layers : layer_counts) {
    ModelConfig config = preset.model;
    config.head.layers_used = layers;
    config.Validate();
    AblationRow row;
    row.layers = layers;
    auto run = [&](auto model) {
      TrainLog log = Fit(model, train, val, preset.train);
      row.val_loss = log.evals[static_cast<size_t>(log.best)].result.loss;
      row.metrics = Evaluate(model, test.empty() ? val : test, 0.5, preset.train.eval_threads).metrics;
    };
    if (preset.train.precision == Precision::kFloat64) {
      run(Model<double>::Init(config, preset.train.seed));
    } else {
      run(Model<float>::Init(config, preset.train.seed));
    }
    rows.push_back(row);
    if (progress) progress(row);
  }
  return rows;
}

std::string AblationCsv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "layers,accuracy,precision,recall,f1,auc\n";
  char buf[160];
  for (const AblationRow& r : rows) {
    const Metrics& m = r.metrics;
    std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%.4f,%.4f,%.4f\n", r.layers, m.accuracy,
                  m.precision, m.recall, m.f1, m.auc);
    out << buf;
  }
  return out.str();
}

template EvalResult Evaluate<float>(const Model<float>&, std::span<const Example>, double, int);
template EvalResult Evaluate<double>(const Model<double>&, std::span<const Example>, double, int);
template TrainLog Fit<float>(Model<float>&, std::span<const Example>, std::span<const Example>,
                             const TrainConfig&, const std::filesystem::path&, const TrainHooks&);
template TrainLog Fit<double>(Model<double>&, std::span<const Example>, std::span<const Example>,
                              const TrainConfig&, const std::filesystem::path&, const TrainHooks&);

}  // namespace pma
