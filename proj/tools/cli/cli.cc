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


#include "cli/cli.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pma/adversarial.h"
#include "pma/checkpoint.h"
#include "pma/dataset.h"
#include "pma/errors.h"
#include "pma/metrics.h"
#include "pma/model.h"
#include "pma/synth.h"
#include "pma/tld.h"
#include "pma/tokenizer.h"
#include "pma/training.h"

namespace pma::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flags, missing inputs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::string> preset;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  std::string out_dir = ".";
  std::string schema = "grambeddings";
  std::string data;
  std::string val;
  std::string test;
  std::string vocab;
  std::string checkpoint;
};

struct Options {
  Common common;
  bool train_vocab = false;
  int vocab_size = 0;
  double threshold = 0.5;
  std::vector<double> fprs = {0.001};
  std::vector<std::string> urls;
  std::string input;
  int64_t benign = 8000;
  int64_t malicious = 4000;
  int64_t adversarial = 4000;
  double swap_fraction = 0.5;
  int hyphens = 1;
  int max_attempts = 64;
  std::vector<int> layers = {2, 3, 4, 5, 12};
  int64_t count = 14000;
  double malicious_fraction = 0.5;
  std::string out;
  std::vector<int64_t> sizes;
  bool no_stratify = false;
};

std::string Fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void RequireFile(const std::string& path, const std::string& flag) {
  if (path.empty()) throw UsageError(flag + " is required");
  if (!fs::is_regular_file(path)) throw UsageError("file not found: " + path);
}

fs::path OutDir(const Common& c) {
  fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

int ThreadsFromEnv() {
  const char* env = std::getenv("PMA_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    throw UsageError(std::string("PMA_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(n);
}

DatasetSchema Schema(const Common& c) {
  try {
    return DatasetSchema::Named(c.schema);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Preset BuildPreset(const Common& c, const DatasetSchema& schema) {
  const std::string name = c.preset.value_or("desk");
  if (name != "desk" && name != "paper") {
    throw UsageError("unknown preset '" + name + "' (expected desk or paper)");
  }
  Preset preset = Preset::Named(name);
  preset.model.head.num_classes = schema.num_classes();
  preset.train.seed = c.seed;
  for (const std::string& o : c.overrides) {
    try {
      preset.ApplyOverride(o);
    } catch (const Error& e) {
      throw UsageError(std::string("bad --override: ") + e.what());
    }
  }
  preset.train.eval_threads = ThreadsFromEnv();
  return preset;
}

std::vector<UrlRecord> Load(const std::string& path, const std::string& flag,
                            const DatasetSchema& schema, std::ostream& err) {
  RequireFile(path, flag);
  LoadReport report;
  std::vector<UrlRecord> records = LoadDataset(path, schema, &report);
  if (report.skipped > 0) {
    err << path << ": skipped " << report.skipped << " malformed row(s)\n";
  }
  if (records.empty()) throw Error(ErrorCode::kDataEmpty, "no usable rows in " + path);
  return records;
}

std::vector<std::string> Urls(const std::vector<UrlRecord>& records) {
  std::vector<std::string> urls;
  urls.reserve(records.size());
  for (const UrlRecord& r : records) urls.push_back(r.url);
  return urls;
}

// --vocab, else --train-vocab on the training urls.
Vocab ResolveTrainingVocab(const Options& o, const Preset& preset,
                           const std::vector<UrlRecord>& train, std::ostream& err) {
  if (!o.common.vocab.empty()) {
    RequireFile(o.common.vocab, "--vocab");
    return Vocab::Load(o.common.vocab);
  }
  if (!o.train_vocab) throw UsageError("either --vocab or --train-vocab is required");
  err << "training BPE vocabulary (" << preset.vocab_size << " tokens)\n";
  std::vector<std::string> urls = Urls(train);
  return TrainBpe(urls, preset.vocab_size);
}

// --vocab, else vocab.bpe next to the checkpoint.
Vocab ResolveVocab(const Common& c) {
  if (!c.vocab.empty()) {
    RequireFile(c.vocab, "--vocab");
    return Vocab::Load(c.vocab);
  }
  if (c.checkpoint.empty()) throw UsageError("--vocab or --checkpoint is required");
  fs::path beside = fs::path(c.checkpoint).parent_path() / "vocab.bpe";
  if (!fs::is_regular_file(beside)) {
    throw UsageError("no --vocab given and file not found: " + beside.string());
  }
  return Vocab::Load(beside);
}

// Runs fn(model) with the checkpoint's precision. An explicit --preset or
// --override replaces the stored model config, so tensors are checked against it.
template <typename Fn>
void WithModel(const Common& c, const DatasetSchema& schema, const Vocab& vocab, Fn&& fn) {
  RequireFile(c.checkpoint, "--checkpoint");
  Checkpoint ckpt = LoadCheckpoint(c.checkpoint);
  if (c.preset || !c.overrides.empty()) {
    Preset preset = BuildPreset(c, schema);
    preset.model.encoder.vocab_size = vocab.size();
    json header = json::parse(ckpt.config_json, nullptr, false);
    if (header.is_discarded() || !header.is_object()) header = json::object();
    header["model"] = preset.model.ToJson();
    ckpt.config_json = header.dump();
  }
  const bool f64 = !ckpt.entries.empty() && ckpt.entries.front().dtype == DType::kF64;
  auto check = [&](const auto& model) {
    if (model.config().encoder.vocab_size != vocab.size()) {
      throw Error(ErrorCode::kBadVocab,
                  "vocabulary has " + std::to_string(vocab.size()) +
                      " tokens but the checkpoint expects " +
                      std::to_string(model.config().encoder.vocab_size));
    }
  };
  if (f64) {
    auto model = Model<double>::FromCheckpoint(ckpt);
    check(model);
    fn(model);
  } else {
    auto model = Model<float>::FromCheckpoint(ckpt);
    check(model);
    fn(model);
  }
}

json EvalJson(const EvalResult& r) {
  json j = r.metrics.ToJson();
  j["loss"] = r.loss;
  j["count"] = r.scores.size();
  if (r.multi) j["multiclass"] = r.multi->ToJson();
  return j;
}

template <typename T>
void TrainWith(Model<T> model, const Options& o, const Preset& preset,
               const std::vector<Example>& train, const std::vector<Example>& val,
               const std::vector<Example>& test, const fs::path& dir, std::ostream& out,
               std::ostream& err) {
  TrainHooks hooks;
  hooks.after_eval = [&](const EvalRecord& e, bool is_best) {
    err << "step " << e.step << " epoch " << Fmt("%.2f", e.epoch) << " val_loss "
        << Fmt("%.6f", e.result.loss) << " acc " << Fmt("%.4f", e.result.metrics.accuracy)
        << " auc " << Fmt("%.4f", e.result.metrics.auc) << (is_best ? " *" : "") << '\n';
  };
  TrainLog log = Fit(model, train, val, preset.train, dir, hooks);
  json metrics = {{"best", log.EvalJson(static_cast<size_t>(log.best))}};
  if (!test.empty()) {
    EvalResult r = Evaluate(model, test, o.threshold, preset.train.eval_threads);
    metrics["test"] = EvalJson(r);
  }
  metrics["steps"] = log.steps.size();
  WriteJson(dir / "metrics.json", metrics);
  out << metrics.dump() << '\n';
}

int CmdTrain(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  Preset preset = BuildPreset(c, schema);
  std::vector<UrlRecord> train = Load(c.data, "--data", schema, err);
  std::vector<UrlRecord> val = Load(c.val, "--val", schema, err);
  std::vector<UrlRecord> test;
  if (!c.test.empty()) test = Load(c.test, "--test", schema, err);
  Vocab vocab = ResolveTrainingVocab(o, preset, train, err);
  preset.model.encoder.vocab_size = vocab.size();
  preset.model.Validate();
  preset.train.Validate();

  fs::path dir = OutDir(c);
  vocab.Save(dir / "vocab.bpe");
  json config = {{"command", "train"},
                 {"preset", preset.ToJson()},
                 {"schema", schema.name},
                 {"data", c.data},
                 {"val", c.val},
                 {"test", c.test},
                 {"vocab", c.vocab.empty() ? "trained" : c.vocab}};
  WriteJson(dir / "config.json", config);

  const int max_len = preset.model.encoder.max_positions;
  std::vector<Example> train_ex = MakeExamples(train, vocab, max_len);
  std::vector<Example> val_ex = MakeExamples(val, vocab, max_len);
  std::vector<Example> test_ex = MakeExamples(test, vocab, max_len);
  err << "training on " << train_ex.size() << " urls, validating on " << val_ex.size() << '\n';
  if (preset.train.precision == Precision::kFloat64) {
    TrainWith(Model<double>::Init(preset.model, preset.train.seed), o, preset, train_ex, val_ex,
              test_ex, dir, out, err);
  } else {
    TrainWith(Model<float>::Init(preset.model, preset.train.seed), o, preset, train_ex, val_ex,
              test_ex, dir, out, err);
  }
  return kExitOk;
}

int CmdEval(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  const std::string& data_path = c.data.empty() ? c.test : c.data;
  std::vector<UrlRecord> records = Load(data_path, "--data", schema, err);
  Vocab vocab = ResolveVocab(c);
  const int threads = ThreadsFromEnv();
  json report;
  std::string roc_csv;
  std::ostringstream scores_csv;
  WithModel(c, schema, vocab, [&](const auto& model) {
    std::vector<Example> ex = MakeExamples(records, vocab, model.config().encoder.max_positions);
    EvalResult r = Evaluate(model, ex, o.threshold, threads);
    report = EvalJson(r);
    std::vector<RocPoint> roc = RocPoints(r.scores, r.labels);
    json tpr = json::object();
    for (double f : o.fprs) tpr[Fmt("%g", f)] = TprAtFpr(roc, f);
    report["tpr_at_fpr"] = tpr;
    report["threshold"] = o.threshold;
    roc_csv = RocCsv(roc);
    scores_csv << "url,label,score\n";
    for (size_t i = 0; i < records.size(); ++i) {
      scores_csv << CsvField(records[i].url) << ',' << r.labels[i] << ','
                 << Fmt("%.17g", r.scores[i]) << '\n';
    }
  });
  fs::path dir = OutDir(c);
  WriteJson(dir / "metrics.json", report);
  WriteText(dir / "roc.csv", roc_csv);
  WriteText(dir / "scores.csv", scores_csv.str());
  out << report.dump(2) << '\n';
  return kExitOk;
}

int CmdPredict(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  std::vector<std::string> urls = o.urls;
  if (!o.input.empty()) {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (o.input != "-") {
      RequireFile(o.input, "--input");
      file.open(o.input);
      in = &file;
    }
    std::string line;
    while (std::getline(*in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) urls.push_back(line);
    }
  }
  if (urls.empty()) throw UsageError("no urls given (positional or --input)");
  DatasetSchema schema = Schema(c);
  Vocab vocab = ResolveVocab(c);
  WithModel(c, schema, vocab, [&](const auto& model) {
    using T = typename std::decay_t<decltype(model.Parameters().front())>::Scalar;
    NoGradGuard no_grad;
    out << "url,score,label\n";
    for (const std::string& url : urls) {
      TokenSequence seq = Encode(url, vocab, model.config().encoder.max_positions).Trimmed();
      auto result = model.Forward(std::span<const TokenSequence>(&seq, 1), {});
      const T p0 = result.prediction.probs.data()[0];
      const double score = 1.0 - static_cast<double>(p0);
      out << CsvField(url) << ',' << Fmt("%.9f", score) << ','
          << (score >= o.threshold ? "malicious" : "benign") << '\n';
    }
  });
  (void)err;
  return kExitOk;
}

int CmdAttack(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  std::vector<UrlRecord> test = Load(c.test, "--test", schema, err);
  std::unordered_set<std::string> train_urls;
  if (!c.data.empty()) {
    for (const UrlRecord& r : Load(c.data, "--data", schema, err)) train_urls.insert(r.url);
  } else {
    err << "warning: no --data train split given; train exclusion is not checked\n";
  }
  Vocab vocab = ResolveVocab(c);
  AttackOptions options;
  options.benign = o.benign;
  options.malicious = o.malicious;
  options.adversarial = o.adversarial;
  options.swap_fraction = o.swap_fraction;
  options.hyphens = o.hyphens;
  options.max_attempts = o.max_attempts;
  options.seed = c.seed;
  AdversarialSet set = BuildAdversarialTestset(test, train_urls, vocab, options);
  fs::path dir = OutDir(c);
  WriteText(dir / "adversarial.csv", FormatDataset(set.records, DatasetSchema::Binary()));
  json provenance = set.Provenance(options);
  WriteJson(dir / "adversarial.provenance.json", provenance);
  json summary = {{"rows", set.records.size()},
                  {"benign", options.benign},
                  {"malicious", options.malicious},
                  {"adversarial", options.adversarial},
                  {"skipped_unsplittable", set.skipped_unsplittable},
                  {"skipped_in_train", set.skipped_in_train},
                  {"csv", (dir / "adversarial.csv").string()}};
  out << summary.dump() << '\n';
  return kExitOk;
}

int CmdStats(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  RequireFile(c.data, "--data");
  LoadReport report;
  std::vector<UrlRecord> records = LoadDataset(c.data, schema, &report);
  if (report.skipped > 0) err << c.data << ": skipped " << report.skipped << " malformed row(s)\n";
  json counts = json::object();
  std::vector<int64_t> per_class = ClassCounts(records, schema.num_classes());
  for (size_t k = 0; k < per_class.size(); ++k) counts[schema.class_names[k]] = per_class[k];
  json stats = {{"rows", records.size()},
                {"skipped", report.skipped},
                {"class_counts", counts},
                {"tld", ComputeTldStats(records, schema.class_names).ToJson()}};
  WriteJson(OutDir(c) / "stats.json", stats);
  out << stats.dump(2) << '\n';
  return kExitOk;
}

std::string Trend(const std::vector<AblationRow>& rows) {
  bool up = true;
  bool down = true;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].metrics.accuracy < rows[i - 1].metrics.accuracy) up = false;
    if (rows[i].metrics.accuracy > rows[i - 1].metrics.accuracy) down = false;
  }
  if (rows.size() < 2 || (up && down)) return "flat";
  if (up) return "non-decreasing";
  if (down) return "non-increasing";
  return "mixed";
}

int CmdAblate(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  Preset preset = BuildPreset(c, schema);
  std::vector<UrlRecord> train = Load(c.data, "--data", schema, err);
  std::vector<UrlRecord> val = Load(c.val, "--val", schema, err);
  std::vector<UrlRecord> test;
  if (!c.test.empty()) test = Load(c.test, "--test", schema, err);
  if (o.layers.empty()) throw UsageError("--layers needs at least one count");
  for (int k : o.layers) {
    if (k < 1 || k > preset.model.encoder.n_layers) {
      throw UsageError("--layers entry " + std::to_string(k) + " outside 1.." +
                       std::to_string(preset.model.encoder.n_layers));
    }
  }
  Vocab vocab = ResolveTrainingVocab(o, preset, train, err);
  preset.model.encoder.vocab_size = vocab.size();
  preset.model.Validate();
  preset.train.Validate();
  const int max_len = preset.model.encoder.max_positions;
  std::vector<Example> train_ex = MakeExamples(train, vocab, max_len);
  std::vector<Example> val_ex = MakeExamples(val, vocab, max_len);
  std::vector<Example> test_ex = MakeExamples(test, vocab, max_len);
  std::vector<AblationRow> rows =
      LayerAblation(preset, train_ex, val_ex, test_ex, o.layers, [&](const AblationRow& row) {
        err << "layers " << row.layers << " accuracy " << Fmt("%.4f", row.metrics.accuracy)
            << " auc " << Fmt("%.4f", row.metrics.auc) << '\n';
      });
  fs::path dir = OutDir(c);
  vocab.Save(dir / "vocab.bpe");
  const std::string csv = AblationCsv(rows);
  WriteText(dir / "ablation.csv", csv);
  json table = json::array();
  for (const AblationRow& row : rows) {
    json r = row.metrics.ToJson();
    r["layers"] = row.layers;
    r["val_loss"] = row.val_loss;
    table.push_back(r);
  }
  json report = {{"rows", table},
                 {"evaluated_on", test.empty() ? "val" : "test"},
                 {"accuracy_trend", Trend(rows)},
                 {"preset", preset.ToJson()}};
  WriteJson(dir / "ablation.json", report);
  out << csv;
  return kExitOk;
}

int CmdVocab(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  std::vector<UrlRecord> records = Load(c.data, "--data", schema, err);
  const int size = o.vocab_size > 0 ? o.vocab_size : BuildPreset(c, schema).vocab_size;
  std::vector<std::string> urls = Urls(records);
  Vocab vocab = TrainBpe(urls, size);
  fs::path path = OutDir(c) / "vocab.bpe";
  vocab.Save(path);
  out << path.string() << ' ' << vocab.size() << " tokens\n";
  return kExitOk;
}

int CmdSynth(const Options& o, std::ostream& out, std::ostream&) {
  if (o.count < 1) throw UsageError("--count must be positive");
  if (!(o.malicious_fraction >= 0.0 && o.malicious_fraction <= 1.0)) {
    throw UsageError("--malicious-fraction must lie in [0, 1]");
  }
  SynthOptions options;
  options.count = o.count;
  options.malicious_fraction = o.malicious_fraction;
  options.seed = o.common.seed;
  const std::string text = FormatDataset(SynthesizeCorpus(options), DatasetSchema::Binary());
  if (o.out.empty() || o.out == "-") {
    out << text;
  } else {
    fs::path path(o.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    WriteText(path, text);
  }
  return kExitOk;
}

int CmdSplit(const Options& o, std::ostream& out, std::ostream& err) {
  const Common& c = o.common;
  DatasetSchema schema = Schema(c);
  std::vector<UrlRecord> records = Load(c.data, "--data", schema, err);
  if (o.sizes.size() != 3) throw UsageError("--sizes needs three counts: train,val,test");
  int64_t total = 0;
  for (int64_t s : o.sizes) {
    if (s < 0) throw UsageError("--sizes entries must be non-negative");
    total += s;
  }
  if (total > static_cast<int64_t>(records.size())) {
    throw UsageError("--sizes asks for " + std::to_string(total) + " rows but " + c.data +
                     " has " + std::to_string(records.size()));
  }
  DataSplit split = SplitByCounts(records, {o.sizes[0], o.sizes[1], o.sizes[2]}, c.seed,
                                  !o.no_stratify, schema.num_classes());
  fs::path dir = OutDir(c);
  SaveDataset(dir / "train.csv", split.train, schema);
  SaveDataset(dir / "val.csv", split.val, schema);
  SaveDataset(dir / "test.csv", split.test, schema);
  out << "train " << split.train.size() << " val " << split.val.size() << " test "
      << split.test.size() << '\n';
  return kExitOk;
}

void AddCommon(CLI::App* cmd, Common& c, bool model_flags) {
  cmd->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_option("--out-dir", c.out_dir, "Directory for written reports")->capture_default_str();
  cmd->add_option("--schema", c.schema,
                  "Dataset layout: binary, grambeddings, mendeley, kaggle1, kaggle2")
      ->capture_default_str();
  if (model_flags) {
    cmd->add_option("--preset", c.preset, "desk (default) or paper");
    cmd->add_option("--override", c.overrides, "key=value preset override (repeatable)")
        ->allow_extra_args(false);
  }
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  Common& c = o.common;
  CLI::App app{"Malicious URL detection: train, evaluate, attack and inspect", "pma"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  CLI::App* vocab = app.add_subcommand("vocab", "Learn a BPE vocabulary from a dataset");
  AddCommon(vocab, c, true);
  vocab->add_option("--data", c.data, "Training CSV")->required();
  vocab->add_option("--vocab-size", o.vocab_size, "Target size (default: preset)");

  CLI::App* train = app.add_subcommand("train", "Fit a model and keep the best checkpoint");
  AddCommon(train, c, true);
  train->add_option("--data", c.data, "Training CSV")->required();
  train->add_option("--val", c.val, "Validation CSV")->required();
  train->add_option("--test", c.test, "Optional test CSV scored with the best checkpoint");
  train->add_option("--vocab", c.vocab, "Existing vocab.bpe");
  train->add_flag("--train-vocab", o.train_vocab, "Learn the vocabulary from --data");
  train->add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();

  CLI::App* eval = app.add_subcommand("eval", "Score a labeled dataset with a checkpoint");
  AddCommon(eval, c, true);
  eval->add_option("--checkpoint", c.checkpoint, "Model checkpoint")->required();
  eval->add_option("--data", c.data, "Labeled CSV");
  eval->add_option("--test", c.test, "Alias for --data");
  eval->add_option("--vocab", c.vocab, "vocab.bpe (default: next to the checkpoint)");
  eval->add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();
  eval->add_option("--fpr", o.fprs, "False-positive rates for tpr_at_fpr")->delimiter(',');

  CLI::App* predict = app.add_subcommand("predict", "Score urls; CSV to stdout");
  AddCommon(predict, c, true);
  predict->add_option("--checkpoint", c.checkpoint, "Model checkpoint")->required();
  predict->add_option("--vocab", c.vocab, "vocab.bpe (default: next to the checkpoint)");
  predict->add_option("--input", o.input, "File with one url per line, - for stdin");
  predict->add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();
  predict->add_option("urls", o.urls, "Urls to score");

  CLI::App* attack = app.add_subcommand("attack", "Build the adversarial test set");
  AddCommon(attack, c, false);
  attack->add_option("--test", c.test, "Test split to draw from")->required();
  attack->add_option("--data", c.data, "Train split; its urls are never emitted");
  attack->add_option("--vocab", c.vocab, "vocab.bpe used to find subword boundaries");
  attack->add_option("--checkpoint", c.checkpoint, "Use the vocab.bpe next to this checkpoint");
  attack->add_option("--benign", o.benign, "Benign rows")->capture_default_str();
  attack->add_option("--malicious", o.malicious, "Original malicious rows")->capture_default_str();
  attack->add_option("--adversarial", o.adversarial, "Generated rows")->capture_default_str();
  attack->add_option("--swap-fraction", o.swap_fraction, "Share of generated rows with a swapped domain")
      ->capture_default_str();
  attack->add_option("--hyphens", o.hyphens, "Hyphens inserted per generated row")
      ->capture_default_str();
  attack->add_option("--max-attempts", o.max_attempts, "Redraws per row")->capture_default_str();

  CLI::App* stats = app.add_subcommand("stats", "Class counts and TLD composition");
  AddCommon(stats, c, false);
  stats->add_option("--data", c.data, "Dataset CSV")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Retrain with different numbers of stacked layers");
  AddCommon(ablate, c, true);
  ablate->add_option("--data", c.data, "Training CSV")->required();
  ablate->add_option("--val", c.val, "Validation CSV")->required();
  ablate->add_option("--test", c.test, "Test CSV (default: report on --val)");
  ablate->add_option("--vocab", c.vocab, "Existing vocab.bpe");
  ablate->add_flag("--train-vocab", o.train_vocab, "Learn the vocabulary from --data");
  ablate->add_option("--layers", o.layers, "Layer counts")->delimiter(',')->capture_default_str();

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic labeled url corpus");
  AddCommon(synth, c, false);
  synth->add_option("--count", o.count, "Rows")->capture_default_str();
  synth->add_option("--malicious-fraction", o.malicious_fraction, "Malicious share")
      ->capture_default_str();
  synth->add_option("--out", o.out, "Output CSV (default: stdout)");

  CLI::App* split = app.add_subcommand("split", "Seeded train/val/test split");
  AddCommon(split, c, false);
  split->add_option("--data", c.data, "Dataset CSV")->required();
  split->add_option("--sizes", o.sizes, "train,val,test counts")->delimiter(',')->required();
  split->add_flag("--no-stratify", o.no_stratify, "Plain random split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (vocab->parsed()) return CmdVocab(o, out, err);
    if (train->parsed()) return CmdTrain(o, out, err);
    if (eval->parsed()) return CmdEval(o, out, err);
    if (predict->parsed()) return CmdPredict(o, out, err);
    if (attack->parsed()) return CmdAttack(o, out, err);
    if (stats->parsed()) return CmdStats(o, out, err);
    if (ablate->parsed()) return CmdAblate(o, out, err);
    if (synth->parsed()) return CmdSynth(o, out, err);
    if (split->parsed()) return CmdSplit(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return IsNumericError(e.code()) ? kExitNumeric : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pma::cli
