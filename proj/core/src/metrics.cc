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

#include "pma/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pma/errors.h"

namespace pma {
namespace {

void CheckInputs(std::span<const double> scores, std::span<const int32_t> labels) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no scores");
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(scores.size()) + " scores but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kNonFiniteValue, "score is not finite");
  }
}

double Ratio(int64_t num, int64_t den, const char* name, std::vector<std::string>& flags) {
  if (den == 0) {
    flags.emplace_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

bool Metrics::IsDegenerate(const std::string& name) const {
  return std::find(degenerate.begin(), degenerate.end(), name) != degenerate.end();
}

nlohmann::json Metrics::ToJson() const {
  return {{"accuracy", accuracy}, {"precision", precision}, {"recall", recall},
          {"f1", f1},             {"auc", auc},             {"fpr", fpr},
          {"tp", confusion.tp},   {"fp", confusion.fp},     {"tn", confusion.tn},
          {"fn", confusion.fn},   {"degenerate", degenerate}};
}

Metrics MetricsFromConfusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  m.accuracy = Ratio(c.tp + c.tn, c.total(), "accuracy", m.degenerate);
  m.precision = Ratio(c.tp, c.tp + c.fp, "precision", m.degenerate);
  m.recall = Ratio(c.tp, c.tp + c.fn, "recall", m.degenerate);
  m.fpr = Ratio(c.fp, c.fp + c.tn, "fpr", m.degenerate);
  if (m.IsDegenerate("precision") || m.IsDegenerate("recall") ||
      m.precision + m.recall == 0.0) {
    m.degenerate.emplace_back("f1");
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

Confusion ConfusionAt(std::span<const double> scores, std::span<const int32_t> labels,
                      double threshold) {
  CheckInputs(scores, labels);
  Confusion c;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++c.tp;
    if (predicted && !actual) ++c.fp;
    if (!predicted && actual) ++c.fn;
    if (!predicted && !actual) ++c.tn;
  }
  return c;
}

Metrics ComputeMetrics(std::span<const double> scores, std::span<const int32_t> labels,
                       double threshold) {
  Metrics m = MetricsFromConfusion(ConfusionAt(scores, labels, threshold));
  bool degenerate = false;
  m.auc = RankAuc(scores, labels, &degenerate);
  if (degenerate) m.degenerate.emplace_back("auc");
  return m;
}

double RankAuc(std::span<const double> scores, std::span<const int32_t> labels,
               bool* degenerate) {
  CheckInputs(scores, labels);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Sum of positive ranks, doubled so midranks stay integral.
  int64_t rank_sum2 = 0;
  int64_t positives = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const int64_t midrank2 = static_cast<int64_t>(i + 1 + j);
    for (size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        rank_sum2 += midrank2;
        ++positives;
      }
    }
    i = j;
  }
  const int64_t negatives = static_cast<int64_t>(scores.size()) - positives;
  if (degenerate) *degenerate = positives == 0 || negatives == 0;
  if (positives == 0 || negatives == 0) return 0.0;
  const int64_t u2 = rank_sum2 - positives * (positives + 1);
  return static_cast<double>(u2) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::vector<RocPoint> RocPoints(std::span<const double> scores,
                                std::span<const int32_t> labels) {
  CheckInputs(scores, labels);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  int64_t positives = 0;
  for (int32_t l : labels) positives += l == 1 ? 1 : 0;
  const int64_t negatives = static_cast<int64_t>(labels.size()) - positives;
  auto rate = [](int64_t num, int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  std::vector<RocPoint> curve = {{0.0, 0.0}};
  int64_t tp = 0;
  int64_t fp = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({rate(fp, negatives), rate(tp, positives)});
    i = j;
  }
  if (curve.back().fpr != 1.0 || curve.back().tpr != 1.0) curve.push_back({1.0, 1.0});
  return curve;
}

double TprAtFpr(std::span<const RocPoint> curve, double fpr) {
  if (curve.empty()) throw Error(ErrorCode::kEmptyInput, "empty ROC curve");
  if (!(fpr >= 0.0 && fpr <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fpr must lie in [0, 1]");
  }
  size_t lo = 0;
  while (lo + 1 < curve.size() && curve[lo + 1].fpr <= fpr) ++lo;
  if (lo + 1 == curve.size() || curve[lo].fpr == fpr) return curve[lo].tpr;
  const RocPoint& a = curve[lo];
  const RocPoint& b = curve[lo + 1];
  return a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr);
}

double TrapezoidArea(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

std::string RocCsv(std::span<const RocPoint> curve) {
  std::ostringstream out;
  out.precision(17);
  out << "fpr,tpr\n";
  for (const RocPoint& p : curve) out << p.fpr << ',' << p.tpr << '\n';
  return out.str();
}

nlohmann::json MultiClassMetrics::ToJson() const {
  nlohmann::json per = nlohmann::json::object();
  for (size_t c = 0; c < per_class.size(); ++c) per[class_names[c]] = per_class[c].ToJson();
  return {{"accuracy", accuracy}, {"per_class", per}, {"macro", macro.ToJson()}};
}

MultiClassMetrics ComputeMultiClassMetrics(std::span<const double> probs,
                                           std::span<const int32_t> labels,
                                           const std::vector<std::string>& class_names) {
  const size_t k = class_names.size();
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no labels");
  if (k < 2 || probs.size() != labels.size() * k) {
    throw Error(ErrorCode::kShapeMismatch, "probabilities must be (n, K) with K >= 2");
  }
  const size_t n = labels.size();
  std::vector<int32_t> predicted(n);
  int64_t correct = 0;
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= k) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(labels[i]));
    }
    auto row = probs.subspan(i * k, k);
    predicted[i] = static_cast<int32_t>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += predicted[i] == labels[i] ? 1 : 0;
  }
  MultiClassMetrics out;
  out.class_names = class_names;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  std::vector<double> column(n);
  std::vector<int32_t> binary(n);
  for (size_t c = 0; c < k; ++c) {
    Confusion conf;
    for (size_t i = 0; i < n; ++i) {
      column[i] = probs[i * k + c];
      binary[i] = labels[i] == static_cast<int32_t>(c) ? 1 : 0;
      const bool p = predicted[i] == static_cast<int32_t>(c);
      if (p && binary[i]) ++conf.tp;
      if (p && !binary[i]) ++conf.fp;
      if (!p && binary[i]) ++conf.fn;
      if (!p && !binary[i]) ++conf.tn;
    }
    Metrics m = MetricsFromConfusion(conf);
    bool degenerate = false;
    m.auc = RankAuc(column, binary, &degenerate);
    if (degenerate) m.degenerate.emplace_back("auc");
    out.per_class.push_back(std::move(m));
  }
  Metrics& macro = out.macro;
  for (const Metrics& m : out.per_class) {
    macro.precision += m.precision / static_cast<double>(k);
    macro.recall += m.recall / static_cast<double>(k);
    macro.f1 += m.f1 / static_cast<double>(k);
    macro.auc += m.auc / static_cast<double>(k);
    macro.fpr += m.fpr / static_cast<double>(k);
    for (const std::string& flag : m.degenerate) {
      if (!macro.IsDegenerate(flag)) macro.degenerate.push_back(flag);
    }
  }
  macro.accuracy = out.accuracy;
  return out;
}

}  // namespace pma
