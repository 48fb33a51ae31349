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

#ifndef PMA_METRICS_H_
#define PMA_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pma {

struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }
};

// Scores whose denominator is zero are reported as 0 and flagged.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double fpr = 0.0;
  Confusion confusion;
  std::vector<std::string> degenerate;

  bool IsDegenerate(const std::string& name) const;
  nlohmann::json ToJson() const;
};

// Everything except auc, which needs scores.
Metrics MetricsFromConfusion(const Confusion& confusion);

// Label 1 is the positive (malicious) class. A score at or above the threshold
// predicts positive.
Confusion ConfusionAt(std::span<const double> scores,
                      std::span<const int32_t> labels, double threshold);
Metrics ComputeMetrics(std::span<const double> scores,
                       std::span<const int32_t> labels, double threshold = 0.5);

// Mann-Whitney statistic with midranks, so tied scores count one half. Sets
// *degenerate (when given) and returns 0 if either class is absent.
double RankAuc(std::span<const double> scores, std::span<const int32_t> labels,
               bool* degenerate = nullptr);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Staircase from (0,0) to (1,1), one vertex per distinct score. A block of
// tied scores becomes a single diagonal segment.
std::vector<RocPoint> RocPoints(std::span<const double> scores,
                                std::span<const int32_t> labels);
// Linear interpolation along the curve; at a vertical step the upper end wins.
double TprAtFpr(std::span<const RocPoint> curve, double fpr);
double TrapezoidArea(std::span<const RocPoint> curve);
// "fpr,tpr" header then one row per point.
std::string RocCsv(std::span<const RocPoint> curve);

struct MultiClassMetrics {
  double accuracy = 0.0;
  std::vector<std::string> class_names;
  // One-vs-rest: predicted class is the argmax, auc uses that class's column.
  std::vector<Metrics> per_class;
  Metrics macro;

  nlohmann::json ToJson() const;
};

// probs is row-major (n, K).
MultiClassMetrics ComputeMultiClassMetrics(
    std::span<const double> probs, std::span<const int32_t> labels,
    const std::vector<std::string>& class_names);

}  // namespace pma

#endif  // PMA_METRICS_H_
