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

#ifndef PMA_DATASET_H_
#define PMA_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pma {

struct UrlRecord {
  std::string url;
  int32_t label = 0;
  std::string source;
};

enum class HeaderMode {
  kRequired,
  // Header is used when its first row names both columns; otherwise the url
  // is column 0 and the label column 1.
  kAuto,
};

// Column names and the raw-label vocabulary of one corpus. Label matching is
// case-insensitive after trimming.
struct DatasetSchema {
  std::string name = "binary";
  std::string url_column = "url";
  std::string label_column = "label";
  std::vector<std::string> class_names = {"benign", "malicious"};
  std::map<std::string, int32_t> label_map;
  HeaderMode header = HeaderMode::kAuto;
  // 0 picks tab for ".tsv" files and comma otherwise.
  char delimiter = 0;

  int num_classes() const { return static_cast<int>(class_names.size()); }

  // url,label with benign/malicious (and 0/1, good/bad, legitimate/phishing).
  static DatasetSchema Binary();
  static DatasetSchema Grambeddings();
  static DatasetSchema Mendeley();
  static DatasetSchema Kaggle1();
  // url,type with benign/defacement/phishing/malware.
  static DatasetSchema Kaggle2();
  // Throws InvalidArgument for an unknown name.
  static DatasetSchema Named(std::string_view name);
};

struct LoadReport {
  int64_t rows = 0;
  int64_t skipped = 0;
  std::vector<std::string> warnings;
};

// RFC 4180 quoting; rows with the wrong field count, an unterminated quote or
// an empty url are skipped and counted. Row order is preserved, duplicates
// are kept.
std::vector<UrlRecord> ParseDataset(std::string_view text, const DatasetSchema& schema,
                                    char delimiter = ',', const std::string& source = "",
                                    LoadReport* report = nullptr);
std::vector<UrlRecord> LoadDataset(const std::filesystem::path& path,
                                   const DatasetSchema& schema,
                                   LoadReport* report = nullptr);

// Header "url,label" and class names as labels; fields are quoted when needed.
std::string FormatDataset(std::span<const UrlRecord> records, const DatasetSchema& schema);
void SaveDataset(const std::filesystem::path& path, std::span<const UrlRecord> records,
                 const DatasetSchema& schema);

struct DataSplit {
  std::vector<UrlRecord> train;
  std::vector<UrlRecord> val;
  std::vector<UrlRecord> test;
};

// Deterministic under the "split" sub-seed. Stratified splits allocate each
// class in proportion to its share, rounding by largest remainder, so every
// subset is within one sample per class of the exact ratio. Members keep
// their original relative order.
DataSplit SplitByCounts(std::span<const UrlRecord> records,
                        std::array<int64_t, 3> counts, uint64_t seed,
                        bool stratified, int num_classes = 2);
// Counts are floor(fraction * n). Throws FractionOverflow when the fractions
// sum past 1.
DataSplit SplitByFractions(std::span<const UrlRecord> records,
                           std::array<double, 3> fractions, uint64_t seed,
                           bool stratified, int num_classes = 2);

std::vector<int64_t> ClassCounts(std::span<const UrlRecord> records, int num_classes);

}  // namespace pma

#endif  // PMA_DATASET_H_
