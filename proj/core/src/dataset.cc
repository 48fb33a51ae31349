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

#include "pma/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pma/errors.h"
#include "pma/rng.h"

namespace pma {
namespace {

std::string Normalize(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct Row {
  std::vector<std::string> fields;
  int64_t line = 0;
  bool malformed = false;
};

// Reads one record starting at pos; returns false at end of input.
bool NextRow(std::string_view text, size_t& pos, char delim, int64_t& line, Row& row) {
  row.fields.clear();
  row.malformed = false;
  if (pos >= text.size()) return false;
  row.line = line;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  while (true) {
    if (pos >= text.size()) {
      if (quoted) row.malformed = true;
      row.fields.push_back(std::move(field));
      return true;
    }
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == delim) {
      row.fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
      ++line;
      row.fields.push_back(std::move(field));
      return true;
    } else if (c == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else {
      if (after_quote || c == '"') row.malformed = true;
      field += c;
    }
  }
}

bool BlankRow(const Row& row) { return row.fields.size() == 1 && Trim(row.fields[0]).empty(); }

std::map<std::string, int32_t> BinaryLabels() {
  return {{"0", 0},         {"benign", 0}, {"good", 0},     {"legitimate", 0},
          {"1", 1},         {"bad", 1},    {"malicious", 1}, {"phishing", 1}};
}

bool NeedsQuote(std::string_view s) {
  return s.find_first_of(",\"\r\n\t") != std::string_view::npos;
}

std::string Quote(std::string_view s) {
  if (!NeedsQuote(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

DatasetSchema DatasetSchema::Binary() {
  DatasetSchema s;
  s.label_map = BinaryLabels();
  return s;
}

DatasetSchema DatasetSchema::Grambeddings() {
  DatasetSchema s = Binary();
  s.name = "grambeddings";
  return s;
}

DatasetSchema DatasetSchema::Mendeley() {
  DatasetSchema s = Binary();
  s.name = "mendeley";
  return s;
}

DatasetSchema DatasetSchema::Kaggle1() {
  DatasetSchema s = Binary();
  s.name = "kaggle1";
  return s;
}

DatasetSchema DatasetSchema::Kaggle2() {
  DatasetSchema s;
  s.name = "kaggle2";
  s.label_column = "type";
  s.class_names = {"benign", "defacement", "phishing", "malicious"};
  s.label_map = {{"benign", 0},   {"defacement", 1}, {"phishing", 2},
                 {"malware", 3},  {"malicious", 3}};
  return s;
}

DatasetSchema DatasetSchema::Named(std::string_view name) {
  if (name == "binary") return Binary();
  if (name == "grambeddings") return Grambeddings();
  if (name == "mendeley") return Mendeley();
  if (name == "kaggle1") return Kaggle1();
  if (name == "kaggle2") return Kaggle2();
  throw Error(ErrorCode::kInvalidArgument, "unknown schema '" + std::string(name) + "'");
}

std::vector<UrlRecord> ParseDataset(std::string_view text, const DatasetSchema& schema,
                                    char delimiter, const std::string& source,
                                    LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  size_t pos = 0;
  int64_t line = 1;
  Row row;
  bool have_row = false;
  while ((have_row = NextRow(text, pos, delimiter, line, row)) && BlankRow(row)) {
  }
  if (!have_row) throw Error(ErrorCode::kEmptyFile, "no rows in '" + source + "'");

  size_t url_col = 0;
  size_t label_col = 1;
  size_t expected = 0;
  const std::string url_name = Normalize(schema.url_column);
  const std::string label_name = Normalize(schema.label_column);
  auto find = [&](const std::string& name) {
    for (size_t i = 0; i < row.fields.size(); ++i) {
      if (Normalize(row.fields[i]) == name) return i;
    }
    return row.fields.size();
  };
  bool is_header = schema.header == HeaderMode::kRequired ||
                   find(url_name) < row.fields.size() ||
                   find(label_name) < row.fields.size();
  if (is_header) {
    url_col = find(url_name);
    label_col = find(label_name);
    for (auto [col, name] : {std::pair{url_col, &schema.url_column},
                             std::pair{label_col, &schema.label_column}}) {
      if (col == row.fields.size()) {
        throw Error(ErrorCode::kMissingColumn,
                    "column '" + *name + "' not found in header of '" + source + "'");
      }
    }
    expected = row.fields.size();
    have_row = NextRow(text, pos, delimiter, line, row);
  }

  std::vector<UrlRecord> records;
  for (; have_row; have_row = NextRow(text, pos, delimiter, line, row)) {
    if (BlankRow(row)) continue;
    ++rep.rows;
    const bool bad_width = expected ? row.fields.size() != expected
                                    : row.fields.size() <= std::max(url_col, label_col);
    std::string url = bad_width ? std::string() : Trim(row.fields[url_col]);
    if (row.malformed || bad_width || url.empty()) {
      ++rep.skipped;
      if (rep.warnings.size() < 20) {
        rep.warnings.push_back(source + ":" + std::to_string(row.line) + ": malformed row skipped");
      }
      continue;
    }
    const std::string raw = Normalize(row.fields[label_col]);
    auto it = schema.label_map.find(raw);
    if (it == schema.label_map.end()) {
      throw Error(ErrorCode::kUnknownLabel, "label '" + raw + "' at " + source + ":" +
                                                std::to_string(row.line) +
                                                " is not in schema '" + schema.name + "'");
    }
    records.push_back({std::move(url), it->second, source});
  }
  if (records.empty()) throw Error(ErrorCode::kEmptyFile, "no data rows in '" + source + "'");
  return records;
}

std::vector<UrlRecord> LoadDataset(const std::filesystem::path& path,
                                   const DatasetSchema& schema, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  char delimiter = schema.delimiter;
  if (delimiter == 0) delimiter = path.extension() == ".tsv" ? '\t' : ',';
  return ParseDataset(buffer.str(), schema, delimiter, path.string(), report);
}

std::string FormatDataset(std::span<const UrlRecord> records, const DatasetSchema& schema) {
  std::string out = schema.url_column + "," + schema.label_column + "\n";
  for (const UrlRecord& r : records) {
    if (r.label < 0 || r.label >= schema.num_classes()) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(r.label));
    }
    out += Quote(r.url);
    out += ',';
    out += schema.class_names[static_cast<size_t>(r.label)];
    out += '\n';
  }
  return out;
}

void SaveDataset(const std::filesystem::path& path, std::span<const UrlRecord> records,
                 const DatasetSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << FormatDataset(records, schema);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<int64_t> ClassCounts(std::span<const UrlRecord> records, int num_classes) {
  std::vector<int64_t> counts(static_cast<size_t>(num_classes), 0);
  for (const UrlRecord& r : records) {
    if (r.label < 0 || r.label >= num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(r.label));
    }
    ++counts[static_cast<size_t>(r.label)];
  }
  return counts;
}

DataSplit SplitByCounts(std::span<const UrlRecord> records, std::array<int64_t, 3> counts,
                        uint64_t seed, bool stratified, int num_classes) {
  const int64_t n = static_cast<int64_t>(records.size());
  for (int64_t c : counts) {
    if (c < 0) throw Error(ErrorCode::kInvalidArgument, "split sizes must be non-negative");
  }
  if (counts[0] + counts[1] + counts[2] > n) {
    throw Error(ErrorCode::kFractionOverflow,
                "split sizes sum past the " + std::to_string(n) + " available records");
  }
  Rng rng(DeriveSeed(seed, "split"));
  std::array<std::vector<size_t>, 3> members;
  if (!stratified) {
    std::vector<size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(std::span<size_t>(order));
    size_t at = 0;
    for (size_t s = 0; s < 3; ++s) {
      members[s].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                        order.begin() + static_cast<std::ptrdiff_t>(at + counts[s]));
      at += static_cast<size_t>(counts[s]);
    }
  } else {
    const size_t k = static_cast<size_t>(num_classes);
    std::vector<int64_t> class_size = ClassCounts(records, num_classes);
    std::vector<std::vector<size_t>> by_class(k);
    for (size_t i = 0; i < records.size(); ++i) {
      by_class[static_cast<size_t>(records[i].label)].push_back(i);
    }
    for (auto& list : by_class) rng.Shuffle(std::span<size_t>(list));
    std::vector<int64_t> used(k, 0);
    for (size_t s = 0; s < 3; ++s) {
      std::vector<int64_t> take(k, 0);
      std::vector<double> remainder(k, 0.0);
      int64_t assigned = 0;
      for (size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(counts[s]) *
                             static_cast<double>(class_size[c]) / static_cast<double>(n);
        take[c] = std::min(static_cast<int64_t>(std::floor(exact)), class_size[c] - used[c]);
        remainder[c] = exact - std::floor(exact);
        assigned += take[c];
      }
      std::vector<size_t> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return remainder[a] > remainder[b]; });
      while (assigned < counts[s]) {
        bool progressed = false;
        for (size_t c : order) {
          if (assigned == counts[s]) break;
          if (used[c] + take[c] < class_size[c]) {
            ++take[c];
            ++assigned;
            progressed = true;
          }
        }
        if (!progressed) break;
      }
      for (size_t c = 0; c < k; ++c) {
        auto begin = by_class[c].begin() + used[c];
        members[s].insert(members[s].end(), begin, begin + take[c]);
        used[c] += take[c];
      }
    }
  }
  DataSplit split;
  std::array<std::vector<UrlRecord>*, 3> outs = {&split.train, &split.val, &split.test};
  for (size_t s = 0; s < 3; ++s) {
    std::sort(members[s].begin(), members[s].end());
    outs[s]->reserve(members[s].size());
    for (size_t i : members[s]) outs[s]->push_back(records[i]);
  }
  return split;
}

DataSplit SplitByFractions(std::span<const UrlRecord> records,
                           std::array<double, 3> fractions, uint64_t seed, bool stratified,
                           int num_classes) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "fractions must be non-negative");
    total += f;
  }
  if (total > 1.0 + 1e-12) {
    throw Error(ErrorCode::kFractionOverflow, "fractions sum to " + std::to_string(total));
  }
  const double n = static_cast<double>(records.size());
  std::array<int64_t, 3> counts{};
  for (size_t s = 0; s < 3; ++s) counts[s] = static_cast<int64_t>(std::floor(fractions[s] * n));
  return SplitByCounts(records, counts, seed, stratified, num_classes);
}

}  // namespace pma
