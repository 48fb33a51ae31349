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

#include "pma/tld.h"

#include <array>

#include "pma/errors.h"
#include "pma/url.h"

namespace pma {

TldClass ClassifyTld(std::string_view url, bool* parsed) {
  const std::string host = ExtractHost(url);
  const bool ok = !host.empty() && host.find('.') != std::string::npos && !IsIpv4(host) &&
                  host.front() != '[';
  if (parsed) *parsed = ok;
  if (!ok) return TldClass::kOtherGeneric;
  std::string_view top = TopLevelLabel(host);
  if (top == "com") return TldClass::kCom;
  if (IsCountryCodeTld(top)) return TldClass::kCountryCode;
  return TldClass::kOtherGeneric;
}

nlohmann::json TldStats::ToJson() const {
  nlohmann::json out = nlohmann::json::object();
  for (size_t c = 0; c < per_class.size(); ++c) {
    const TldFractions& f = per_class[c];
    out[class_names[c]] = {{"count", f.count},
                           {"unparsed", f.unparsed},
                           {"com", f.com},
                           {"cctld", f.country_code},
                           {"other_gtld", f.other}};
  }
  return out;
}

TldStats ComputeTldStats(std::span<const UrlRecord> records,
                         const std::vector<std::string>& class_names) {
  TldStats stats;
  stats.class_names = class_names;
  stats.per_class.resize(class_names.size());
  std::vector<std::array<int64_t, 3>> counts(class_names.size(), {0, 0, 0});
  for (const UrlRecord& r : records) {
    if (r.label < 0 || static_cast<size_t>(r.label) >= class_names.size()) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(r.label));
    }
    bool parsed = true;
    TldClass cls = ClassifyTld(r.url, &parsed);
    TldFractions& f = stats.per_class[static_cast<size_t>(r.label)];
    ++f.count;
    if (!parsed) ++f.unparsed;
    ++counts[static_cast<size_t>(r.label)][static_cast<size_t>(cls)];
  }
  for (size_t c = 0; c < class_names.size(); ++c) {
    TldFractions& f = stats.per_class[c];
    if (f.count == 0) continue;
    const double n = static_cast<double>(f.count);
    f.com = static_cast<double>(counts[c][0]) / n;
    f.country_code = static_cast<double>(counts[c][1]) / n;
    f.other = static_cast<double>(counts[c][2]) / n;
  }
  return stats;
}

}  // namespace pma
