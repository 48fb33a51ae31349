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

#ifndef PMA_TLD_H_
#define PMA_TLD_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pma/dataset.h"

namespace pma {

enum class TldClass { kCom, kCountryCode, kOtherGeneric };

// Hosts that cannot be parsed, have a single label, or are IP literals fall
// into kOtherGeneric; *parsed is cleared for them when given.
TldClass ClassifyTld(std::string_view url, bool* parsed = nullptr);

struct TldFractions {
  int64_t count = 0;
  int64_t unparsed = 0;
  double com = 0.0;
  double country_code = 0.0;
  double other = 0.0;
};

struct TldStats {
  std::vector<std::string> class_names;
  std::vector<TldFractions> per_class;

  nlohmann::json ToJson() const;
};

TldStats ComputeTldStats(std::span<const UrlRecord> records,
                         const std::vector<std::string>& class_names);

}  // namespace pma

#endif  // PMA_TLD_H_
