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

#ifndef PMA_SYNTH_H_
#define PMA_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pma/dataset.h"
#include "pma/rng.h"

namespace pma {

// Stand-in corpus in the Grambeddings two-column layout for machines without
// the real download. Benign URLs are crawl-like; malicious ones mix phishing
// kits, brand impersonation, IP hosts and compromised sites, with a share of
// each class drawn to resemble the other. TLD classes follow the published
// per-class .com / ccTLD / other mix.
struct SynthOptions {
  int64_t count = 14000;
  double malicious_fraction = 0.5;
  uint64_t seed = 0;
};

std::string SynthesizeUrl(bool malicious, Rng& rng);

// Exactly round(count * malicious_fraction) malicious rows, in shuffled order.
// Record i draws from its own substream.
std::vector<UrlRecord> SynthesizeCorpus(const SynthOptions& options);

}  // namespace pma

#endif  // PMA_SYNTH_H_
