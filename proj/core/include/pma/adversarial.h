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

#ifndef PMA_ADVERSARIAL_H_
#define PMA_ADVERSARIAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "pma/dataset.h"
#include "pma/rng.h"
#include "pma/tokenizer.h"
#include "pma/url.h"

namespace pma {

struct DomainTags {
  HostRange host;  // within the url
  std::vector<std::string> subwords;  // of the registrable label
  // Host-relative insertion points between consecutive subwords of the
  // registrable label, never next to '.' or '-'.
  std::vector<size_t> boundaries;
};

// Splits the registrable label with the BPE vocabulary. Throws NoHost when the
// url has no usable host and Unsplittable when the label is one subword or no
// boundary survives the exclusions.
DomainTags TagDomainSubwords(std::string_view url, const Vocab& vocab);

struct HyphenInsertion {
  std::string url;
  // Host-relative offsets in the input url, ascending.
  std::vector<size_t> offsets;
};

// Picks k distinct boundaries uniformly and inserts '-' at each. Throws
// NoBoundaries unless 1 <= k <= boundaries.size().
HyphenInsertion InsertHyphens(std::string_view url, const DomainTags& tags, int k, Rng& rng);

// Removes the hyphens an insertion added, recovering its input.
std::string RemoveInsertedHyphens(std::string_view url, const HostRange& host,
                                  std::span<const size_t> offsets);

struct AttackRecord {
  std::string original_url;  // benign source
  std::string base_url;      // after the optional domain swap
  std::string adversarial_url;
  std::vector<size_t> insertion_offsets;
  std::optional<std::string> donor_url;
  int32_t label = 1;
  uint64_t substream = 0;
  int attempts = 0;
};

struct AttackOptions {
  // Defaults keep the 2:1:1 composition at desk scale.
  int64_t benign = 8000;
  int64_t malicious = 4000;
  int64_t adversarial = 4000;
  double swap_fraction = 0.5;
  int hyphens = 1;
  uint64_t seed = 0;
  int max_attempts = 64;

  nlohmann::json ToJson() const;
};

struct AdversarialSet {
  // Benign rows, then original malicious rows, then adversarial rows.
  std::vector<UrlRecord> records;
  std::vector<AttackRecord> attacks;
  int64_t skipped_unsplittable = 0;
  int64_t skipped_in_train = 0;
  int64_t eligible_benign = 0;
  int64_t eligible_donors = 0;

  // Offsets, donors and substreams per adversarial row, for auditing.
  nlohmann::json Provenance(const AttackOptions& options) const;
};

// Adversarial rows come from benign test URLs. In round(n * swap_fraction)
// of them the host is first replaced by a random malicious donor's host (path
// and query kept); every row then gets hyphens inserted into the host. Candidates
// that are unsplittable or whose result occurs in `train_urls` are redrawn
// from the same per-record substream. Throws InsufficientSource when the
// test set cannot supply the counts.
AdversarialSet BuildAdversarialTestset(std::span<const UrlRecord> test,
                                       const std::unordered_set<std::string>& train_urls,
                                       const Vocab& vocab, const AttackOptions& options);

}  // namespace pma

#endif  // PMA_ADVERSARIAL_H_
