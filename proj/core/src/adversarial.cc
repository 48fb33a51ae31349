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

#include "pma/adversarial.h"

#include <algorithm>
#include <cmath>

#include "pma/errors.h"

namespace pma {
namespace {

bool IsSeparator(char c) { return c == '.' || c == '-'; }

std::string HostText(std::string_view url, const HostRange& r) {
  return std::string(url.substr(r.begin, r.size()));
}

}  // namespace

DomainTags TagDomainSubwords(std::string_view url, const Vocab& vocab) {
  auto range = FindHost(url);
  if (!range) throw Error(ErrorCode::kNoHost, "no host in '" + std::string(url) + "'");
  const std::string host = HostText(url, *range);
  if (!IsValidHostname(host)) {
    throw Error(ErrorCode::kNoHost, "host '" + host + "' is not a lowercase DNS name");
  }
  auto label = RegistrableLabel(host);
  if (!label) {
    throw Error(ErrorCode::kUnsplittable, "host '" + host + "' has no registrable label");
  }
  DomainTags tags;
  tags.host = *range;
  tags.subwords = Tokenize(std::string_view(host).substr(label->begin, label->size()), vocab);
  size_t at = label->begin;
  for (size_t i = 0; i < tags.subwords.size(); ++i) {
    at += tags.subwords[i].size();
    if (i + 1 == tags.subwords.size()) break;
    if (IsSeparator(host[at - 1]) || IsSeparator(host[at])) continue;
    tags.boundaries.push_back(at);
  }
  if (at != label->end) {
    throw Error(ErrorCode::kUnsplittable, "subwords do not tile the label of '" + host + "'");
  }
  if (tags.subwords.size() < 2 || tags.boundaries.empty()) {
    throw Error(ErrorCode::kUnsplittable, "registrable label of '" + host + "' is one subword");
  }
  return tags;
}

HyphenInsertion InsertHyphens(std::string_view url, const DomainTags& tags, int k, Rng& rng) {
  if (k < 1 || static_cast<size_t>(k) > tags.boundaries.size()) {
    throw Error(ErrorCode::kNoBoundaries,
                "need 1 <= k <= " + std::to_string(tags.boundaries.size()) + ", got k=" +
                    std::to_string(k));
  }
  std::vector<size_t> pool = tags.boundaries;
  for (size_t i = 0; i < static_cast<size_t>(k); ++i) {
    const size_t j = i + static_cast<size_t>(rng.Below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  HyphenInsertion out;
  out.offsets.assign(pool.begin(), pool.begin() + k);
  std::sort(out.offsets.begin(), out.offsets.end());
  out.url = std::string(url);
  for (auto it = out.offsets.rbegin(); it != out.offsets.rend(); ++it) {
    out.url.insert(tags.host.begin + *it, 1, '-');
  }
  return out;
}

std::string RemoveInsertedHyphens(std::string_view url, const HostRange& host,
                                  std::span<const size_t> offsets) {
  std::string out(url);
  for (size_t i = offsets.size(); i-- > 0;) {
    const size_t pos = host.begin + offsets[i] + i;
    if (pos >= out.size() || out[pos] != '-') {
      throw Error(ErrorCode::kInvalidArgument, "no inserted hyphen at offset " +
                                                   std::to_string(offsets[i]));
    }
    out.erase(pos, 1);
  }
  return out;
}

nlohmann::json AttackOptions::ToJson() const {
  return {{"benign", benign},       {"malicious", malicious},
          {"adversarial", adversarial}, {"swap_fraction", swap_fraction},
          {"hyphens", hyphens},     {"seed", seed},
          {"max_attempts", max_attempts}};
}

nlohmann::json AdversarialSet::Provenance(const AttackOptions& options) const {
  nlohmann::json rows = nlohmann::json::array();
  const size_t first = records.size() - attacks.size();
  for (size_t j = 0; j < attacks.size(); ++j) {
    const AttackRecord& a = attacks[j];
    rows.push_back({{"row", first + j},
                    {"original_url", a.original_url},
                    {"base_url", a.base_url},
                    {"adversarial_url", a.adversarial_url},
                    {"insertion_offsets", a.insertion_offsets},
                    {"donor_url", a.donor_url ? nlohmann::json(*a.donor_url) : nlohmann::json()},
                    {"substream", a.substream},
                    {"attempts", a.attempts}});
  }
  return {{"options", options.ToJson()},
          {"skipped_unsplittable", skipped_unsplittable},
          {"skipped_in_train", skipped_in_train},
          {"eligible_benign", eligible_benign},
          {"eligible_donors", eligible_donors},
          {"records", rows}};
}

AdversarialSet BuildAdversarialTestset(std::span<const UrlRecord> test,
                                       const std::unordered_set<std::string>& train_urls,
                                       const Vocab& vocab, const AttackOptions& options) {
  if (options.benign < 0 || options.malicious < 0 || options.adversarial < 0 ||
      options.hyphens < 1 || options.max_attempts < 1 ||
      !(options.swap_fraction >= 0.0 && options.swap_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "attack options out of range");
  }
  std::vector<size_t> benign;
  std::vector<size_t> malicious;
  for (size_t i = 0; i < test.size(); ++i) (test[i].label == 0 ? benign : malicious).push_back(i);
  auto require = [](int64_t want, size_t have, const char* what) {
    if (static_cast<size_t>(want) > have) {
      throw Error(ErrorCode::kInsufficientSource, "need " + std::to_string(want) + " " + what +
                                                      " URLs, test set has " + std::to_string(have));
    }
  };
  require(options.benign, benign.size(), "benign");
  require(options.malicious, malicious.size(), "malicious");

  AdversarialSet set;
  const Rng root(DeriveSeed(options.seed, "attack"));
  auto sample = [&](std::vector<size_t> pool, int64_t count, const char* label) {
    Rng rng = root.Fork(label);
    for (size_t i = 0; i < static_cast<size_t>(count); ++i) {
      const size_t j = i + static_cast<size_t>(rng.Below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<size_t>(count));
    return pool;
  };
  for (size_t i : sample(benign, options.benign, "benign")) {
    set.records.push_back({test[i].url, 0, "benign"});
  }
  for (size_t i : sample(malicious, options.malicious, "malicious")) {
    set.records.push_back({test[i].url, 1, "malicious"});
  }
  if (options.adversarial == 0) return set;

  std::vector<size_t> sources;
  for (size_t i : benign) {
    auto range = FindHost(test[i].url);
    if (range && IsValidHostname(HostText(test[i].url, *range))) sources.push_back(i);
  }
  std::vector<std::pair<size_t, std::string>> donors;
  if (options.swap_fraction > 0.0) {
    for (size_t i : malicious) {
      try {
        DomainTags tags = TagDomainSubwords(test[i].url, vocab);
        if (tags.boundaries.size() >= static_cast<size_t>(options.hyphens)) {
          donors.emplace_back(i, HostText(test[i].url, tags.host));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoHost && e.code() != ErrorCode::kUnsplittable) throw;
      }
    }
  }
  set.eligible_benign = static_cast<int64_t>(sources.size());
  set.eligible_donors = static_cast<int64_t>(donors.size());
  if (sources.empty()) {
    throw Error(ErrorCode::kInsufficientSource, "no benign test URL has a usable host");
  }
  if (options.swap_fraction > 0.0 && donors.empty()) {
    throw Error(ErrorCode::kInsufficientSource, "no malicious test URL can donate a host");
  }

  // Exactly round(n * swap_fraction) swapped rows, positions shuffled.
  std::vector<uint8_t> swap(static_cast<size_t>(options.adversarial), 0);
  const int64_t n_swap = std::llround(static_cast<double>(options.adversarial) * options.swap_fraction);
  std::fill(swap.begin(), swap.begin() + n_swap, 1);
  root.Fork("kinds").Shuffle(std::span<uint8_t>(swap));

  const uint64_t record_seed = DeriveSeed(options.seed, "attack-records");
  for (int64_t j = 0; j < options.adversarial; ++j) {
    Rng rng(record_seed, static_cast<uint64_t>(j));
    bool accepted = false;
    for (int attempt = 1; attempt <= options.max_attempts && !accepted; ++attempt) {
      const UrlRecord& source = test[sources[static_cast<size_t>(rng.Below(sources.size()))]];
      AttackRecord record;
      record.original_url = source.url;
      record.base_url = source.url;
      if (swap[static_cast<size_t>(j)]) {
        const auto& [donor, donor_host] = donors[static_cast<size_t>(rng.Below(donors.size()))];
        HostRange h = *FindHost(source.url);
        record.base_url = source.url.substr(0, h.begin) + donor_host + source.url.substr(h.end);
        record.donor_url = test[donor].url;
      }
      DomainTags tags;
      try {
        tags = TagDomainSubwords(record.base_url, vocab);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnsplittable) throw;
        ++set.skipped_unsplittable;
        continue;
      }
      if (tags.boundaries.size() < static_cast<size_t>(options.hyphens)) {
        ++set.skipped_unsplittable;
        continue;
      }
      HyphenInsertion ins = InsertHyphens(record.base_url, tags, options.hyphens, rng);
      if (train_urls.count(ins.url) > 0) {
        ++set.skipped_in_train;
        continue;
      }
      record.adversarial_url = std::move(ins.url);
      record.insertion_offsets = std::move(ins.offsets);
      record.substream = static_cast<uint64_t>(j);
      record.attempts = attempt;
      set.records.push_back({record.adversarial_url, 1,
                             record.donor_url ? "adversarial-swap" : "adversarial-hyphen"});
      set.attacks.push_back(std::move(record));
      accepted = true;
    }
    if (!accepted) {
      throw Error(ErrorCode::kInsufficientSource,
                  "adversarial record " + std::to_string(j) + " found no usable source in " +
                      std::to_string(options.max_attempts) + " draws");
    }
  }
  return set;
}

}  // namespace pma
