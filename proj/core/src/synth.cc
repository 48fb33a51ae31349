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

#include "pma/synth.h"

#include <array>
#include <cmath>
#include <string_view>

#include "pma/errors.h"

namespace pma {
namespace {

constexpr std::array<std::string_view, 64> kWords = {
    "news",   "shop",    "tech",   "city",    "travel", "music",  "food",    "book",
    "blog",   "cloud",   "data",   "home",    "green",  "river",  "media",   "sport",
    "health", "garden",  "studio", "design",  "market", "school", "photo",   "film",
    "games",  "auto",    "energy", "global",  "daily",  "world",  "local",   "smart",
    "north",  "blue",    "open",   "light",   "star",   "true",   "urban",   "wild",
    "art",    "craft",   "kitchen", "pet",    "baby",   "fashion", "style",  "sound",
    "radio",  "tv",      "press",  "journal", "review", "guide",  "academy", "lab",
    "forum",  "hub",     "point",  "zone",    "land",   "house",  "park",    "line"};

constexpr std::array<std::string_view, 24> kBrands = {
    "paypal",  "apple",   "microsoft", "amazon",   "netflix",   "chase",
    "wellsfargo", "bankofamerica", "office365", "outlook", "facebook", "instagram",
    "dropbox", "docusign", "adobe",    "ebay",     "linkedin",  "google",
    "icloud",  "citibank", "dhl",      "usps",     "steam",     "coinbase"};

constexpr std::array<std::string_view, 20> kLure = {
    "login",   "signin",  "verify",  "secure",  "account", "update", "confirm",
    "banking", "webscr",  "auth",    "session", "wallet",  "unlock", "support",
    "billing", "recover", "validate", "service", "alert",  "access"};

constexpr std::array<std::string_view, 26> kPaths = {
    "about",    "news",    "article", "products", "category", "blog",  "en",
    "docs",     "help",    "contact", "events",   "team",     "press", "store",
    "search",   "music",   "video",   "gallery",  "faq",      "terms", "privacy",
    "careers",  "archive", "2019",    "2020",     "2021"};

constexpr std::array<std::string_view, 14> kCountry = {
    "de", "co.uk", "fr", "jp", "com.br", "ru", "it", "nl", "com.au", "ca", "in", "es", "pl", "ch"};
constexpr std::array<std::string_view, 11> kBenignOther = {
    "org", "net", "edu", "gov", "info", "biz", "online", "site", "app", "dev", "news"};
constexpr std::array<std::string_view, 11> kMaliciousOther = {
    "xyz", "top", "online", "info", "net", "org", "site", "club", "live", "app", "icu"};

template <typename List>
std::string_view Pick(const List& list, Rng& rng) {
  return list[static_cast<size_t>(rng.Below(list.size()))];
}

bool Chance(double p, Rng& rng) { return rng.Uniform() < p; }

std::string RandomToken(Rng& rng, int min_len, int max_len, bool digits) {
  const std::string_view alphabet =
      digits ? "abcdefghijklmnopqrstuvwxyz0123456789" : "abcdefghijklmnopqrstuvwxyz";
  const int len = min_len + static_cast<int>(rng.Below(static_cast<uint64_t>(max_len - min_len + 1)));
  std::string s;
  for (int i = 0; i < len; ++i) s += alphabet[rng.Below(alphabet.size())];
  return s;
}

enum class Tld { kCom, kCountry, kOther };

Tld DrawTld(bool malicious, Rng& rng) {
  const double u = rng.Uniform();
  const double com = malicious ? 0.6010 : 0.5217;
  const double cc = malicious ? 0.1182 : 0.1204;
  if (u < com) return Tld::kCom;
  if (u < com + cc) return Tld::kCountry;
  return Tld::kOther;
}

std::string Suffix(Tld tld, bool malicious, Rng& rng) {
  switch (tld) {
    case Tld::kCom: return "com";
    case Tld::kCountry: return std::string(Pick(kCountry, rng));
    case Tld::kOther:
      return std::string(malicious ? Pick(kMaliciousOther, rng) : Pick(kBenignOther, rng));
  }
  return "com";
}

std::string BenignName(Rng& rng) {
  std::string name(Pick(kWords, rng));
  if (Chance(0.55, rng)) name += Pick(kWords, rng);
  if (Chance(0.08, rng)) name += std::to_string(rng.Below(100));
  return name;
}

std::string BenignPath(Rng& rng) {
  std::string path;
  const int depth = static_cast<int>(rng.Below(4));
  for (int i = 0; i < depth; ++i) {
    path += '/';
    path += Chance(0.2, rng) ? RandomToken(rng, 4, 10, false) + "-" + RandomToken(rng, 3, 8, false)
                              : std::string(Pick(kPaths, rng));
  }
  if (depth > 0 && Chance(0.3, rng)) path += ".html";
  if (Chance(0.12, rng)) path += "?id=" + std::to_string(rng.Below(100000));
  if (path.empty() && Chance(0.5, rng)) path = "/";
  return path;
}

std::string Benign(Rng& rng) {
  const Tld tld = DrawTld(false, rng);
  std::string url = Chance(0.75, rng) ? "https://" : "http://";
  if (Chance(0.55, rng)) url += "www.";
  else if (Chance(0.15, rng)) url += std::string(Pick(kPaths, rng)) + ".";
  url += BenignName(rng) + "." + Suffix(tld, false, rng);
  // Legitimate account pages look like lures.
  if (Chance(0.08, rng)) {
    url += "/" + std::string(Pick(kLure, rng));
    if (Chance(0.5, rng)) url += "?next=%2F" + std::string(Pick(kPaths, rng));
    return url;
  }
  return url + BenignPath(rng);
}

std::string Malicious(Rng& rng) {
  const Tld tld = DrawTld(true, rng);
  std::string url = Chance(0.45, rng) ? "https://" : "http://";
  const std::string brand(Pick(kBrands, rng));
  const std::string lure(Pick(kLure, rng));
  const double kind = rng.Uniform();
  if (tld == Tld::kOther && kind < 0.12) {
    url += std::to_string(1 + rng.Below(223)) + "." + std::to_string(rng.Below(256)) + "." +
           std::to_string(rng.Below(256)) + "." + std::to_string(1 + rng.Below(254));
    return url + "/" + brand + "/" + lure + ".php";
  }
  const std::string suffix = Suffix(tld, true, rng);
  if (kind < 0.22) {
    // Compromised site: benign host, kit dropped under a deep path.
    url += (Chance(0.4, rng) ? "www." : "") + BenignName(rng) + "." + suffix;
    const char* roots[] = {"/wp-content/uploads/", "/wp-includes/", "/images/", "/css/", "/.well-known/"};
    url += roots[rng.Below(5)];
    if (Chance(0.6, rng)) url += std::to_string(2018 + rng.Below(4)) + "/";
    url += Chance(0.5, rng) ? brand + "/" : RandomToken(rng, 4, 9, true) + "/";
    url += Chance(0.6, rng) ? lure + ".php" : "index.html";
    return url;
  }
  if (kind < 0.45) {
    // Brand impersonation in the labels.
    const int form = static_cast<int>(rng.Below(3));
    if (form == 0) url += brand + "-" + lure + "." + suffix;
    if (form == 1) url += lure + "." + brand + ".com-" + RandomToken(rng, 3, 8, true) + "." + suffix;
    if (form == 2) url += brand + lure + RandomToken(rng, 0, 3, true) + "." + suffix;
    url += "/" + std::string(Pick(kLure, rng));
    if (Chance(0.5, rng)) url += "/" + RandomToken(rng, 8, 24, true);
    return url;
  }
  if (kind < 0.7) {
    // Throwaway random host.
    url += RandomToken(rng, 5, 14, Chance(0.5, rng)) + "." + suffix;
    if (Chance(0.6, rng)) url += "/" + lure;
    if (Chance(0.7, rng)) url += "/?" + std::string(Pick(kLure, rng)) + "=" + RandomToken(rng, 10, 32, true);
    return url;
  }
  if (kind < 0.85) {
    // Kit on a look-alike host with a long query.
    url += BenignName(rng) + "-" + lure + "." + suffix;
    url += "/" + brand + "/" + lure + ".php?cmd=_" + lure + "&session=" + RandomToken(rng, 16, 40, true);
    return url;
  }
  // Plain-looking malicious pages.
  url += (Chance(0.3, rng) ? "www." : "") + BenignName(rng) + "." + suffix + BenignPath(rng);
  return url;
}

}  // namespace

std::string SynthesizeUrl(bool malicious, Rng& rng) {
  return malicious ? Malicious(rng) : Benign(rng);
}

std::vector<UrlRecord> SynthesizeCorpus(const SynthOptions& options) {
  if (options.count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be positive");
  if (!(options.malicious_fraction >= 0.0 && options.malicious_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "malicious_fraction must lie in [0, 1]");
  }
  const int64_t malicious = std::llround(static_cast<double>(options.count) * options.malicious_fraction);
  std::vector<int32_t> labels(static_cast<size_t>(options.count), 0);
  for (int64_t i = 0; i < malicious; ++i) labels[static_cast<size_t>(i)] = 1;
  Rng base(DeriveSeed(options.seed, "synth"));
  Rng order = base.Fork("order");
  order.Shuffle(std::span<int32_t>(labels));
  std::vector<UrlRecord> records;
  records.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    Rng rng = base.Substream(i + 1);
    records.push_back({SynthesizeUrl(labels[i] == 1, rng), labels[i], "synthetic"});
  }
  return records;
}

}  // namespace pma
