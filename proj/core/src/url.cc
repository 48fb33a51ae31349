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

#include "pma/url.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

namespace pma {
namespace {

// ISO 3166-1 alpha-2 plus the IANA exceptions in active use as ccTLDs.
constexpr std::array<std::string_view, 253> kCountryCodes = {
    "ac", "ad", "ae", "af", "ag", "ai", "al", "am", "ao", "aq", "ar", "as", "at", "au",
    "aw", "ax", "az", "ba", "bb", "bd", "be", "bf", "bg", "bh", "bi", "bj", "bl", "bm",
    "bn", "bo", "bq", "br", "bs", "bt", "bv", "bw", "by", "bz", "ca", "cc", "cd", "cf",
    "cg", "ch", "ci", "ck", "cl", "cm", "cn", "co", "cr", "cu", "cv", "cw", "cx", "cy",
    "cz", "de", "dj", "dk", "dm", "do", "dz", "ec", "ee", "eg", "eh", "er", "es", "et",
    "eu", "fi", "fj", "fk", "fm", "fo", "fr", "ga", "gb", "gd", "ge", "gf", "gg", "gh",
    "gi", "gl", "gm", "gn", "gp", "gq", "gr", "gs", "gt", "gu", "gw", "gy", "hk", "hm",
    "hn", "hr", "ht", "hu", "id", "ie", "il", "im", "in", "io", "iq", "ir", "is", "it",
    "je", "jm", "jo", "jp", "ke", "kg", "kh", "ki", "km", "kn", "kp", "kr", "kw", "ky",
    "kz", "la", "lb", "lc", "li", "lk", "lr", "ls", "lt", "lu", "lv", "ly", "ma", "mc",
    "md", "me", "mf", "mg", "mh", "mk", "ml", "mm", "mn", "mo", "mp", "mq", "mr", "ms",
    "mt", "mu", "mv", "mw", "mx", "my", "mz", "na", "nc", "ne", "nf", "ng", "ni", "nl",
    "no", "np", "nr", "nu", "nz", "om", "pa", "pe", "pf", "pg", "ph", "pk", "pl", "pm",
    "pn", "pr", "ps", "pt", "pw", "py", "qa", "re", "ro", "rs", "ru", "rw", "sa", "sb",
    "sc", "sd", "se", "sg", "sh", "si", "sj", "sk", "sl", "sm", "sn", "so", "sr", "ss",
    "st", "su", "sv", "sx", "sy", "sz", "tc", "td", "tf", "tg", "th", "tj", "tk", "tl",
    "tm", "tn", "to", "tr", "tt", "tv", "tw", "tz", "ua", "ug", "uk", "um", "us", "uy",
    "uz", "va", "vc", "ve", "vg", "vi", "vn", "vu", "wf", "ws", "ye", "yt", "za", "zm",
    "zw"};

constexpr std::array<std::string_view, 9> kSecondLevel = {
    "ac", "co", "com", "edu", "gov", "ltd", "net", "org", "plc"};

bool IsSchemeChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

}  // namespace

std::optional<HostRange> FindHost(std::string_view url) {
  size_t start = 0;
  const size_t sep = url.find("://");
  if (sep != std::string_view::npos && sep > 0 &&
      std::isalpha(static_cast<unsigned char>(url[0])) &&
      std::all_of(url.begin(), url.begin() + static_cast<std::ptrdiff_t>(sep), IsSchemeChar)) {
    start = sep + 3;
  } else if (url.substr(0, 2) == "//") {
    start = 2;
  }
  size_t authority_end = url.find_first_of("/?#", start);
  if (authority_end == std::string_view::npos) authority_end = url.size();
  std::string_view authority = url.substr(start, authority_end - start);
  const size_t at = authority.rfind('@');
  size_t begin = start + (at == std::string_view::npos ? 0 : at + 1);
  size_t end = authority_end;
  if (begin < end && url[begin] == '[') {
    const size_t close = url.find(']', begin);
    if (close == std::string_view::npos || close >= end) return std::nullopt;
    end = close + 1;
  } else {
    const size_t colon = url.find(':', begin);
    if (colon != std::string_view::npos && colon < end) end = colon;
  }
  if (begin >= end) return std::nullopt;
  return HostRange{begin, end};
}

std::string ExtractHost(std::string_view url) {
  auto range = FindHost(url);
  if (!range) return {};
  std::string host(url.substr(range->begin, range->size()));
  for (char& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  while (!host.empty() && host.back() == '.') host.pop_back();
  return host;
}

std::string_view TopLevelLabel(std::string_view host) {
  const size_t dot = host.rfind('.');
  return dot == std::string_view::npos ? host : host.substr(dot + 1);
}

bool IsCountryCodeTld(std::string_view label) {
  return std::binary_search(kCountryCodes.begin(), kCountryCodes.end(), label);
}

bool IsIpv4(std::string_view host) {
  int parts = 0;
  size_t i = 0;
  while (i <= host.size()) {
    size_t j = host.find('.', i);
    if (j == std::string_view::npos) j = host.size();
    std::string_view part = host.substr(i, j - i);
    if (part.empty() || part.size() > 3 ||
        !std::all_of(part.begin(), part.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return false;
    }
    ++parts;
    i = j + 1;
  }
  return parts == 4;
}

bool IsValidHostname(std::string_view host) {
  if (host.empty()) return false;
  size_t i = 0;
  while (i <= host.size()) {
    size_t j = host.find('.', i);
    if (j == std::string_view::npos) j = host.size();
    std::string_view label = host.substr(i, j - i);
    if (label.empty() || label.front() == '-' || label.back() == '-') return false;
    for (char c : label) {
      if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
    }
    i = j + 1;
  }
  return true;
}

std::optional<HostRange> RegistrableLabel(std::string_view host) {
  if (IsIpv4(host) || host.empty() || host.front() == '[') return std::nullopt;
  std::vector<HostRange> labels;
  size_t i = 0;
  while (i <= host.size()) {
    size_t j = host.find('.', i);
    if (j == std::string_view::npos) j = host.size();
    labels.push_back({i, j});
    i = j + 1;
  }
  if (labels.size() < 2) return std::nullopt;
  size_t suffix_labels = 1;
  auto text = [&](const HostRange& r) { return host.substr(r.begin, r.size()); };
  if (labels.size() >= 3 && IsCountryCodeTld(text(labels.back())) &&
      std::binary_search(kSecondLevel.begin(), kSecondLevel.end(),
                         text(labels[labels.size() - 2]))) {
    suffix_labels = 2;
  }
  HostRange label = labels[labels.size() - 1 - suffix_labels];
  if (label.size() == 0) return std::nullopt;
  return label;
}

}  // namespace pma
