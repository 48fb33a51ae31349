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

#ifndef PMA_URL_H_
#define PMA_URL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace pma {

// Byte range of the host inside a URL string, without scheme, userinfo, port,
// path, query or fragment. A URL without "scheme://" is read as host-first.
struct HostRange {
  size_t begin = 0;
  size_t end = 0;

  size_t size() const { return end - begin; }
};

std::optional<HostRange> FindHost(std::string_view url);
// Lowercased host with any trailing dot removed; empty when there is none.
std::string ExtractHost(std::string_view url);

// Last dot-separated label.
std::string_view TopLevelLabel(std::string_view host);
bool IsCountryCodeTld(std::string_view label);
bool IsIpv4(std::string_view host);
// Every dot-separated label matches [a-z0-9]([a-z0-9-]*[a-z0-9])?.
bool IsValidHostname(std::string_view host);

// The label a registrar sells: the one left of the public suffix. Handles the
// common two-level ccTLD forms (co.uk, com.au, ...). Range is relative to the
// host. Empty when the host has a single label or is an IP address.
std::optional<HostRange> RegistrableLabel(std::string_view host);

}  // namespace pma

#endif  // PMA_URL_H_
