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

#ifndef PMA_RNG_H_
#define PMA_RNG_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace pma {

// 64-bit FNV-1a mixed through a SplitMix64 finalizer. Used to derive labeled
// sub-seeds ("split", "init", "attack", ...) from one user seed.
uint64_t DeriveSeed(uint64_t seed, std::string_view label);

// Counter-based generator (Philox4x32-10). The stream is a pure function of
// (key, stream id, block counter), so results never depend on how work is
// scheduled and are identical on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0, uint64_t stream = 0);

  uint32_t NextU32();
  uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Standard normal via Box-Muller.
  double Normal();
  // Uniform integer on [0, n). n must be positive.
  uint64_t Below(uint64_t n);

  // Independent generator keyed by the same seed but a different stream.
  Rng Substream(uint64_t index) const;
  // Independent generator keyed by a labeled derivation of the seed.
  Rng Fork(std::string_view label) const;

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  void Refill();

  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_ = 0;
  std::array<uint32_t, 4> buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace pma

#endif  // PMA_RNG_H_
