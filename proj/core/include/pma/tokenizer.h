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

#ifndef PMA_TOKENIZER_H_
#define PMA_TOKENIZER_H_

#include <bitset>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pma {

// Subword ids: specials, then one token per byte value, then merges in rank
// order. Character ids share the special/byte layout.
inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kUnkId = 1;
inline constexpr int32_t kClsId = 2;
inline constexpr int32_t kSepId = 3;
inline constexpr int32_t kNumSpecialIds = 4;
inline constexpr int32_t kBaseVocabSize = kNumSpecialIds + 256;
inline constexpr int32_t kCharVocabSize = kBaseVocabSize;
inline constexpr int kDefaultMaxLen = 200;
inline constexpr int kDefaultVocabSize = 4096;

using Merge = std::pair<std::string, std::string>;

class Vocab {
 public:
  // Base vocabulary: specials and the 256 byte tokens, no merges.
  Vocab();

  // Replays merges in rank order; `known_high_bytes` marks bytes >= 0x80 that
  // were seen in training (ASCII is always known).
  static Vocab FromMerges(const std::vector<Merge>& merges,
                          const std::bitset<256>& known_high_bytes);

  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
  int32_t char_vocab_size() const { return kCharVocabSize; }
  const std::vector<Merge>& merges() const { return merges_; }

  // Non-special token lookup.
  std::optional<int32_t> Find(std::string_view token) const;
  // Throws UnknownId for ids outside the table.
  const std::string& Token(int32_t id) const;
  bool ByteKnown(uint8_t byte) const;
  // UNK for unknown high bytes.
  int32_t ByteTokenId(uint8_t byte) const;
  int32_t CharId(uint8_t byte) const;
  // Rank of merging (left, right), or -1.
  int MergeRank(int32_t left, int32_t right) const;
  int32_t MergeOutput(int rank) const { return merge_outputs_[static_cast<size_t>(rank)]; }
  const std::bitset<256>& known_high_bytes() const { return known_high_bytes_; }

  // "pma-bpe-v1" text format.
  std::string Serialize() const;
  static Vocab Parse(std::string_view text);
  void Save(const std::filesystem::path& path) const;
  static Vocab Load(const std::filesystem::path& path);

 private:
  int32_t AddToken(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> ids_;
  std::vector<Merge> merges_;
  std::vector<int32_t> merge_outputs_;
  std::unordered_map<uint64_t, int> merge_ranks_;
  std::bitset<256> known_high_bytes_;
};

struct BpeOptions {
  // Pairs rarer than this are never merged.
  int64_t min_pair_count = 2;
};

// Learns merges on lowercased URLs until the table holds vocab_size tokens.
// Ties in pair frequency go to the lexicographically smaller (left, right).
Vocab TrainBpe(std::span<const std::string> corpus, int vocab_size,
               BpeOptions options = {});

struct TokenSpan {
  int32_t start = 0;
  int32_t length = 0;
};

// Aligned subword and character views of one URL. Every token, including
// CLS/SEP/PAD, owns a span; specials own one synthetic character.
struct TokenSequence {
  std::vector<int32_t> subword_ids;
  std::vector<int32_t> char_ids;
  std::vector<TokenSpan> spans;
  // Tokens (CLS..SEP) and characters before padding.
  int32_t length = 0;
  int32_t char_length = 0;

  int32_t size() const { return static_cast<int32_t>(subword_ids.size()); }
  int32_t char_size() const { return static_cast<int32_t>(char_ids.size()); }
  // Drops the PAD tail.
  TokenSequence Trimmed() const;
  std::vector<uint8_t> TokenMask() const;
  std::vector<uint8_t> CharMask() const;
};

// Lowercases ASCII, lays out CLS + tokens + SEP, keeps the prefix when longer
// than max_len and pads with PAD up to max_len. Throws EmptyInput.
TokenSequence Encode(std::string_view url, const Vocab& vocab,
                     int max_len = kDefaultMaxLen);

// Concatenates non-special tokens; UNK renders as '?'. Throws UnknownId.
std::string Decode(const TokenSequence& seq, const Vocab& vocab);

// Subword strings of already-lowercased text, no specials.
std::vector<std::string> Tokenize(std::string_view text, const Vocab& vocab);

// ASCII lowercasing after trimming surrounding whitespace.
std::string NormalizeUrl(std::string_view url);

}  // namespace pma

#endif  // PMA_TOKENIZER_H_
