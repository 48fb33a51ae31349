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

#include "pma/tokenizer.h"

#include <algorithm>
#include <climits>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "pma/errors.h"

namespace pma {
namespace {

constexpr const char* kVocabMagic = "pma-bpe-v1";
constexpr const char* kSpecialNames[kNumSpecialIds] = {"[PAD]", "[UNK]",
                                                       "[CLS]", "[SEP]"};

uint64_t PairKey(int32_t left, int32_t right) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(left)) << 32) |
         static_cast<uint32_t>(right);
}

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Maximal runs of word bytes, or of other bytes.
std::vector<std::string_view> PreTokenize(std::string_view text) {
  std::vector<std::string_view> words;
  size_t start = 0;
  for (size_t i = 1; i <= text.size(); ++i) {
    if (i == text.size() ||
        IsWordByte(static_cast<unsigned char>(text[i])) !=
            IsWordByte(static_cast<unsigned char>(text[i - 1]))) {
      words.push_back(text.substr(start, i - start));
      start = i;
    }
  }
  if (text.empty()) words.clear();
  return words;
}

std::vector<int32_t> EncodeWord(std::string_view word, const Vocab& vocab) {
  std::vector<int32_t> syms;
  syms.reserve(word.size());
  for (unsigned char c : word) syms.push_back(vocab.ByteTokenId(c));
  while (syms.size() > 1) {
    int best_rank = INT_MAX;
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      int r = vocab.MergeRank(syms[i], syms[i + 1]);
      if (r >= 0 && r < best_rank) best_rank = r;
    }
    if (best_rank == INT_MAX) break;
    const auto& [left_str, right_str] = vocab.merges()[static_cast<size_t>(best_rank)];
    int32_t left = *vocab.Find(left_str);
    int32_t right = *vocab.Find(right_str);
    int32_t merged = vocab.MergeOutput(best_rank);
    std::vector<int32_t> next;
    next.reserve(syms.size());
    for (size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
        next.push_back(merged);
        i += 2;
      } else {
        next.push_back(syms[i]);
        ++i;
      }
    }
    syms.swap(next);
  }
  return syms;
}

std::string Escape(std::string_view s) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c < 0x20 || c >= 0x7F || c == ' ') {
      out += "\\x";
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string Unescape(std::string_view s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) throw Error(ErrorCode::kBadVocab, "dangling escape");
    char e = s[++i];
    if (e == '\\') {
      out += '\\';
    } else if (e == 't') {
      out += '\t';
    } else if (e == 'n') {
      out += '\n';
    } else if (e == 'x' && i + 2 < s.size() + 0 && HexValue(s[i + 1]) >= 0 &&
               HexValue(s[i + 2]) >= 0) {
      out += static_cast<char>(HexValue(s[i + 1]) * 16 + HexValue(s[i + 2]));
      i += 2;
    } else {
      throw Error(ErrorCode::kBadVocab, "bad escape in vocab file");
    }
  }
  return out;
}

}  // namespace

std::string NormalizeUrl(std::string_view url) {
  size_t begin = 0;
  size_t end = url.size();
  while (begin < end && IsSpace(static_cast<unsigned char>(url[begin]))) ++begin;
  while (end > begin && IsSpace(static_cast<unsigned char>(url[end - 1]))) --end;
  std::string out(url.substr(begin, end - begin));
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Vocab::Vocab() {
  for (const char* name : kSpecialNames) tokens_.emplace_back(name);
  for (int b = 0; b < 256; ++b) {
    std::string token(1, static_cast<char>(b));
    ids_.emplace(token, static_cast<int32_t>(tokens_.size()));
    tokens_.push_back(std::move(token));
  }
}

int32_t Vocab::AddToken(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  int32_t id = static_cast<int32_t>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

Vocab Vocab::FromMerges(const std::vector<Merge>& merges,
                        const std::bitset<256>& known_high_bytes) {
  Vocab vocab;
  vocab.known_high_bytes_ = known_high_bytes;
  for (int b = 0; b < 0x80; ++b) vocab.known_high_bytes_.reset(static_cast<size_t>(b));
  for (const auto& [left, right] : merges) {
    auto l = vocab.Find(left);
    auto r = vocab.Find(right);
    if (!l || !r) {
      throw Error(ErrorCode::kBadVocab,
                  "merge part missing from table: '" + Escape(left) + "' + '" +
                      Escape(right) + "'");
    }
    int rank = static_cast<int>(vocab.merges_.size());
    vocab.merges_.emplace_back(left, right);
    vocab.merge_outputs_.push_back(vocab.AddToken(left + right));
    vocab.merge_ranks_.emplace(PairKey(*l, *r), rank);
  }
  return vocab;
}

std::optional<int32_t> Vocab::Find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::Token(int32_t id) const {
  if (id < 0 || id >= size()) {
    throw Error(ErrorCode::kUnknownId,
                "id " + std::to_string(id) + " outside vocabulary of " +
                    std::to_string(size()));
  }
  return tokens_[static_cast<size_t>(id)];
}

bool Vocab::ByteKnown(uint8_t byte) const {
  return byte < 0x80 || known_high_bytes_.test(byte);
}

int32_t Vocab::ByteTokenId(uint8_t byte) const {
  return ByteKnown(byte) ? kNumSpecialIds + byte : kUnkId;
}

int32_t Vocab::CharId(uint8_t byte) const {
  return ByteKnown(byte) ? kNumSpecialIds + byte : kUnkId;
}

int Vocab::MergeRank(int32_t left, int32_t right) const {
  auto it = merge_ranks_.find(PairKey(left, right));
  return it == merge_ranks_.end() ? -1 : it->second;
}

std::string Vocab::Serialize() const {
  std::ostringstream out;
  out << kVocabMagic << "\n";
  for (const auto& [left, right] : merges_) {
    out << Escape(left) << "\t" << Escape(right) << "\n";
  }
  out << "#specials\n";
  for (int i = 0; i < kNumSpecialIds; ++i) out << kSpecialNames[i] << " " << i << "\n";
  out << "#known-bytes\n";
  bool first = true;
  static const char* kHex = "0123456789abcdef";
  for (int b = 0x80; b < 256; ++b) {
    if (!known_high_bytes_.test(static_cast<size_t>(b))) continue;
    if (!first) out << " ";
    out << kHex[b >> 4] << kHex[b & 0xF];
    first = false;
  }
  out << "\n";
  return out.str();
}

Vocab Vocab::Parse(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty() || lines[0] != kVocabMagic) {
    throw Error(ErrorCode::kBadVocab, "missing pma-bpe-v1 header");
  }
  std::vector<Merge> merges;
  size_t i = 1;
  for (; i < lines.size() && lines[i] != "#specials"; ++i) {
    size_t tab = lines[i].find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::kBadVocab, "merge line without tab at line " +
                                            std::to_string(i + 1));
    }
    merges.emplace_back(Unescape(lines[i].substr(0, tab)),
                        Unescape(lines[i].substr(tab + 1)));
  }
  if (i == lines.size()) throw Error(ErrorCode::kBadVocab, "missing #specials block");
  ++i;
  for (int s = 0; s < kNumSpecialIds; ++s, ++i) {
    std::string expected = std::string(kSpecialNames[s]) + " " + std::to_string(s);
    if (i >= lines.size() || lines[i] != expected) {
      throw Error(ErrorCode::kBadVocab, "special block must list " + expected);
    }
  }
  std::bitset<256> known;
  if (i < lines.size() && lines[i] == "#known-bytes") {
    ++i;
    if (i < lines.size()) {
      std::istringstream in{std::string(lines[i])};
      std::string hex;
      while (in >> hex) {
        if (hex.size() != 2 || HexValue(hex[0]) < 0 || HexValue(hex[1]) < 0) {
          throw Error(ErrorCode::kBadVocab, "bad known byte '" + hex + "'");
        }
        known.set(static_cast<size_t>(HexValue(hex[0]) * 16 + HexValue(hex[1])));
      }
    }
  }
  return FromMerges(merges, known);
}

void Vocab::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << Serialize();
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vocab " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

Vocab TrainBpe(std::span<const std::string> corpus, int vocab_size,
               BpeOptions options) {
  if (vocab_size < kBaseVocabSize) {
    throw Error(ErrorCode::kVocabTooSmall,
                "vocab_size " + std::to_string(vocab_size) + " < " +
                    std::to_string(kBaseVocabSize));
  }
  std::map<std::string, int64_t> word_counts;
  std::bitset<256> known;
  for (const auto& url : corpus) {
    std::string norm = NormalizeUrl(url);
    for (unsigned char c : norm) {
      if (c >= 0x80) known.set(c);
    }
    for (auto w : PreTokenize(norm)) ++word_counts[std::string(w)];
  }
  if (word_counts.empty()) throw Error(ErrorCode::kEmptyCorpus, "no URL text to train on");

  Vocab base = Vocab::FromMerges({}, known);
  std::vector<std::string> strs;
  std::unordered_map<std::string, int32_t> ids;
  for (int32_t id = 0; id < base.size(); ++id) {
    strs.push_back(base.Token(id));
    if (id >= kNumSpecialIds) ids.emplace(strs.back(), id);
  }

  std::vector<std::vector<int32_t>> words;
  std::vector<int64_t> counts;
  for (const auto& [w, n] : word_counts) {
    std::vector<int32_t> syms;
    for (unsigned char c : w) syms.push_back(base.ByteTokenId(c));
    words.push_back(std::move(syms));
    counts.push_back(n);
  }

  std::unordered_map<uint64_t, int64_t> pair_counts;
  std::unordered_map<uint64_t, std::vector<int32_t>> where;
  for (size_t w = 0; w < words.size(); ++w) {
    const auto& syms = words[w];
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      uint64_t key = PairKey(syms[i], syms[i + 1]);
      pair_counts[key] += counts[w];
      auto& list = where[key];
      if (list.empty() || list.back() != static_cast<int32_t>(w)) {
        list.push_back(static_cast<int32_t>(w));
      }
    }
  }

  struct Candidate {
    int64_t count;
    int32_t left;
    int32_t right;
  };
  // Top of the heap: highest count, then smallest (left, right) strings.
  auto worse = [&strs](const Candidate& a, const Candidate& b) {
    if (a.count != b.count) return a.count < b.count;
    const std::string& al = strs[static_cast<size_t>(a.left)];
    const std::string& bl = strs[static_cast<size_t>(b.left)];
    if (al != bl) return al > bl;
    return strs[static_cast<size_t>(a.right)] > strs[static_cast<size_t>(b.right)];
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
  for (const auto& [key, n] : pair_counts) {
    heap.push({n, static_cast<int32_t>(key >> 32), static_cast<int32_t>(key & 0xFFFFFFFFu)});
  }

  std::vector<Merge> merges;
  std::vector<uint32_t> visited(words.size(), 0);
  uint32_t epoch = 0;
  while (static_cast<int>(strs.size()) < vocab_size && !heap.empty()) {
    Candidate top = heap.top();
    heap.pop();
    uint64_t key = PairKey(top.left, top.right);
    auto live = pair_counts.find(key);
    if (live == pair_counts.end() || live->second != top.count) continue;
    if (top.count < options.min_pair_count) break;

    const std::string merged_str = strs[static_cast<size_t>(top.left)] + strs[static_cast<size_t>(top.right)];
    int32_t merged;
    auto existing = ids.find(merged_str);
    if (existing != ids.end()) {
      merged = existing->second;
    } else {
      merged = static_cast<int32_t>(strs.size());
      strs.push_back(merged_str);
      ids.emplace(merged_str, merged);
    }
    merges.emplace_back(strs[static_cast<size_t>(top.left)], strs[static_cast<size_t>(top.right)]);

    ++epoch;
    std::unordered_set<uint64_t> touched;
    std::vector<int32_t> affected = std::move(where[key]);
    where.erase(key);
    for (int32_t w : affected) {
      if (visited[static_cast<size_t>(w)] == epoch) continue;
      visited[static_cast<size_t>(w)] = epoch;
      auto& syms = words[static_cast<size_t>(w)];
      const int64_t n = counts[static_cast<size_t>(w)];
      bool present = false;
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == top.left && syms[i + 1] == top.right) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        uint64_t k = PairKey(syms[i], syms[i + 1]);
        pair_counts[k] -= n;
        touched.insert(k);
      }
      std::vector<int32_t> next;
      next.reserve(syms.size());
      for (size_t i = 0; i < syms.size();) {
        if (i + 1 < syms.size() && syms[i] == top.left && syms[i + 1] == top.right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(syms[i]);
          ++i;
        }
      }
      syms.swap(next);
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        uint64_t k = PairKey(syms[i], syms[i + 1]);
        pair_counts[k] += n;
        touched.insert(k);
        auto& list = where[k];
        if (list.empty() || list.back() != w) list.push_back(w);
      }
    }
    for (uint64_t k : touched) {
      auto it = pair_counts.find(k);
      if (it->second <= 0) {
        pair_counts.erase(it);
        continue;
      }
      heap.push({it->second, static_cast<int32_t>(k >> 32),
                 static_cast<int32_t>(k & 0xFFFFFFFFu)});
    }
  }
  return Vocab::FromMerges(merges, known);
}

TokenSequence TokenSequence::Trimmed() const {
  TokenSequence out;
  out.subword_ids.assign(subword_ids.begin(), subword_ids.begin() + length);
  out.spans.assign(spans.begin(), spans.begin() + length);
  out.char_ids.assign(char_ids.begin(), char_ids.begin() + char_length);
  out.length = length;
  out.char_length = char_length;
  return out;
}

std::vector<uint8_t> TokenSequence::TokenMask() const {
  std::vector<uint8_t> mask(subword_ids.size());
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = subword_ids[i] != kPadId;
  return mask;
}

std::vector<uint8_t> TokenSequence::CharMask() const {
  std::vector<uint8_t> mask(char_ids.size());
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = char_ids[i] != kPadId;
  return mask;
}

TokenSequence Encode(std::string_view url, const Vocab& vocab, int max_len) {
  if (max_len < 3) {
    throw Error(ErrorCode::kInvalidArgument, "max_len must leave room for CLS and SEP");
  }
  std::string norm = NormalizeUrl(url);
  if (norm.empty()) throw Error(ErrorCode::kEmptyInput, "URL is empty after stripping");

  TokenSequence seq;
  auto push = [&seq](int32_t token, std::span<const int32_t> chars) {
    seq.subword_ids.push_back(token);
    seq.spans.push_back({seq.char_size(), static_cast<int32_t>(chars.size())});
    seq.char_ids.insert(seq.char_ids.end(), chars.begin(), chars.end());
  };
  const int32_t cls_char[] = {kClsId};
  push(kClsId, cls_char);

  const int budget = max_len - 2;
  int emitted = 0;
  size_t offset = 0;
  std::vector<int32_t> chars;
  for (auto word : PreTokenize(norm)) {
    size_t in_word = 0;
    for (int32_t id : EncodeWord(word, vocab)) {
      size_t bytes = id == kUnkId ? 1 : vocab.Token(id).size();
      if (emitted < budget) {
        chars.clear();
        for (size_t b = 0; b < bytes; ++b) {
          chars.push_back(vocab.CharId(static_cast<uint8_t>(norm[offset + in_word + b])));
        }
        push(id, chars);
        ++emitted;
      }
      in_word += bytes;
    }
    offset += word.size();
    if (emitted >= budget) break;
  }
  const int32_t sep_char[] = {kSepId};
  push(kSepId, sep_char);
  seq.length = seq.size();
  seq.char_length = seq.char_size();
  const int32_t pad_char[] = {kPadId};
  while (seq.size() < max_len) push(kPadId, pad_char);
  return seq;
}

std::string Decode(const TokenSequence& seq, const Vocab& vocab) {
  std::string out;
  for (int32_t id : seq.subword_ids) {
    const std::string& token = vocab.Token(id);
    if (id == kPadId || id == kClsId || id == kSepId) continue;
    if (id == kUnkId) {
      out += '?';
      continue;
    }
    out += token;
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view text, const Vocab& vocab) {
  std::vector<std::string> out;
  for (auto word : PreTokenize(text)) {
    size_t in_word = 0;
    for (int32_t id : EncodeWord(word, vocab)) {
      size_t bytes = id == kUnkId ? 1 : vocab.Token(id).size();
      out.emplace_back(word.substr(in_word, bytes));
      in_word += bytes;
    }
  }
  return out;
}

}  // namespace pma
