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

#include <gtest/gtest.h>

#include <algorithm>

#include "pma/errors.h"
#include "pma/synth.h"

namespace pma {
namespace {

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

Vocab PayPalVocab() {
  std::vector<std::string> corpus;
  for (int i = 0; i < 6; ++i) {
    corpus.push_back("http://pay.com/pay");
    corpus.push_back("http://pal.org/pal");
  }
  return TrainBpe(corpus, 300);
}

size_t EditDistance(const std::string& a, const std::string& b) {
  std::vector<size_t> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

TEST(TagDomain, PayPalSplitsAtThree) {
  Vocab vocab = PayPalVocab();
  // The oracle is the tokenizer's own split of the label.
  auto pieces = Tokenize("paypal", vocab);
  ASSERT_EQ(pieces, (std::vector<std::string>{"pay", "pal"}));
  DomainTags tags = TagDomainSubwords("http://paypal.com", vocab);
  EXPECT_EQ(tags.subwords, pieces);
  EXPECT_EQ(tags.boundaries, (std::vector<size_t>{3}));
  EXPECT_EQ(tags.host.begin, 7u);
}

TEST(TagDomain, Errors) {
  Vocab vocab = PayPalVocab();
  EXPECT_EQ(CodeOf([&] { TagDomainSubwords("http://a.com", vocab); }), ErrorCode::kUnsplittable);
  EXPECT_EQ(CodeOf([&] { TagDomainSubwords("http:///x", vocab); }), ErrorCode::kNoHost);
  EXPECT_EQ(CodeOf([&] { TagDomainSubwords("http://Pay_Pal.com", vocab); }), ErrorCode::kNoHost);
  EXPECT_EQ(CodeOf([&] { TagDomainSubwords("http://10.0.0.1/a", vocab); }),
            ErrorCode::kUnsplittable);
}

TEST(TagDomain, OnlyRegistrableLabelAndNoSeparatorNeighbours) {
  Vocab vocab = PayPalVocab();
  DomainTags tags = TagDomainSubwords("https://paypal.paypal.co.uk/x", vocab);
  EXPECT_EQ(tags.boundaries, (std::vector<size_t>{10}));
  // "pay-pal" splits only next to its hyphen, which is excluded.
  EXPECT_EQ(CodeOf([&] { TagDomainSubwords("https://paypal.pay-pal.co.uk/x", vocab); }),
            ErrorCode::kUnsplittable);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    std::string url = SynthesizeUrl(rng.Below(2) == 1, rng);
    DomainTags t;
    try {
      t = TagDomainSubwords(url, vocab);
    } catch (const Error&) {
      continue;
    }
    std::string host = url.substr(t.host.begin, t.host.size());
    for (size_t b : t.boundaries) {
      ASSERT_GT(b, 0u);
      ASSERT_LT(b, host.size());
      for (char c : {host[b - 1], host[b]}) {
        EXPECT_NE(c, '.') << url;
        EXPECT_NE(c, '-') << url;
      }
    }
  }
}

TEST(InsertHyphens, SingleBoundaryForcesOutcome) {
  Vocab vocab = PayPalVocab();
  DomainTags tags = TagDomainSubwords("http://paypal.com", vocab);
  for (uint64_t seed : {1, 2, 3, 99}) {
    Rng rng(seed);
    HyphenInsertion ins = InsertHyphens("http://paypal.com", tags, 1, rng);
    EXPECT_EQ(ins.url, "http://pay-pal.com");
    EXPECT_EQ(ins.offsets, (std::vector<size_t>{3}));
    EXPECT_EQ(RemoveInsertedHyphens(ins.url, tags.host, ins.offsets), "http://paypal.com");
  }
  Rng rng(1);
  EXPECT_EQ(CodeOf([&] { InsertHyphens("http://paypal.com", tags, 0, rng); }),
            ErrorCode::kNoBoundaries);
  EXPECT_EQ(CodeOf([&] { InsertHyphens("http://paypal.com", tags, 2, rng); }),
            ErrorCode::kNoBoundaries);
}

class AttackTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto corpus = SynthesizeCorpus({36000, 0.5, 13});
    split_ = new DataSplit(SplitByCounts(corpus, {20000, 0, 16000}, 13, true));
    std::vector<std::string> urls;
    for (const UrlRecord& r : split_->train) urls.push_back(r.url);
    vocab_ = new Vocab(TrainBpe(urls, 4096));
    for (const UrlRecord& r : split_->train) train_urls_.insert(r.url);
  }
  static void TearDownTestSuite() {
    delete split_;
    delete vocab_;
  }

  static DataSplit* split_;
  static Vocab* vocab_;
  static std::unordered_set<std::string> train_urls_;
};

DataSplit* AttackTest::split_ = nullptr;
Vocab* AttackTest::vocab_ = nullptr;
std::unordered_set<std::string> AttackTest::train_urls_;

TEST_F(AttackTest, DeskCompositionAndValidity) {
  AttackOptions options;
  options.seed = 7;
  AdversarialSet set = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  ASSERT_EQ(set.records.size(), 16000u);
  ASSERT_EQ(set.attacks.size(), 4000u);
  std::array<int64_t, 3> counts{};
  for (size_t i = 0; i < set.records.size(); ++i) {
    const UrlRecord& r = set.records[i];
    EXPECT_EQ(r.label, i < 8000 ? 0 : 1);
    ++counts[i < 8000 ? 0 : i < 12000 ? 1 : 2];
  }
  EXPECT_EQ(counts, (std::array<int64_t, 3>{8000, 4000, 4000}));
  int64_t swapped = 0;
  double edits = 0.0;
  for (const AttackRecord& a : set.attacks) {
    EXPECT_EQ(a.label, 1);
    auto host = FindHost(a.adversarial_url);
    ASSERT_TRUE(host);
    EXPECT_TRUE(IsValidHostname(a.adversarial_url.substr(host->begin, host->size())))
        << a.adversarial_url;
    auto base_host = *FindHost(a.base_url);
    EXPECT_EQ(RemoveInsertedHyphens(a.adversarial_url, base_host, a.insertion_offsets), a.base_url);
    EXPECT_EQ(train_urls_.count(a.adversarial_url), 0u);
    EXPECT_EQ(a.base_url.substr(base_host.end), a.original_url.substr(FindHost(a.original_url)->end));
    edits += static_cast<double>(EditDistance(a.base_url, a.adversarial_url));
    swapped += a.donor_url ? 1 : 0;
  }
  EXPECT_DOUBLE_EQ(edits / 4000.0, 1.0);
  EXPECT_EQ(swapped, 2000);
}

TEST_F(AttackTest, DeterministicUnderSeed) {
  AttackOptions options;
  options.benign = 200;
  options.malicious = 100;
  options.adversarial = 100;
  options.seed = 3;
  auto a = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  auto b = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  EXPECT_EQ(FormatDataset(a.records, DatasetSchema::Binary()),
            FormatDataset(b.records, DatasetSchema::Binary()));
  EXPECT_EQ(a.Provenance(options).dump(), b.Provenance(options).dump());
  options.seed = 4;
  auto c = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  EXPECT_NE(FormatDataset(a.records, DatasetSchema::Binary()),
            FormatDataset(c.records, DatasetSchema::Binary()));
}

TEST_F(AttackTest, RetokenizationAlwaysChanges) {
  AttackOptions options;
  options.benign = 0;
  options.malicious = 0;
  options.adversarial = 1000;
  options.seed = 5;
  auto set = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  ASSERT_EQ(set.attacks.size(), 1000u);
  for (const AttackRecord& a : set.attacks) {
    EXPECT_NE(Tokenize(NormalizeUrl(a.adversarial_url), *vocab_),
              Tokenize(NormalizeUrl(a.base_url), *vocab_));
  }
}

TEST_F(AttackTest, SeveralHyphensPerUrl) {
  AttackOptions options;
  options.benign = 0;
  options.malicious = 0;
  options.adversarial = 200;
  options.hyphens = 2;
  options.swap_fraction = 1.0;
  auto set = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  for (const AttackRecord& a : set.attacks) {
    ASSERT_EQ(a.insertion_offsets.size(), 2u);
    EXPECT_LT(a.insertion_offsets[0], a.insertion_offsets[1]);
    EXPECT_EQ(a.adversarial_url.size(), a.base_url.size() + 2);
    EXPECT_TRUE(a.donor_url.has_value());
  }
}

TEST_F(AttackTest, ExcludesTrainUrls) {
  AttackOptions options;
  options.benign = 0;
  options.malicious = 0;
  options.adversarial = 300;
  options.seed = 6;
  auto first = BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options);
  std::unordered_set<std::string> poisoned = train_urls_;
  for (size_t i = 0; i < 150; ++i) poisoned.insert(first.attacks[i].adversarial_url);
  auto second = BuildAdversarialTestset(split_->test, poisoned, *vocab_, options);
  EXPECT_GT(second.skipped_in_train, 0);
  for (const AttackRecord& a : second.attacks) EXPECT_EQ(poisoned.count(a.adversarial_url), 0u);
}

TEST_F(AttackTest, InsufficientSource) {
  AttackOptions options;
  options.benign = 9000;
  EXPECT_EQ(CodeOf([&] { BuildAdversarialTestset(split_->test, train_urls_, *vocab_, options); }),
            ErrorCode::kInsufficientSource);
  std::vector<UrlRecord> only_ip = {{"http://10.0.0.1/", 0, ""}, {"http://paypal-x.com/", 1, ""}};
  AttackOptions small;
  small.benign = 1;
  small.malicious = 1;
  small.adversarial = 1;
  EXPECT_EQ(CodeOf([&] { BuildAdversarialTestset(only_ip, {}, *vocab_, small); }),
            ErrorCode::kInsufficientSource);
}

}  // namespace
}  // namespace pma
