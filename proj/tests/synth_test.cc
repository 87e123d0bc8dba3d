// Copyright 2026 The Mnemos Authors.
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


#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mnemos/errors.h"
#include "mnemos/random.h"
#include "mnemos/rules.h"
#include "mnemos/scorer.h"
#include "mnemos/synth.h"
#include "test_util.h"

namespace mnemos {
namespace {

TEST(SynthTest, SingleCell) {
  const SyntheticPopulation pop = GeneratePopulation({1, 1, 1, 3, 1.0});
  ASSERT_EQ(pop.records.size(), 1u);
  ASSERT_EQ(pop.truth.activations.size(), 1u);
  EXPECT_EQ(pop.truth.activations.ActiveIndices(0), (std::vector<int>{0}));
  EXPECT_EQ(pop.catalog.size(), 1u);
}

TEST(SynthTest, PlantedRowsAreTopThreeOfSums) {
  const SyntheticPopulation pop = GeneratePopulation({7, 6, 8, 4, 1.0});
  const auto& truth = pop.truth;
  ASSERT_EQ(pop.records.size(), 42u);
  for (std::size_t p = 0; p < truth.activations.size(); ++p) {
    const PairKey& key = truth.activations.pairs()[p];
    const int j = static_cast<int>(std::find(truth.learner_ids.begin(), truth.learner_ids.end(),
                                             key.learner_id) - truth.learner_ids.begin());
    const int i = static_cast<int>(std::find(truth.kanji_ids.begin(), truth.kanji_ids.end(),
                                             key.kanji_id) - truth.kanji_ids.begin());
    std::vector<double> sums(8);
    for (int k = 0; k < 8; ++k) {
      sums[k] = truth.learner_affinity(j, k) + truth.kanji_compatibility(i, k);
    }
    auto expected = TopKIndices(sums, 3);
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(truth.activations.ActiveIndices(p), expected);
  }
}

TEST(SynthTest, TextsCarryPlantedRuleTokens) {
  const SyntheticPopulation pop = GeneratePopulation({5, 5, 10, 9, 1.0});
  for (const auto& record : pop.records) {
    const auto tokens = Tokenize(record.text);
    const std::set<std::string> bag(tokens.begin(), tokens.end());
    const auto row = pop.truth.activations.Row(KeyOf(record));
    for (int k = 0; k < 10; ++k) {
      bool any = false;
      for (int s = 0; s < kSyntheticVocabSize; ++s) any |= bag.count(SyntheticRuleToken(k, s)) > 0;
      EXPECT_EQ(any, row[k] != 0) << record.text << " rule " << k;
    }
    EXPECT_LE(record.token_count, kMaxMnemonicTokens);
  }
}

TEST(SynthTest, MockRanksPlantedRulesFirst) {
  const SyntheticPopulation pop = GeneratePopulation({6, 6, 10, 2, 1.0});
  MockScorer scorer;
  std::vector<Rule> rules;
  for (int k = 0; k < 10; ++k) rules.push_back({k, "mock-rule-" + std::to_string(k), 0});
  for (const auto& record : pop.records) {
    const auto row = pop.truth.activations.Row(KeyOf(record));
    double min_active = 1e9, max_inactive = -1e9;
    for (int k = 0; k < 10; ++k) {
      const double s = scorer.Score(pop.catalog.At(record.kanji_id), rules[k], record.text) -
                       MockJitter(record.kanji_id, k, record.text);
      if (row[k]) min_active = std::min(min_active, s);
      else max_inactive = std::max(max_inactive, s);
    }
    EXPECT_GT(min_active, max_inactive);
  }
}

TEST(SynthTest, ByteIdenticalAcrossRuns) {
  testing::TempDir a, b;
  WriteSynthetic(a.path(), GeneratePopulation({9, 8, 5, 17, 1.0}));
  WriteSynthetic(b.path(), GeneratePopulation({9, 8, 5, 17, 1.0}));
  for (const char* name : {"corpus.jsonl", "planted.json"}) {
    EXPECT_EQ(testing::ReadAll(a / name), testing::ReadAll(b / name)) << name;
    EXPECT_FALSE(testing::ReadAll(a / name).empty());
  }
  const Corpus corpus = LoadCorpus(a / "corpus.jsonl");
  EXPECT_EQ(corpus.records.size(), 72u);
  const PlantedTruth truth =
      PlantedFromJson(nlohmann::json::parse(testing::ReadAll(a / "planted.json")));
  EXPECT_EQ(truth.activations, GeneratePopulation({9, 8, 5, 17, 1.0}).truth.activations);
}

TEST(SynthTest, ObservationRateMasksCells) {
  const SyntheticPopulation pop = GeneratePopulation({30, 20, 5, 4, 0.3});
  const double rate = static_cast<double>(pop.records.size()) / 600.0;
  EXPECT_GT(rate, 0.2);
  EXPECT_LT(rate, 0.4);
  EXPECT_EQ(pop.truth.activations.size(), pop.records.size());
}

TEST(RecoveryTest, IdentityIsPerfect) {
  const SyntheticPopulation pop = GeneratePopulation({10, 8, 6, 1, 1.0});
  const TraitState planted_state(pop.truth.learner_ids, pop.truth.kanji_ids,
                                 pop.truth.learner_affinity, pop.truth.kanji_compatibility);
  const RecoveryReport report = Recovery(pop.truth, &planted_state, pop.truth.activations);
  EXPECT_DOUBLE_EQ(report.activation_f1, 1.0);
  ASSERT_TRUE(report.trait_correlation.has_value());
  EXPECT_NEAR(*report.trait_correlation, 1.0, 1e-12);
}

TEST(RecoveryTest, RandomTriplesScoreAboutThreeTenths) {
  const SyntheticPopulation pop = GeneratePopulation({50, 40, 10, 5, 1.0});
  Rng rng(99);
  ActivationTensor random(10);
  for (const PairKey& key : pop.truth.activations.pairs()) random.SetActive(key, rng.Sample(10, 3));
  EXPECT_NEAR(ActivationF1(pop.truth.activations, random), 0.3, 0.02);
}

TEST(RecoveryTest, DegenerateCorrelationIsUndefined) {
  const SyntheticPopulation pop = GeneratePopulation({3, 3, 2, 1, 1.0});
  const TraitState zeros = TraitState::Zeros(pop.truth.learner_ids, pop.truth.kanji_ids, 2);
  EXPECT_FALSE(TraitCorrelation(pop.truth, zeros).has_value());
}

TEST(RecoveryTest, EstimateMustBeCoveredByTruth) {
  const SyntheticPopulation pop = GeneratePopulation({3, 3, 4, 1, 1.0});
  ActivationTensor stray(4);
  stray.SetActive({"nobody", "nothing"}, {0});
  EXPECT_THROW(ActivationF1(pop.truth.activations, stray), Error);
  EXPECT_THROW(ActivationF1(pop.truth.activations, ActivationTensor(5)), Error);
}

TEST(BernoulliActivationsTest, SeededAndCalibrated) {
  const SyntheticPopulation pop = GeneratePopulation({40, 30, 4, 2, 1.0});
  const ActivationTensor a = BernoulliActivations(pop.truth, 5);
  EXPECT_EQ(a, BernoulliActivations(pop.truth, 5));
  double expected = 0.0, observed = 0.0;
  for (int j = 0; j < 30; ++j) {
    for (int i = 0; i < 40; ++i) {
      for (int k = 0; k < 4; ++k) {
        expected += ActivationProbability(pop.truth.learner_affinity(j, k),
                                          pop.truth.kanji_compatibility(i, k));
      }
    }
  }
  for (std::size_t p = 0; p < a.size(); ++p) observed += a.ActiveIndices(p).size();
  EXPECT_NEAR(observed / expected, 1.0, 0.05);
}

}  // namespace
}  // namespace mnemos
