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


#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mnemos/errors.h"
#include "mnemos/rules.h"
#include "test_util.h"

namespace mnemos {
namespace {

using testing::Kanji;
using testing::Record;

// Rule generator whose answers are supplied by the test.
class ScriptedRuleGen : public RuleGenClient {
 public:
  std::function<std::vector<std::string>(const RuleInitRequest&)> init;
  std::function<std::vector<int>(std::string_view)> select;
  std::function<std::string(const OrthogonalRuleRequest&)> update;

  std::vector<std::string> ProposeInitialRules(const RuleInitRequest& r) override {
    CountCall();
    return init(r);
  }
  std::vector<int> SelectRules(const KanjiEntry&, const RuleSet&,
                               std::string_view mnemonic) override {
    CountCall();
    return select(mnemonic);
  }
  std::string ProposeOrthogonalRule(const OrthogonalRuleRequest& r) override {
    CountCall();
    return update(r);
  }
};

KanjiCatalog Catalog(int n) {
  KanjiCatalog catalog;
  for (int i = 0; i < n; ++i) {
    catalog.Add(Kanji("k" + std::to_string(i), "meaning" + std::to_string(i),
                      {"part" + std::to_string(i)}));
  }
  return catalog;
}

std::string LearnerId(int j) {
  char id[16];
  std::snprintf(id, sizeof id, "l%02d", j);
  return id;
}

TEST(TopKIndicesTest, Examples) {
  const std::vector<double> row{-1.2, -0.3, -2.0, -0.7};
  EXPECT_EQ(TopKIndices(row, 3), (std::vector<int>{1, 3, 0}));
  EXPECT_EQ(TopKIndices(std::vector<double>{-1.0, -2.0}, 3), (std::vector<int>{0, 1}));
  EXPECT_EQ(TopKIndices(std::vector<double>(6, -1.0), 3), (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(TopKIndices(std::vector<double>{}, 3).empty());
}

TEST(RuleSetTest, Validation) {
  EXPECT_TRUE(IsSingleSentence("Use wordplay."));
  EXPECT_TRUE(IsSingleSentence("Mention e.g.the tree"));
  EXPECT_FALSE(IsSingleSentence("One. Two."));
  EXPECT_FALSE(IsSingleSentence("line\nbreak"));
  EXPECT_FALSE(IsSingleSentence("   "));
  EXPECT_THROW(RuleSet({{0, "a", 0}, {2, "b", 0}}), Error);
  EXPECT_THROW(RuleSet({{0, "a", 0}, {0, "b", 0}}), Error);
  const RuleSet rules({{1, "b", 3}, {0, "a", 2}});
  EXPECT_EQ(rules[0].text, "a");
  EXPECT_EQ(rules[1].revision, 3);
  EXPECT_EQ(RulesFromJson(RulesToJson(rules)), rules);
}

TEST(SampleInitLearnersTest, StrideOverSortedLearners) {
  std::vector<MnemonicRecord> records;
  for (int j = 0; j < 40; ++j) records.push_back(Record(LearnerId(j), "k0", "story"));
  const auto sampled = SampleInitLearners(records, 20);
  ASSERT_EQ(sampled.size(), 20u);
  for (int s = 0; s < 20; ++s) EXPECT_EQ(sampled[s], LearnerId(2 * s));
  EXPECT_THROW(SampleInitLearners(records, 41), Error);
}

TEST(SampleInitLearnersTest, CollectsLongestMnemonic) {
  const KanjiCatalog catalog = Catalog(3);
  const std::vector<MnemonicRecord> records{Record("a", "k0", "short"),
                                            Record("a", "k1", "a much longer story"),
                                            Record("a", "k2", "mid size one")};
  const auto samples = CollectInitSamples(records, catalog, 1);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_EQ(samples[0].mnemonic, "a much longer story");
  EXPECT_EQ(samples[0].kanji.kanji_id, "k1");
}

TEST(InitializeRulesTest, MockRules) {
  const KanjiCatalog catalog = Catalog(1);
  std::vector<MnemonicRecord> records;
  for (int j = 0; j < 25; ++j) records.push_back(Record(LearnerId(j), "k0", "story"));
  MockRuleGen rulegen;
  const RuleSet rules = InitializeRules(records, catalog, 10, 20, rulegen);
  ASSERT_EQ(rules.size(), 10u);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(rules[k].index, k);
    EXPECT_EQ(rules[k].text, "mock-rule-" + std::to_string(k));
    EXPECT_EQ(rules[k].revision, 0);
  }
  EXPECT_EQ(rulegen.calls(), 1u);
  EXPECT_THROW(InitializeRules(records, catalog, 10, 30, rulegen), Error);
}

TEST(InitializeRulesTest, ContractViolations) {
  const KanjiCatalog catalog = Catalog(1);
  const std::vector<MnemonicRecord> records{Record("a", "k0", "story")};
  ScriptedRuleGen rulegen;
  rulegen.init = [](const RuleInitRequest&) { return std::vector<std::string>{"One."}; };
  try {
    InitializeRules(records, catalog, 2, 1, rulegen);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
  rulegen.init = [](const RuleInitRequest&) {
    return std::vector<std::string>{"One.", "Two. Three."};
  };
  EXPECT_THROW(InitializeRules(records, catalog, 2, 1, rulegen), Error);
}

TEST(InitialActivationsTest, MockActivatesMinThreeK) {
  const KanjiCatalog catalog = Catalog(2);
  const std::vector<MnemonicRecord> records{Record("a", "k0", "story one"),
                                            Record("b", "k1", "story two")};
  MockRuleGen rulegen;
  const ActivationTensor z =
      InitialActivations(records, catalog, RuleSet::FromTexts({"x", "y"}), rulegen);
  ASSERT_EQ(z.size(), 2u);
  for (std::size_t p = 0; p < z.size(); ++p) EXPECT_EQ(z.ActiveIndices(p).size(), 2u);
  EXPECT_EQ(rulegen.calls(), 2u);
}

TEST(InitialActivationsTest, PassesIndicesThrough) {
  const KanjiCatalog catalog = Catalog(1);
  const std::vector<MnemonicRecord> records{Record("a", "k0", "story")};
  const RuleSet rules = RuleSet::FromTexts(std::vector<std::string>(10, "r"));
  ScriptedRuleGen rulegen;
  rulegen.select = [](std::string_view) { return std::vector<int>{0, 3, 7}; };
  const ActivationTensor z = InitialActivations(records, catalog, rules, rulegen);
  EXPECT_EQ(z.ActiveIndices(0), (std::vector<int>{0, 3, 7}));
  rulegen.select = [](std::string_view) { return std::vector<int>{}; };
  EXPECT_TRUE(InitialActivations(records, catalog, rules, rulegen).ActiveIndices(0).empty());
}

TEST(InitialActivationsTest, RejectsBadIndices) {
  const KanjiCatalog catalog = Catalog(1);
  const std::vector<MnemonicRecord> records{Record("a", "k0", "story")};
  const RuleSet rules = RuleSet::FromTexts(std::vector<std::string>(10, "r"));
  ScriptedRuleGen rulegen;
  for (const auto& reply : std::vector<std::vector<int>>{{0, 1, 2, 3}, {10}, {-1}, {2, 2}}) {
    rulegen.select = [&](std::string_view) { return reply; };
    try {
      InitialActivations(records, catalog, rules, rulegen);
      ADD_FAILURE() << "accepted reply of size " << reply.size();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kContract);
    }
  }
}

class ExemplarTest : public ::testing::Test {
 protected:
  // Pair p is (learner "l0p", kanji "k{p % 3}"-ish) with score values[p] for rule 0.
  void Build(const std::vector<double>& values) {
    std::vector<PairKey> pairs;
    records_.clear();
    for (std::size_t p = 0; p < values.size(); ++p) {
      const std::string learner = LearnerId(static_cast<int>(p));
      const std::string kanji = "k" + std::to_string(values.size() - p);
      pairs.push_back({learner, kanji});
      records_.push_back(Record(learner, kanji, "story " + std::to_string(p)));
    }
    table_ = ScoreTable(1, pairs);
    for (std::size_t p = 0; p < values.size(); ++p) table_.Set(p, 0, values[p]);
  }
  ScoreTable table_;
  std::vector<MnemonicRecord> records_;
};

TEST_F(ExemplarTest, TakesHighest) {
  Build({-1, -2, -3, -4, -5, -6, -7, -8, -9, -0.5});
  const RuleExemplars ex = SelectExemplars(table_, records_, 0, 8);
  ASSERT_EQ(ex.exemplars.size(), 8u);
  EXPECT_EQ(ex.exemplars[0].learner_id, LearnerId(9));
  EXPECT_EQ(ex.exemplars[0].text, "story 9");
  for (std::size_t i = 1; i < 8; ++i) {
    EXPECT_GE(ex.exemplars[i - 1].score, ex.exemplars[i].score);
  }
  EXPECT_EQ(ex.exemplars.back().score, -7);
}

TEST_F(ExemplarTest, ClampsToCorpus) {
  Build({-1, -2, -3, -4, -5});
  EXPECT_EQ(SelectExemplars(table_, records_, 0, 8).exemplars.size(), 5u);
}

TEST_F(ExemplarTest, TieBrokenByKanjiThenLearner) {
  // Pairs 7 and 8 tie for the 8th slot; pair 8 has the smaller kanji id.
  Build({-1, -1.1, -1.2, -1.3, -1.4, -1.5, -1.6, -2, -2, -3});
  const RuleExemplars ex = SelectExemplars(table_, records_, 0, 8);
  EXPECT_EQ(ex.exemplars.back().learner_id, LearnerId(8));
  EXPECT_EQ(ex.exemplars.back().kanji_id, "k2");
}

TEST(OrthogonalUpdateTest, SeesNewTextsBelowAndOldAbove) {
  const KanjiCatalog catalog = Catalog(1);
  const RuleSet rules = RuleSet::FromTexts({"old zero", "old one", "old two"});
  std::vector<RuleExemplars> exemplars;
  for (int k = 0; k < 3; ++k) {
    exemplars.push_back({k, {{"a", "k0", "a story", -1.0}}});
  }
  MockRuleGen rulegen;
  const RuleSet updated = OrthogonalUpdate(rules, exemplars, catalog, rulegen);
  ASSERT_EQ(rulegen.update_requests().size(), 3u);
  const auto& second = rulegen.update_requests()[1];
  ASSERT_EQ(second.existing_rules.size(), 2u);
  EXPECT_EQ(second.existing_rules[0].text, "updated-0-1");
  EXPECT_EQ(second.existing_rules[0].number, 1);
  EXPECT_EQ(second.existing_rules[1].text, "old two");
  EXPECT_EQ(second.existing_rules[1].number, 3);
  EXPECT_NE(second.prompt.find("Story: a story"), std::string::npos);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(updated[k].index, k);
    EXPECT_EQ(updated[k].revision, 1);
    EXPECT_EQ(updated[k].text, "updated-" + std::to_string(k) + "-1");
  }
  EXPECT_EQ(rulegen.calls(), 3u);
}

TEST(OrthogonalUpdateTest, SingleRuleHasNoContext) {
  const KanjiCatalog catalog = Catalog(1);
  MockRuleGen rulegen;
  OrthogonalUpdate(RuleSet::FromTexts({"only"}), {{0, {}}}, catalog, rulegen);
  ASSERT_EQ(rulegen.update_requests().size(), 1u);
  EXPECT_TRUE(rulegen.update_requests()[0].existing_rules.empty());
}

TEST(OrthogonalUpdateTest, RejectsBadRule) {
  const KanjiCatalog catalog = Catalog(1);
  ScriptedRuleGen rulegen;
  for (std::string reply : {"", "First. Second."}) {
    rulegen.update = [&](const OrthogonalRuleRequest&) { return reply; };
    try {
      OrthogonalUpdate(RuleSet::FromTexts({"a"}), {{0, {}}}, catalog, rulegen);
      ADD_FAILURE() << reply;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kContract);
    }
  }
}

}  // namespace
}  // namespace mnemos
