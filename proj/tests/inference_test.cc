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


#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mnemos/errors.h"
#include "mnemos/inference.h"
#include "test_util.h"

namespace mnemos {
namespace {

using testing::Kanji;
using testing::Record;

class InferenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const char* id : {"k0", "k1", "k2"}) catalog_.Add(Kanji(id, std::string("m") + id, {"p"}));
    Eigen::MatrixXd h(1, 4), g(3, 4);
    h << 1.0, -1.0, 0.5, -2.0;
    g << 0.0, 0.0, 0.0, 0.0,
         -2.0, 2.0, 0.0, 0.0,
         0.0, 0.0, -1.0, 3.0;
    state_.rules = RuleSet::FromTexts({"Rule a", "Rule b", "Rule c", "Rule d"});
    state_.traits = TraitState({"u0"}, {"k0", "k1", "k2"}, h, g);
    records_ = {Record("z", "k2", "third"), Record("a", "k1", "second"),
                Record("a", "k0", "first")};
  }
  KanjiCatalog catalog_;
  EmState state_;
  std::vector<MnemonicRecord> records_;
};

TEST_F(InferenceTest, RuleModeUsesColdStartRules) {
  MockScorer scorer;
  const Generation g = GenerateFor(catalog_.At("k1"), state_, {}, scorer);
  EXPECT_EQ(g.active_rules, (std::vector<int>{1, 2}));
  EXPECT_EQ(g.text, "mk1 p rule-1 rule-2");
  EXPECT_NE(scorer.last_prompt().find("- Rule b\n- Rule c\n"), std::string::npos);
}

TEST_F(InferenceTest, UnseenKanjiUsesMeanCompatibility) {
  MockScorer scorer;
  const KanjiEntry fresh = Kanji("new", "novel", {"p"});
  const Generation g = GenerateFor(fresh, state_, {}, scorer);
  // Means of G: (-2/3, 2/3, -1/3, 1); plus h: (1/3, -1/3, 1/6, -1).
  EXPECT_EQ(g.active_rules, (std::vector<int>{0, 2}));
}

TEST_F(InferenceTest, NoRulesModeOmitsRules) {
  MockScorer scorer;
  InferenceOptions options;
  options.mode = GenerationMode::kNoRules;
  const Generation g = GenerateFor(catalog_.At("k1"), state_, options, scorer);
  EXPECT_TRUE(g.active_rules.empty());
  EXPECT_EQ(g.text, "mk1 p");
  EXPECT_EQ(scorer.last_prompt().find("Rules for Generating"), std::string::npos);
}

TEST_F(InferenceTest, IclExampleIsLatestOtherMnemonic) {
  const auto example = IclExampleFor(records_, catalog_, "a", "k0");
  ASSERT_TRUE(example.has_value());
  EXPECT_EQ(example->mnemonic, "second");
  EXPECT_EQ(IclExampleFor(records_, catalog_, "a", "k9")->mnemonic, "first");
  EXPECT_FALSE(IclExampleFor(records_, catalog_, "z", "k2").has_value());

  MockScorer scorer;
  InferenceOptions options;
  options.mode = GenerationMode::kIclOne;
  GenerateFor(catalog_.At("k0"), state_, options, scorer, example);
  const std::string prompt = scorer.last_prompt();
  EXPECT_LT(prompt.find("Story:\nsecond"), prompt.find("Kanji Character:\nk0"));
}

TEST_F(InferenceTest, BatchIsSortedByPair) {
  MockScorer scorer;
  const BatchGenerationResult result = BatchGenerate(records_, catalog_, state_, {}, scorer);
  ASSERT_EQ(result.outputs.size(), 3u);
  EXPECT_TRUE(result.errors.empty());
  EXPECT_EQ(result.outputs[0].learner_id, "a");
  EXPECT_EQ(result.outputs[0].kanji_id, "k0");
  EXPECT_EQ(result.outputs[1].kanji_id, "k1");
  EXPECT_EQ(result.outputs[2].learner_id, "z");
  MockScorer again;
  EXPECT_EQ(BatchGenerate(records_, catalog_, state_, {}, again).outputs, result.outputs);
}

TEST_F(InferenceTest, BatchCollectsErrors) {
  class Failing : public MockScorer {
   protected:
    std::string DoGenerate(const GenerationRequest& request, const std::string& prompt) override {
      if (request.context.kanji_id == "k1") throw TransportError("timeout");
      return MockScorer::DoGenerate(request, prompt);
    }
  } scorer;
  const BatchGenerationResult result = BatchGenerate(records_, catalog_, state_, {}, scorer);
  EXPECT_EQ(result.outputs.size(), 2u);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].kanji_id, "k1");
  EXPECT_NE(result.errors[0].message.find("timeout"), std::string::npos);
}

TEST_F(InferenceTest, BatchIclWithoutHistoryIsAnError) {
  MockScorer scorer;
  InferenceOptions options;
  options.mode = GenerationMode::kIclOne;
  const BatchGenerationResult result = BatchGenerate(records_, catalog_, state_, options, scorer);
  EXPECT_EQ(result.outputs.size(), 2u);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].learner_id, "z");
}

TEST_F(InferenceTest, EmptyBatch) {
  MockScorer scorer;
  const BatchGenerationResult result = BatchGenerate({}, catalog_, state_, {}, scorer);
  EXPECT_TRUE(result.outputs.empty());
  EXPECT_TRUE(result.errors.empty());
}

TEST_F(InferenceTest, RespectsTokenCap) {
  MockScorer scorer;
  InferenceOptions options;
  options.max_new_tokens = 2;
  EXPECT_EQ(GenerateFor(catalog_.At("k1"), state_, options, scorer).text, "mk1 p");
}

TEST(GenerationJsonTest, RoundTrip) {
  const Generation g{"u1", "休", {0, 4}, "story"};
  const nlohmann::json doc = GenerationToJson(g);
  EXPECT_EQ(doc["kanji"], "休");
  EXPECT_EQ(GenerationFromJson(doc), g);
}

}  // namespace
}  // namespace mnemos
