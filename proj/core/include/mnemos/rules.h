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

#ifndef MNEMOS_RULES_H_
#define MNEMOS_RULES_H_

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnemos/corpus.h"
#include "mnemos/http_transport.h"
#include "mnemos/prompts.h"
#include "mnemos/rule_set.h"
#include "mnemos/scorer.h"
#include "mnemos/traits.h"

namespace mnemos {

inline constexpr int kMaxActiveRules = 3;

// Indices of the min(k, n) largest values, largest first; equal values go to
// the lower index.
std::vector<int> TopKIndices(std::span<const double> values, int k);

nlohmann::json RulesToJson(const RuleSet& rules);
RuleSet RulesFromJson(const nlohmann::json& array);

struct Exemplar {
  std::string learner_id;
  std::string kanji_id;
  std::string text;
  double score = 0.0;

  bool operator==(const Exemplar&) const = default;
};

struct RuleExemplars {
  int rule_index = 0;
  std::vector<Exemplar> exemplars;  // descending score
};

struct RuleInitRequest {
  std::vector<RuleInitSample> samples;
  int num_rules = 0;
  std::string prompt;
};

struct OrthogonalRuleRequest {
  int rule_index = 0;
  int new_revision = 0;
  std::vector<NumberedRule> existing_rules;  // every rule except rule_index
  std::vector<RuleInitSample> examples;
  std::string prompt;
};

// The proprietary-model side of the loop: proposes rules and labels which
// rules a mnemonic follows.
class RuleGenClient {
 public:
  virtual ~RuleGenClient() = default;

  virtual std::vector<std::string> ProposeInitialRules(
      const RuleInitRequest& request) = 0;
  // Returns 0-based rule indices.
  virtual std::vector<int> SelectRules(const KanjiEntry& kanji,
                                       const RuleSet& rules,
                                       std::string_view mnemonic) = 0;
  virtual std::string ProposeOrthogonalRule(
      const OrthogonalRuleRequest& request) = 0;

  std::size_t calls() const { return calls_.load(); }

 protected:
  void CountCall() { ++calls_; }

 private:
  std::atomic<std::size_t> calls_{0};
};

// Deterministic stand-in: "mock-rule-{k}" at init, "updated-{k}-{revision}"
// on update, and the top min(3, K) rules by token overlap with the rule text
// for activations.
class MockRuleGen : public RuleGenClient {
 public:
  std::vector<std::string> ProposeInitialRules(
      const RuleInitRequest& request) override;
  std::vector<int> SelectRules(const KanjiEntry& kanji, const RuleSet& rules,
                               std::string_view mnemonic) override;
  std::string ProposeOrthogonalRule(
      const OrthogonalRuleRequest& request) override;

  // Existing-rule lists seen by each orthogonal update, in call order.
  const std::vector<OrthogonalRuleRequest>& update_requests() const {
    return update_requests_;
  }

 private:
  std::vector<OrthogonalRuleRequest> update_requests_;
};

// Talks to a chat-style backend through POST /v1/generate.
class HttpRuleGen : public RuleGenClient {
 public:
  explicit HttpRuleGen(HttpOptions options) : http_(std::move(options)) {}

  std::vector<std::string> ProposeInitialRules(
      const RuleInitRequest& request) override;
  std::vector<int> SelectRules(const KanjiEntry& kanji, const RuleSet& rules,
                               std::string_view mnemonic) override;
  std::string ProposeOrthogonalRule(
      const OrthogonalRuleRequest& request) override;

 private:
  std::string Complete(const std::string& prompt) const;

  HttpTransport http_;
};

// Every ceil(J / sample_learners)-th learner of the count-sorted list.
std::vector<std::string> SampleInitLearners(
    const std::vector<MnemonicRecord>& records, int sample_learners);

// One sample per sampled learner: their longest mnemonic (first on ties).
std::vector<RuleInitSample> CollectInitSamples(
    const std::vector<MnemonicRecord>& records, const KanjiCatalog& catalog,
    int sample_learners);

RuleSet InitializeRules(const std::vector<MnemonicRecord>& records,
                        const KanjiCatalog& catalog, int num_rules,
                        int sample_learners, RuleGenClient& rulegen);

ActivationTensor InitialActivations(const std::vector<MnemonicRecord>& records,
                                    const KanjiCatalog& catalog,
                                    const RuleSet& rules,
                                    RuleGenClient& rulegen,
                                    std::size_t max_in_flight = 8);

// Top `n` observed pairs for `rule_index`; ties by (kanji_id, learner_id).
RuleExemplars SelectExemplars(const ScoreTable& scores,
                              const std::vector<MnemonicRecord>& records,
                              int rule_index, std::size_t n = 8);

// Existing-rule context for updating rule k: new texts below k, old above.
std::vector<NumberedRule> ExistingRulesFor(int rule_index,
                                           const std::vector<Rule>& updated,
                                           const RuleSet& previous);

// Sequential update of every rule. Each rule's revision goes up by one.
RuleSet OrthogonalUpdate(const RuleSet& rules,
                         const std::vector<RuleExemplars>& exemplars_by_rule,
                         const KanjiCatalog& catalog, RuleGenClient& rulegen);

}  // namespace mnemos

#endif  // MNEMOS_RULES_H_
