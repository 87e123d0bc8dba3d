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

#ifndef MNEMOS_EM_H_
#define MNEMOS_EM_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnemos/corpus.h"
#include "mnemos/rule_set.h"
#include "mnemos/rules.h"
#include "mnemos/scorer.h"
#include "mnemos/traits.h"

namespace mnemos {

// Rule-generator calls the budget allows: K*T for the updates
// plus I*J*K for the initial activations.
std::int64_t BudgetCheck(std::int64_t num_rules, std::int64_t iterations,
                         std::int64_t num_kanji, std::int64_t num_learners);

struct CallBudget {
  std::int64_t rulegen_calls = 0;
  std::int64_t expected_rulegen = 0;
  std::int64_t score_calls = 0;
  std::int64_t finetune_jobs = 0;

  bool operator==(const CallBudget&) const = default;
};

struct EmConfig {
  int num_rules = 10;
  int max_iters = 3;
  int patience = 1;
  std::size_t exemplars = 8;
  int sample_learners = 20;
  FitConfig fit;
  nlohmann::json hyperparams = DefaultFineTuneHyperparams();
  std::size_t max_in_flight = 8;
  double threshold = 0.5;
  AwaitOptions await;
};

nlohmann::json EmConfigToJson(const EmConfig& config);
EmConfig EmConfigFromJson(const nlohmann::json& doc);

struct EmState {
  int iteration = 0;  // completed EM iterations
  RuleSet rules;
  TraitState traits;
  ActivationTensor activations;
  ScoreTable scores;  // from the latest E-step; empty before the first
  std::vector<double> val_loss_history;  // [0] is the initial evaluation
  CallBudget budget;

  bool operator==(const EmState&) const = default;
};

struct EStepResult {
  ScoreTable scores;
  ActivationTensor activations;
};

// Scores every (record, rule) and activates the top min(3, K) rules of each
// row, ties to the lower index.
EStepResult EStep(const std::vector<MnemonicRecord>& records,
                  const KanjiCatalog& catalog, const RuleSet& rules,
                  Scorer& scorer, std::size_t max_in_flight = 8);

// Fine-tune rows: one per record, carrying the texts of its active rules.
std::vector<FineTuneRow> FineTuneDataset(
    const std::vector<MnemonicRecord>& records, const KanjiCatalog& catalog,
    const ActivationTensor& z, const RuleSet& rules);

// Traits, then rules, then one fine-tune job. Takes the state produced by
// this iteration's E-step and returns the updated state; `state` itself is
// never modified, so a failed fine-tune leaves the caller's copy intact.
EmState MStep(const EmState& state, const std::vector<MnemonicRecord>& records,
              const KanjiCatalog& catalog, const EmConfig& config,
              Scorer& scorer, RuleGenClient& rulegen);

// Mean over validation mnemonics of the negated average score of the rules
// that the cold-start policy activates for that kanji.
double ValidationLoss(const EmState& state,
                      const std::vector<MnemonicRecord>& val,
                      const KanjiCatalog& catalog, Scorer& scorer,
                      std::size_t max_in_flight = 8, double threshold = 0.5);

// Called with iteration 0 after initialization and after every completed
// iteration.
using IterationCallback = std::function<void(const EmState&)>;

// Initialization followed by E/M iterations with early stopping. Returns the
// state with the lowest validation loss, carrying the full loss history and
// the final call counters.
EmState RunEm(const std::vector<MnemonicRecord>& train,
              const std::vector<MnemonicRecord>& val,
              const KanjiCatalog& catalog, const EmConfig& config,
              Scorer& scorer, RuleGenClient& rulegen,
              const IterationCallback& on_iteration = {});

}  // namespace mnemos

#endif  // MNEMOS_EM_H_
