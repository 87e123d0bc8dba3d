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

#include "mnemos/em.h"

#include <algorithm>
#include <limits>
#include <set>

#include "mnemos/errors.h"
#include "mnemos/parallel.h"

namespace mnemos {

using nlohmann::json;

std::int64_t BudgetCheck(std::int64_t num_rules, std::int64_t iterations,
                         std::int64_t num_kanji, std::int64_t num_learners) {
  if (num_rules < 0 || iterations < 0 || num_kanji < 0 || num_learners < 0) {
    throw ValidationError("budget inputs must be nonnegative");
  }
  return num_rules * iterations + num_kanji * num_learners * num_rules;
}

json EmConfigToJson(const EmConfig& config) {
  return json{
      {"num_rules", config.num_rules},
      {"max_iters", config.max_iters},
      {"patience", config.patience},
      {"exemplars", config.exemplars},
      {"sample_learners", config.sample_learners},
      {"fit",
       {{"step", config.fit.step},
        {"max_iterations", config.fit.max_iterations},
        {"tolerance", config.fit.tolerance},
        {"l2", config.fit.l2},
        {"step_growth", config.fit.step_growth}}},
      {"hyperparams", config.hyperparams},
      {"max_in_flight", config.max_in_flight},
      {"threshold", config.threshold},
  };
}

EmConfig EmConfigFromJson(const json& doc) {
  EmConfig config;
  try {
    config.num_rules = doc.at("num_rules").get<int>();
    config.max_iters = doc.at("max_iters").get<int>();
    config.patience = doc.at("patience").get<int>();
    config.exemplars = doc.at("exemplars").get<std::size_t>();
    config.sample_learners = doc.at("sample_learners").get<int>();
    const json& fit = doc.at("fit");
    config.fit.step = fit.at("step").get<double>();
    config.fit.max_iterations = fit.at("max_iterations").get<int>();
    config.fit.tolerance = fit.at("tolerance").get<double>();
    config.fit.l2 = fit.at("l2").get<double>();
    config.fit.step_growth = fit.at("step_growth").get<double>();
    config.hyperparams = doc.at("hyperparams");
    config.max_in_flight = doc.at("max_in_flight").get<std::size_t>();
    config.threshold = doc.at("threshold").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed EM config: ") + e.what());
  }
  return config;
}

EStepResult EStep(const std::vector<MnemonicRecord>& records,
                  const KanjiCatalog& catalog, const RuleSet& rules,
                  Scorer& scorer, std::size_t max_in_flight) {
  if (rules.empty()) throw ValidationError("E-step: empty rule set");
  EStepResult out;
  out.scores = BatchScore(scorer, catalog, records, rules, {max_in_flight});
  out.activations = ActivationTensor(static_cast<int>(rules.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.activations.SetActive(KeyOf(records[i]),
                              TopKIndices(out.scores.Row(i), kMaxActiveRules));
  }
  return out;
}

std::vector<FineTuneRow> FineTuneDataset(
    const std::vector<MnemonicRecord>& records, const KanjiCatalog& catalog,
    const ActivationTensor& z, const RuleSet& rules) {
  std::vector<FineTuneRow> rows;
  rows.reserve(records.size());
  for (const auto& record : records) {
    const auto index = z.IndexOf(KeyOf(record));
    if (!index) {
      throw ValidationError("no activations for (" + record.learner_id + ", " +
                            record.kanji_id + ")");
    }
    FineTuneRow row{catalog.At(record.kanji_id), {}, record.text};
    for (int k : z.ActiveIndices(*index)) row.rule_texts.push_back(rules[k].text);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void FineTune(const std::vector<MnemonicRecord>& records,
              const KanjiCatalog& catalog, const ActivationTensor& z,
              const RuleSet& rules, const EmConfig& config, Scorer& scorer) {
  FineTuneJob job;
  job.rows = FineTuneDataset(records, catalog, z, rules);
  job.hyperparams = config.hyperparams;
  RunFineTune(scorer, job, config.await);
}

}  // namespace

EmState MStep(const EmState& state, const std::vector<MnemonicRecord>& records,
              const KanjiCatalog& catalog, const EmConfig& config,
              Scorer& scorer, RuleGenClient& rulegen) {
  if (state.scores.num_pairs() != records.size() ||
      state.activations.size() != records.size()) {
    throw ValidationError("M-step needs this iteration's E-step results");
  }
  EmState next = state;
  next.traits = FitTraits(state.activations, config.fit);

  std::vector<RuleExemplars> exemplars;
  exemplars.reserve(state.rules.size());
  for (int k = 0; k < static_cast<int>(state.rules.size()); ++k) {
    exemplars.push_back(SelectExemplars(state.scores, records, k, config.exemplars));
  }
  next.rules = OrthogonalUpdate(state.rules, exemplars, catalog, rulegen);

  FineTune(records, catalog, state.activations, next.rules, config, scorer);
  ++next.budget.finetune_jobs;
  return next;
}

double ValidationLoss(const EmState& state,
                      const std::vector<MnemonicRecord>& val,
                      const KanjiCatalog& catalog, Scorer& scorer,
                      std::size_t max_in_flight, double threshold) {
  if (val.empty()) throw ValidationError("validation split is empty");
  std::vector<double> losses(val.size(), 0.0);
  ParallelFor(val.size(), max_in_flight, [&](std::size_t i) {
    const auto& record = val[i];
    const auto active =
        ActiveIndices(ColdStartActivations(state.traits, record.kanji_id, threshold));
    const KanjiEntry& context = catalog.At(record.kanji_id);
    double sum = 0.0;
    for (int k : active) sum += scorer.Score(context, state.rules[k], record.text);
    losses[i] = -sum / static_cast<double>(active.size());
  });
  double total = 0.0;
  for (double loss : losses) total += loss;
  return total / static_cast<double>(val.size());
}

EmState RunEm(const std::vector<MnemonicRecord>& train,
              const std::vector<MnemonicRecord>& val,
              const KanjiCatalog& catalog, const EmConfig& config,
              Scorer& scorer, RuleGenClient& rulegen,
              const IterationCallback& on_iteration) {
  if (train.empty()) throw ValidationError("training split is empty");
  if (val.empty()) throw ValidationError("validation split is empty");
  if (config.num_rules < 1) throw ValidationError("number of rules must be >= 1");
  if (config.max_iters < 0) throw ValidationError("max_iters must be >= 0");
  if (config.patience < 1) throw ValidationError("patience must be >= 1");

  std::set<std::string> learners;
  std::set<std::string> kanji;
  for (const auto& r : train) {
    learners.insert(r.learner_id);
    kanji.insert(r.kanji_id);
  }

  const std::size_t rulegen_start = rulegen.calls();
  const std::size_t score_start = scorer.score_calls();
  auto refresh_budget = [&](EmState& s, std::int64_t finetunes) {
    s.budget.rulegen_calls =
        static_cast<std::int64_t>(rulegen.calls() - rulegen_start);
    s.budget.score_calls =
        static_cast<std::int64_t>(scorer.score_calls() - score_start);
    s.budget.finetune_jobs = finetunes;
  };

  EmState state;
  state.budget.expected_rulegen =
      BudgetCheck(config.num_rules, config.max_iters,
                  static_cast<std::int64_t>(kanji.size()),
                  static_cast<std::int64_t>(learners.size()));
  state.rules = InitializeRules(train, catalog, config.num_rules,
                                config.sample_learners, rulegen);
  state.activations = InitialActivations(train, catalog, state.rules, rulegen,
                                         config.max_in_flight);
  state.scores = ScoreTable(config.num_rules, {});
  FineTune(train, catalog, state.activations, state.rules, config, scorer);
  state.traits = FitTraits(state.activations, config.fit);
  state.val_loss_history.push_back(ValidationLoss(
      state, val, catalog, scorer, config.max_in_flight, config.threshold));
  refresh_budget(state, 1);
  if (on_iteration) on_iteration(state);

  EmState best = state;
  double best_loss = state.val_loss_history.back();
  int stale = 0;
  for (int t = 1; t <= config.max_iters; ++t) {
    EmState current = state;
    EStepResult e = EStep(train, catalog, current.rules, scorer, config.max_in_flight);
    current.scores = std::move(e.scores);
    current.activations = std::move(e.activations);

    EmState next = MStep(current, train, catalog, config, scorer, rulegen);
    next.iteration = t;
    next.val_loss_history.push_back(ValidationLoss(
        next, val, catalog, scorer, config.max_in_flight, config.threshold));
    refresh_budget(next, next.budget.finetune_jobs);
    if (on_iteration) on_iteration(next);
    state = std::move(next);

    const double loss = state.val_loss_history.back();
    if (loss < best_loss) {
      best_loss = loss;
      best = state;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  best.val_loss_history = state.val_loss_history;
  best.budget = state.budget;
  return best;
}

}  // namespace mnemos
