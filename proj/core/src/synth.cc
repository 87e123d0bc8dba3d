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

#include "mnemos/synth.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mnemos/checkpoint.h"
#include "mnemos/errors.h"
#include "mnemos/random.h"
#include "mnemos/rules.h"
#include "mnemos/scorer.h"
#include "mnemos/text.h"

namespace mnemos {

using nlohmann::json;

std::string SynthLearnerId(int j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "u%04d", j);
  return buf;
}

std::string SynthKanjiId(int i) { return EncodeUtf8(static_cast<char32_t>(0x4E00 + i)); }

namespace {

constexpr const char* kFiller[kSynthFillerTokens] = {"then", "so", "remember"};

}  // namespace

SyntheticPopulation GeneratePopulation(const SynthConfig& config) {
  if (config.num_kanji < 1 || config.num_learners < 1 || config.num_rules < 1) {
    throw ValidationError("synthetic population needs I, J, K >= 1");
  }
  if (config.num_kanji > 20000) throw ValidationError("at most 20000 synthetic kanji");
  if (!(config.observation_rate > 0.0 && config.observation_rate <= 1.0)) {
    throw ValidationError("observation rate must lie in (0, 1]");
  }
  const int n_kanji = config.num_kanji;
  const int n_learners = config.num_learners;
  const int k = config.num_rules;
  Rng rng(config.seed);

  SyntheticPopulation pop;
  PlantedTruth& truth = pop.truth;
  truth.learner_affinity.resize(n_learners, k);
  truth.kanji_compatibility.resize(n_kanji, k);
  for (int j = 0; j < n_learners; ++j) {
    for (int c = 0; c < k; ++c) truth.learner_affinity(j, c) = rng.Normal();
  }
  for (int i = 0; i < n_kanji; ++i) {
    for (int c = 0; c < k; ++c) truth.kanji_compatibility(i, c) = rng.Normal();
  }
  for (int j = 0; j < n_learners; ++j) truth.learner_ids.push_back(SynthLearnerId(j));
  for (int i = 0; i < n_kanji; ++i) {
    const std::string id = SynthKanjiId(i);
    truth.kanji_ids.push_back(id);
    const std::string n = std::to_string(i);
    pop.catalog.Add({id, id, "meaning" + n, {"part" + n + "a", "part" + n + "b"}});
  }

  truth.activations = ActivationTensor(k);
  std::vector<double> logits(k);
  for (int j = 0; j < n_learners; ++j) {
    for (int i = 0; i < n_kanji; ++i) {
      if (config.observation_rate < 1.0 && !rng.Bernoulli(config.observation_rate)) {
        continue;
      }
      for (int c = 0; c < k; ++c) {
        logits[c] = truth.learner_affinity(j, c) + truth.kanji_compatibility(i, c);
      }
      std::vector<int> active = TopKIndices(logits, kMaxActiveRules);
      std::sort(active.begin(), active.end());
      const PairKey pair{truth.learner_ids[j], truth.kanji_ids[i]};
      truth.activations.SetActive(pair, active);

      const KanjiEntry& entry = pop.catalog.entries()[i];
      std::vector<std::string> words{entry.keyword};
      for (const auto& part : entry.component_keywords) words.push_back(part);
      for (int rule : active) {
        for (int t = 0; t < kSynthTokensPerRule; ++t) {
          words.push_back(SyntheticRuleToken(
              rule, static_cast<int>(rng.Index(kSyntheticVocabSize))));
        }
      }
      for (const char* filler : kFiller) words.emplace_back(filler);
      std::string text = Join(words, " ");
      const std::size_t tokens = TokenCount(text);
      pop.records.push_back({pair.learner_id, pair.kanji_id, std::move(text), tokens});
    }
  }
  return pop;
}

ActivationTensor BernoulliActivations(const PlantedTruth& truth, std::uint64_t seed) {
  Rng rng(seed);
  const int k = static_cast<int>(truth.learner_affinity.cols());
  ActivationTensor z(k);
  std::vector<std::uint8_t> bits(k);
  for (std::size_t j = 0; j < truth.learner_ids.size(); ++j) {
    for (std::size_t i = 0; i < truth.kanji_ids.size(); ++i) {
      for (int c = 0; c < k; ++c) {
        const double p = Sigmoid(truth.learner_affinity(j, c) +
                                 truth.kanji_compatibility(i, c));
        bits[c] = rng.Bernoulli(p) ? 1 : 0;
      }
      z.SetRow({truth.learner_ids[j], truth.kanji_ids[i]}, bits);
    }
  }
  return z;
}

double ActivationF1(const ActivationTensor& planted, const ActivationTensor& estimate) {
  if (planted.num_rules() != estimate.num_rules()) {
    throw ValidationError("activation F1: rule counts differ");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t e = 0; e < estimate.size(); ++e) {
    const auto idx = planted.IndexOf(estimate.pairs()[e]);
    if (!idx) {
      throw ValidationError("activation F1: no planted row for (" +
                            estimate.pairs()[e].learner_id + ", " +
                            estimate.pairs()[e].kanji_id + ")");
    }
    const auto truth_row = planted.Row(*idx);
    const auto est_row = estimate.Row(e);
    for (int c = 0; c < planted.num_rules(); ++c) {
      if (truth_row[c] && est_row[c]) ++tp;
      else if (est_row[c]) ++fp;
      else if (truth_row[c]) ++fn;
    }
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::optional<double> TraitCorrelation(const PlantedTruth& truth,
                                       const TraitState& fitted) {
  const int k = static_cast<int>(truth.learner_affinity.cols());
  if (fitted.num_rules() != k) throw ValidationError("trait correlation: rule counts differ");
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < truth.learner_ids.size(); ++j) {
    const auto fj = fitted.LearnerRow(truth.learner_ids[j]);
    if (!fj) continue;
    for (std::size_t i = 0; i < truth.kanji_ids.size(); ++i) {
      const auto fi = fitted.KanjiRow(truth.kanji_ids[i]);
      if (!fi) continue;
      for (int c = 0; c < k; ++c) {
        xs.push_back(fitted.learner_affinity()(*fj, c) +
                     fitted.kanji_compatibility()(*fi, c));
        ys.push_back(truth.learner_affinity(j, c) + truth.kanji_compatibility(i, c));
      }
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    mx += xs[t];
    my += ys[t];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    sxy += (xs[t] - mx) * (ys[t] - my);
    sxx += (xs[t] - mx) * (xs[t] - mx);
    syy += (ys[t] - my) * (ys[t] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

RecoveryReport Recovery(const PlantedTruth& truth, const TraitState* fitted,
                        const ActivationTensor& estimate) {
  RecoveryReport report;
  report.activation_f1 = ActivationF1(truth.activations, estimate);
  if (fitted != nullptr) report.trait_correlation = TraitCorrelation(truth, *fitted);
  return report;
}

json PlantedToJson(const PlantedTruth& truth) {
  const TraitState as_state(truth.learner_ids, truth.kanji_ids, truth.learner_affinity,
                            truth.kanji_compatibility);
  return json{{"traits", TraitsToJson(as_state)},
              {"activations", ActivationsToJson(truth.activations)}};
}

PlantedTruth PlantedFromJson(const json& doc) {
  try {
    const TraitState state = TraitsFromJson(doc.at("traits"));
    PlantedTruth truth;
    truth.learner_ids = state.learner_ids();
    truth.kanji_ids = state.kanji_ids();
    truth.learner_affinity = state.learner_affinity();
    truth.kanji_compatibility = state.kanji_compatibility();
    truth.activations = ActivationsFromJson(doc.at("activations"));
    return truth;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed planted truth: ") + e.what());
  }
}

void WriteSynthetic(const std::filesystem::path& dir,
                    const SyntheticPopulation& population) {
  std::filesystem::create_directories(dir);
  WriteCorpus(dir / "corpus.jsonl", population.catalog, population.records);
  std::ofstream out(dir / "planted.json", std::ios::binary);
  if (!out) throw ValidationError("cannot write " + (dir / "planted.json").string());
  out << PlantedToJson(population.truth).dump(1) << "\n";
}

}  // namespace mnemos
