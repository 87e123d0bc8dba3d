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

#ifndef MNEMOS_SYNTH_H_
#define MNEMOS_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mnemos/corpus.h"
#include "mnemos/traits.h"

namespace mnemos {

struct SynthConfig {
  int num_kanji = 50;     // I
  int num_learners = 40;  // J
  int num_rules = 10;     // K
  std::uint64_t seed = 7;
  double observation_rate = 1.0;  // < 1 masks cells with a seeded coin
};

inline constexpr int kSynthTokensPerRule = 5;
inline constexpr int kSynthFillerTokens = 3;

struct PlantedTruth {
  std::vector<std::string> learner_ids;
  std::vector<std::string> kanji_ids;
  Eigen::MatrixXd learner_affinity;     // J x K
  Eigen::MatrixXd kanji_compatibility;  // I x K
  ActivationTensor activations;         // top-min(3, K) of h + g per cell
};

struct SyntheticPopulation {
  KanjiCatalog catalog;
  std::vector<MnemonicRecord> records;  // learner-major, kanji-minor
  PlantedTruth truth;
};

std::string SynthLearnerId(int j);
std::string SynthKanjiId(int i);

SyntheticPopulation GeneratePopulation(const SynthConfig& config);

// z_ijk ~ Bernoulli(sigmoid(h_jk + g_ik)) on every cell of the full grid.
ActivationTensor BernoulliActivations(const PlantedTruth& truth, std::uint64_t seed);

// Micro-F1 of `estimate` against `planted` over the estimated pairs, which
// must all be planted.
double ActivationF1(const ActivationTensor& planted, const ActivationTensor& estimate);

// Pearson correlation of fitted (h + g) against planted (h + g) over all
// cells shared by both; nullopt when either side has zero variance.
std::optional<double> TraitCorrelation(const PlantedTruth& truth,
                                       const TraitState& fitted);

struct RecoveryReport {
  double activation_f1 = 0.0;
  std::optional<double> trait_correlation;
};

RecoveryReport Recovery(const PlantedTruth& truth, const TraitState* fitted,
                        const ActivationTensor& estimate);

nlohmann::json PlantedToJson(const PlantedTruth& truth);
PlantedTruth PlantedFromJson(const nlohmann::json& doc);

// Writes corpus.jsonl and planted.json into `dir`.
void WriteSynthetic(const std::filesystem::path& dir,
                    const SyntheticPopulation& population);

}  // namespace mnemos

#endif  // MNEMOS_SYNTH_H_
