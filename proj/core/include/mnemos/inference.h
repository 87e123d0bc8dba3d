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

#ifndef MNEMOS_INFERENCE_H_
#define MNEMOS_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnemos/corpus.h"
#include "mnemos/em.h"
#include "mnemos/prompts.h"
#include "mnemos/scorer.h"
#include "mnemos/traits.h"

namespace mnemos {

struct InferenceOptions {
  GenerationMode mode = GenerationMode::kEmRules;
  ActivationPolicy policy = ActivationPolicy::kColdStart;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::size_t max_new_tokens = kMaxMnemonicTokens;
  std::size_t max_in_flight = 8;
};

struct Generation {
  std::string learner_id;
  std::string kanji_id;
  std::vector<int> active_rules;  // empty outside rule-conditioned mode
  std::string text;

  bool operator==(const Generation&) const = default;
};

struct GenerationError {
  std::string learner_id;
  std::string kanji_id;
  std::string message;
};

struct BatchGenerationResult {
  std::vector<Generation> outputs;  // sorted by (learner_id, kanji_id)
  std::vector<GenerationError> errors;
};

// The learner's latest mnemonic in corpus order for a different kanji.
std::optional<IclExample> IclExampleFor(const std::vector<MnemonicRecord>& records,
                                        const KanjiCatalog& catalog,
                                        std::string_view learner_id,
                                        std::string_view exclude_kanji_id);

// Rules the policy activates for `kanji_id`, in index order.
std::vector<int> ResolveActiveRules(const EmState& state,
                                    std::string_view kanji_id,
                                    const InferenceOptions& options);

Generation GenerateFor(const KanjiEntry& kanji, const EmState& state,
                       const InferenceOptions& options, Scorer& scorer,
                       const std::optional<IclExample>& icl_example = std::nullopt);

// One generation per record. Failures are collected, not thrown. ICL
// examples come from `records` itself (the learner's other mnemonics).
BatchGenerationResult BatchGenerate(const std::vector<MnemonicRecord>& records,
                                    const KanjiCatalog& catalog,
                                    const EmState& state,
                                    const InferenceOptions& options,
                                    Scorer& scorer);

nlohmann::json GenerationToJson(const Generation& generation);
Generation GenerationFromJson(const nlohmann::json& doc);

}  // namespace mnemos

#endif  // MNEMOS_INFERENCE_H_
