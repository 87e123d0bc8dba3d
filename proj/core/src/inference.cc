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

#include "mnemos/inference.h"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "mnemos/errors.h"
#include "mnemos/parallel.h"
#include "mnemos/text.h"

namespace mnemos {

using nlohmann::json;

std::optional<IclExample> IclExampleFor(const std::vector<MnemonicRecord>& records,
                                        const KanjiCatalog& catalog,
                                        std::string_view learner_id,
                                        std::string_view exclude_kanji_id) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->learner_id == learner_id && it->kanji_id != exclude_kanji_id) {
      return IclExample{catalog.At(it->kanji_id), it->text};
    }
  }
  return std::nullopt;
}

std::vector<int> ResolveActiveRules(const EmState& state,
                                    std::string_view kanji_id,
                                    const InferenceOptions& options) {
  return ActiveIndices(PolicyActivations(state.traits, kanji_id, options.policy,
                                         options.seed, options.threshold));
}

Generation GenerateFor(const KanjiEntry& kanji, const EmState& state,
                       const InferenceOptions& options, Scorer& scorer,
                       const std::optional<IclExample>& icl_example) {
  GenerationRequest request;
  request.context = kanji;
  request.mode = options.mode;
  request.max_new_tokens = options.max_new_tokens;
  Generation out;
  out.kanji_id = kanji.kanji_id;
  if (options.mode == GenerationMode::kEmRules) {
    if (state.rules.empty()) throw ValidationError("checkpoint has no rules");
    out.active_rules = ResolveActiveRules(state, kanji.kanji_id, options);
    for (int k : out.active_rules) request.rules.push_back(state.rules[k]);
  } else if (options.mode == GenerationMode::kIclOne) {
    request.icl_example = icl_example;
  }
  out.text = scorer.Generate(request);
  if (TokenCount(out.text) > options.max_new_tokens) {
    throw ContractError("generation exceeds the token cap");
  }
  return out;
}

BatchGenerationResult BatchGenerate(const std::vector<MnemonicRecord>& records,
                                    const KanjiCatalog& catalog,
                                    const EmState& state,
                                    const InferenceOptions& options,
                                    Scorer& scorer) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return KeyOf(records[a]) < KeyOf(records[b]);
  });

  std::vector<std::optional<Generation>> outputs(order.size());
  std::vector<std::string> failures(order.size());
  ParallelFor(order.size(), options.max_in_flight, [&](std::size_t slot) {
    const MnemonicRecord& record = records[order[slot]];
    try {
      std::optional<IclExample> example;
      if (options.mode == GenerationMode::kIclOne) {
        example = IclExampleFor(records, catalog, record.learner_id, record.kanji_id);
        if (!example) {
          throw ValidationError("learner " + record.learner_id +
                                " has no other mnemonic to use as an example");
        }
      }
      Generation g =
          GenerateFor(catalog.At(record.kanji_id), state, options, scorer, example);
      g.learner_id = record.learner_id;
      outputs[slot] = std::move(g);
    } catch (const std::exception& e) {
      failures[slot] = e.what();
      if (failures[slot].empty()) failures[slot] = "generation failed";
    }
  });

  BatchGenerationResult result;
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    if (outputs[slot]) {
      result.outputs.push_back(std::move(*outputs[slot]));
    } else {
      const MnemonicRecord& record = records[order[slot]];
      result.errors.push_back({record.learner_id, record.kanji_id, failures[slot]});
    }
  }
  return result;
}

json GenerationToJson(const Generation& generation) {
  return json{{"learner_id", generation.learner_id},
              {"kanji", generation.kanji_id},
              {"active_rules", generation.active_rules},
              {"text", generation.text}};
}

Generation GenerationFromJson(const json& doc) {
  try {
    Generation g;
    g.learner_id = doc.at("learner_id").get<std::string>();
    g.kanji_id = doc.at("kanji").get<std::string>();
    g.active_rules = doc.value("active_rules", std::vector<int>{});
    g.text = doc.at("text").get<std::string>();
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed generation: ") + e.what());
  }
}

}  // namespace mnemos
