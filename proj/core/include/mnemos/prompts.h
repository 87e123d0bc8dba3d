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

#ifndef MNEMOS_PROMPTS_H_
#define MNEMOS_PROMPTS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnemos/corpus.h"
#include "mnemos/rule_set.h"

namespace mnemos {

enum class GenerationMode {
  kEmRules,  // rule-conditioned template
  kNoRules,  // zero-shot / SFT template
  kIclOne,   // no-rules template preceded by one of the learner's mnemonics
};

std::string_view GenerationModeName(GenerationMode mode);
// Accepts "em", "zs", "icl" as well as the canonical names.
GenerationMode ParseGenerationMode(std::string_view name);

struct IclExample {
  KanjiEntry kanji;
  std::string mnemonic;
};

struct GenerationRequest {
  KanjiEntry context;
  std::vector<Rule> rules;  // active rules; required for kEmRules
  GenerationMode mode = GenerationMode::kEmRules;
  std::optional<IclExample> icl_example;  // required for kIclOne
  std::size_t max_new_tokens = kMaxMnemonicTokens;
};

std::string RenderGenerationPrompt(const GenerationRequest& request);

struct RuleInitSample {
  KanjiEntry kanji;
  std::string mnemonic;
};

std::string RenderRuleInitPrompt(const std::vector<RuleInitSample>& samples,
                                 int num_rules);

// Asks which of `rules` (numbered from 1) the mnemonic follows, at most three.
std::string RenderActivationPrompt(const KanjiEntry& kanji,
                                   const RuleSet& rules,
                                   std::string_view mnemonic);

struct NumberedRule {
  int number;  // 1-based display number
  std::string text;
};

// The orthogonal rule-update prompt: existing rules, then one block per
// exemplar mnemonic.
std::string RenderOrthogonalRulePrompt(
    const std::vector<NumberedRule>& existing_rules,
    const std::vector<RuleInitSample>& examples);

struct WinRatePromptInput {
  IclExample history;  // the learner's earlier mnemonic
  KanjiEntry target;
  std::string response_a;
  std::string response_b;
  std::string reference;
};

std::string RenderWinRatePrompt(const WinRatePromptInput& input);

// Asks the judge which of the numbered rules the story satisfies.
std::string RenderCompliancePrompt(const KanjiEntry& kanji,
                                   std::string_view story,
                                   const std::vector<std::string>& rules);

// Contents of every <tag>...</tag> block, trimmed, in order.
std::vector<std::string> ExtractTagged(std::string_view text,
                                       std::string_view tag);

// Text after the last "[RESULT]" marker, trimmed; nullopt when absent.
std::optional<std::string> ResultTail(std::string_view text);

// Parses "1, 4, 7" / "none" into the listed numbers. nullopt on garbage.
std::optional<std::vector<int>> ParseNumberList(std::string_view text);

}  // namespace mnemos

#endif  // MNEMOS_PROMPTS_H_
