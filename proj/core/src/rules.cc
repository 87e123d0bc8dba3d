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

#include "mnemos/rules.h"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "mnemos/errors.h"
#include "mnemos/parallel.h"
#include "mnemos/text.h"

namespace mnemos {

using nlohmann::json;

bool IsSingleSentence(std::string_view text) {
  text = Trim(text);
  if (text.empty()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n' || c == '\r') return false;
    if (c != '.' && c != '!' && c != '?') continue;
    // A terminator followed by whitespace and then more text starts a new
    // sentence; "3.5" or "e.g.," do not.
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' ||
                               text[j] == '?' || text[j] == '"' ||
                               text[j] == '\'' || text[j] == ')')) {
      ++j;
    }
    if (j < text.size() && (text[j] == ' ' || text[j] == '\t')) {
      return Trim(text.substr(j)).empty();
    }
  }
  return true;
}

RuleSet::RuleSet(std::vector<Rule> rules) {
  std::sort(rules.begin(), rules.end(),
            [](const Rule& a, const Rule& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].index != static_cast<int>(i)) {
      throw ValidationError("rule indices must cover 0.." +
                            std::to_string(rules.size() - 1) + " exactly once");
    }
    if (!IsSingleSentence(rules[i].text)) {
      throw ValidationError("rule " + std::to_string(i) +
                            " is not a single non-empty sentence");
    }
    if (rules[i].revision < 0) throw ValidationError("negative rule revision");
  }
  rules_ = std::move(rules);
}

RuleSet RuleSet::FromTexts(const std::vector<std::string>& texts,
                           int revision) {
  std::vector<Rule> rules;
  rules.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    rules.push_back({static_cast<int>(i), texts[i], revision});
  }
  return RuleSet(std::move(rules));
}

std::vector<int> TopKIndices(std::span<const double> values, int k) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](int a, int b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });
  order.resize(take);
  return order;
}

json RulesToJson(const RuleSet& rules) {
  json out = json::array();
  for (const Rule& rule : rules) {
    out.push_back(
        json{{"index", rule.index}, {"text", rule.text}, {"revision", rule.revision}});
  }
  return out;
}

RuleSet RulesFromJson(const json& array) {
  if (!array.is_array()) throw ValidationError("rules must be a JSON array");
  std::vector<Rule> rules;
  for (const auto& item : array) {
    try {
      rules.push_back({item.at("index").get<int>(),
                       item.at("text").get<std::string>(),
                       item.at("revision").get<int>()});
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed rule entry: ") + e.what());
    }
  }
  return RuleSet(std::move(rules));
}

std::vector<std::string> MockRuleGen::ProposeInitialRules(
    const RuleInitRequest& request) {
  CountCall();
  std::vector<std::string> texts;
  for (int k = 0; k < request.num_rules; ++k) {
    texts.push_back("mock-rule-" + std::to_string(k));
  }
  return texts;
}

std::vector<int> MockRuleGen::SelectRules(const KanjiEntry&,
                                          const RuleSet& rules,
                                          std::string_view mnemonic) {
  CountCall();
  const auto tokens = Tokenize(mnemonic);
  std::vector<double> overlap(rules.size(), 0.0);
  for (const Rule& rule : rules) {
    const auto words = RuleContentWords(rule.text);
    const std::unordered_set<std::string> vocab(words.begin(), words.end());
    for (const auto& token : tokens) {
      if (vocab.count(token) != 0) overlap[rule.index] += 1.0;
    }
  }
  return TopKIndices(overlap, kMaxActiveRules);
}

std::string MockRuleGen::ProposeOrthogonalRule(
    const OrthogonalRuleRequest& request) {
  CountCall();
  update_requests_.push_back(request);
  return "updated-" + std::to_string(request.rule_index) + "-" +
         std::to_string(request.new_revision);
}

std::string HttpRuleGen::Complete(const std::string& prompt) const {
  const json response =
      http_.Post("/v1/generate", json{{"prompt", prompt}, {"max_new_tokens", 1024}});
  return RequireString(response, "text", "/v1/generate");
}

std::vector<std::string> HttpRuleGen::ProposeInitialRules(
    const RuleInitRequest& request) {
  CountCall();
  return ExtractTagged(Complete(request.prompt), "rule");
}

std::vector<int> HttpRuleGen::SelectRules(const KanjiEntry& kanji,
                                          const RuleSet& rules,
                                          std::string_view mnemonic) {
  CountCall();
  const std::string reply =
      Complete(RenderActivationPrompt(kanji, rules, mnemonic));
  const auto tail = ResultTail(reply);
  if (!tail) throw ContractError("rule selection reply has no [RESULT] marker");
  const auto numbers = ParseNumberList(*tail);
  if (!numbers) {
    throw ContractError("unparseable rule selection '" + *tail + "'");
  }
  std::vector<int> indices;
  for (int n : *numbers) {
    if (n < 1) throw ContractError("rule numbers start at 1");
    indices.push_back(n - 1);
  }
  return indices;
}

std::string HttpRuleGen::ProposeOrthogonalRule(
    const OrthogonalRuleRequest& request) {
  CountCall();
  const auto rules = ExtractTagged(Complete(request.prompt), "rule");
  if (rules.empty()) throw ContractError("rule update reply has no <rule> tag");
  return rules.front();
}

std::vector<std::string> SampleInitLearners(
    const std::vector<MnemonicRecord>& records, int sample_learners) {
  if (sample_learners < 1) throw ValidationError("sample_learners must be >= 1");
  const auto sorted = LearnersByCountDescending(records);
  const std::size_t n = sorted.size();
  const std::size_t want = static_cast<std::size_t>(sample_learners);
  if (n < want) {
    throw ValidationError("rule initialization needs " + std::to_string(want) +
                          " learners, corpus has " + std::to_string(n));
  }
  const std::size_t stride = (n + want - 1) / want;
  std::vector<std::string> picked;
  for (std::size_t i = 0; i < n; i += stride) picked.push_back(sorted[i]);
  return picked;
}

std::vector<RuleInitSample> CollectInitSamples(
    const std::vector<MnemonicRecord>& records, const KanjiCatalog& catalog,
    int sample_learners) {
  const auto learners = SampleInitLearners(records, sample_learners);
  std::unordered_map<std::string, const MnemonicRecord*> longest;
  for (const auto& id : learners) longest.emplace(id, nullptr);
  for (const auto& record : records) {
    auto it = longest.find(record.learner_id);
    if (it == longest.end()) continue;
    if (it->second == nullptr || record.token_count > it->second->token_count) {
      it->second = &record;
    }
  }
  std::vector<RuleInitSample> samples;
  for (const auto& id : learners) {
    const MnemonicRecord* record = longest.at(id);
    samples.push_back({catalog.At(record->kanji_id), record->text});
  }
  return samples;
}

namespace {

void CheckRuleText(const std::string& text, const std::string& what) {
  if (!IsSingleSentence(text)) {
    throw ContractError(what + " is not a single non-empty sentence: '" +
                        text + "'");
  }
}

}  // namespace

RuleSet InitializeRules(const std::vector<MnemonicRecord>& records,
                        const KanjiCatalog& catalog, int num_rules,
                        int sample_learners, RuleGenClient& rulegen) {
  if (num_rules < 1) throw ValidationError("number of rules must be >= 1");
  RuleInitRequest request;
  request.samples = CollectInitSamples(records, catalog, sample_learners);
  request.num_rules = num_rules;
  request.prompt = RenderRuleInitPrompt(request.samples, num_rules);
  std::vector<std::string> texts = rulegen.ProposeInitialRules(request);
  if (texts.size() != static_cast<std::size_t>(num_rules)) {
    throw ContractError("rule generator returned " +
                        std::to_string(texts.size()) + " rules, expected " +
                        std::to_string(num_rules));
  }
  for (std::size_t k = 0; k < texts.size(); ++k) {
    texts[k] = std::string(Trim(texts[k]));
    CheckRuleText(texts[k], "initial rule " + std::to_string(k));
  }
  return RuleSet::FromTexts(texts, 0);
}

ActivationTensor InitialActivations(const std::vector<MnemonicRecord>& records,
                                    const KanjiCatalog& catalog,
                                    const RuleSet& rules,
                                    RuleGenClient& rulegen,
                                    std::size_t max_in_flight) {
  if (rules.empty()) throw ValidationError("initial activations: no rules");
  const int k = static_cast<int>(rules.size());
  std::vector<std::vector<int>> selected(records.size());
  ParallelFor(records.size(), max_in_flight, [&](std::size_t i) {
    const auto& record = records[i];
    std::vector<int> indices =
        rulegen.SelectRules(catalog.At(record.kanji_id), rules, record.text);
    const std::string where =
        "(kanji " + record.kanji_id + ", learner " + record.learner_id + ")";
    if (indices.size() > static_cast<std::size_t>(kMaxActiveRules)) {
      throw ContractError("rule generator selected " +
                          std::to_string(indices.size()) + " rules for " +
                          where + ", at most 3 allowed");
    }
    for (int index : indices) {
      if (index < 0 || index >= k) {
        throw ContractError("rule generator selected index " +
                            std::to_string(index) + " for " + where +
                            ", K = " + std::to_string(k));
      }
    }
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
      throw ContractError("rule generator repeated a rule for " + where);
    }
    selected[i] = std::move(indices);
  });
  ActivationTensor z(k);
  for (std::size_t i = 0; i < records.size(); ++i) {
    z.SetActive(KeyOf(records[i]), selected[i]);
  }
  return z;
}

RuleExemplars SelectExemplars(const ScoreTable& scores,
                              const std::vector<MnemonicRecord>& records,
                              int rule_index, std::size_t n) {
  if (rule_index < 0 || rule_index >= scores.num_rules()) {
    throw ValidationError("exemplar rule index out of range");
  }
  std::unordered_map<PairKey, const MnemonicRecord*, PairKeyHash> by_pair;
  for (const auto& record : records) by_pair.emplace(KeyOf(record), &record);

  std::vector<Exemplar> candidates;
  candidates.reserve(scores.num_pairs());
  for (std::size_t i = 0; i < scores.num_pairs(); ++i) {
    const PairKey& pair = scores.pairs()[i];
    auto it = by_pair.find(pair);
    if (it == by_pair.end()) {
      throw ValidationError("scored pair (" + pair.learner_id + ", " +
                            pair.kanji_id + ") has no record");
    }
    candidates.push_back({pair.learner_id, pair.kanji_id, it->second->text,
                          scores.At(i, rule_index)});
  }
  const std::size_t take = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + take,
                    candidates.end(), [](const Exemplar& a, const Exemplar& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.kanji_id != b.kanji_id) return a.kanji_id < b.kanji_id;
                      return a.learner_id < b.learner_id;
                    });
  candidates.resize(take);
  return {rule_index, std::move(candidates)};
}

std::vector<NumberedRule> ExistingRulesFor(int rule_index,
                                           const std::vector<Rule>& updated,
                                           const RuleSet& previous) {
  std::vector<NumberedRule> existing;
  for (int k = 0; k < static_cast<int>(previous.size()); ++k) {
    if (k == rule_index) continue;
    const std::string& text =
        k < rule_index ? updated.at(k).text : previous[k].text;
    existing.push_back({k + 1, text});
  }
  return existing;
}

RuleSet OrthogonalUpdate(const RuleSet& rules,
                         const std::vector<RuleExemplars>& exemplars_by_rule,
                         const KanjiCatalog& catalog, RuleGenClient& rulegen) {
  if (exemplars_by_rule.size() != rules.size()) {
    throw ValidationError("need one exemplar list per rule");
  }
  std::vector<const RuleExemplars*> by_index(rules.size(), nullptr);
  for (const auto& ex : exemplars_by_rule) {
    if (ex.rule_index < 0 || ex.rule_index >= static_cast<int>(rules.size()) ||
        by_index[ex.rule_index] != nullptr) {
      throw ValidationError("exemplar lists must cover each rule once");
    }
    by_index[ex.rule_index] = &ex;
  }

  std::vector<Rule> updated;
  updated.reserve(rules.size());
  for (int k = 0; k < static_cast<int>(rules.size()); ++k) {
    OrthogonalRuleRequest request;
    request.rule_index = k;
    request.new_revision = rules[k].revision + 1;
    request.existing_rules = ExistingRulesFor(k, updated, rules);
    for (const auto& ex : by_index[k]->exemplars) {
      request.examples.push_back({catalog.At(ex.kanji_id), ex.text});
    }
    request.prompt =
        RenderOrthogonalRulePrompt(request.existing_rules, request.examples);
    std::string text(Trim(rulegen.ProposeOrthogonalRule(request)));
    CheckRuleText(text, "updated rule " + std::to_string(k));
    updated.push_back({k, std::move(text), request.new_revision});
  }
  return RuleSet(std::move(updated));
}

}  // namespace mnemos
