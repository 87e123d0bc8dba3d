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

#include "mnemos/scorer.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>
#include <unordered_set>
#include <utility>

#include "mnemos/errors.h"
#include "mnemos/parallel.h"
#include "mnemos/text.h"

namespace mnemos {

using nlohmann::json;

ScoreTable::ScoreTable(int num_rules, std::vector<PairKey> pairs)
    : num_rules_(num_rules), pairs_(std::move(pairs)) {
  if (num_rules_ < 0) throw ValidationError("negative rule count");
  index_.reserve(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!index_.emplace(pairs_[i], i).second) {
      throw ValidationError("duplicate pair (" + pairs_[i].learner_id + ", " +
                            pairs_[i].kanji_id + ") in score table");
    }
  }
  values_.assign(pairs_.size() * static_cast<std::size_t>(num_rules_), 0.0);
}

std::optional<std::size_t> ScoreTable::IndexOf(const PairKey& pair) const {
  auto it = index_.find(pair);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ScoreTable::Find(const PairKey& pair, int rule) const {
  if (rule < 0 || rule >= num_rules_) return std::nullopt;
  auto idx = IndexOf(pair);
  if (!idx) return std::nullopt;
  return At(*idx, rule);
}

std::string_view FineTuneStateName(FineTuneState state) {
  switch (state) {
    case FineTuneState::kPending:
      return "pending";
    case FineTuneState::kRunning:
      return "running";
    case FineTuneState::kDone:
      return "done";
    case FineTuneState::kFailed:
      return "failed";
  }
  return "unknown";
}

FineTuneState ParseFineTuneState(std::string_view name) {
  if (name == "pending") return FineTuneState::kPending;
  if (name == "running") return FineTuneState::kRunning;
  if (name == "done") return FineTuneState::kDone;
  if (name == "failed") return FineTuneState::kFailed;
  throw ContractError("unknown fine-tune status '" + std::string(name) + "'");
}

json DefaultFineTuneHyperparams() {
  return json{{"lora_r", 128}, {"lora_alpha", 256}, {"dropout", 0.2},
              {"lr", 1e-5}};
}

double Scorer::Score(const KanjiEntry& context, const Rule& rule,
                     std::string_view mnemonic) {
  if (TokenCount(mnemonic) == 0) throw ValidationError("empty mnemonic");
  ++score_calls_;
  const double value = DoScore(context, rule, mnemonic);
  if (!std::isfinite(value)) throw ContractError("non-finite score");
  return value;
}

std::string Scorer::Generate(const GenerationRequest& request) {
  if (request.mode == GenerationMode::kEmRules && request.rules.empty()) {
    throw ValidationError("rule-conditioned generation needs at least one rule");
  }
  if (request.mode == GenerationMode::kIclOne && !request.icl_example) {
    throw ValidationError("icl generation needs an example mnemonic");
  }
  if (request.max_new_tokens == 0) throw ValidationError("max_new_tokens is 0");
  ++generate_calls_;
  const std::string raw = DoGenerate(request, RenderGenerationPrompt(request));
  std::string text = TruncateTokens(raw, request.max_new_tokens);
  if (TokenCount(text) == 0) {
    throw ContractError("empty generation for kanji " +
                        request.context.kanji_id);
  }
  return text;
}

std::string Scorer::SubmitFineTune(const FineTuneJob& job) {
  if (job.rows.empty()) throw ValidationError("empty fine-tune dataset");
  for (const auto& row : job.rows) {
    if (row.rule_texts.size() > 3) {
      throw ValidationError("fine-tune row for " + row.context.kanji_id +
                            " carries more than 3 rules");
    }
  }
  ++fine_tune_calls_;
  std::string id = DoSubmitFineTune(job);
  if (id.empty()) throw ContractError("fine-tune submission returned no job id");
  return id;
}

void RunFineTune(Scorer& scorer, FineTuneJob& job, const AwaitOptions& options) {
  job.job_id = scorer.SubmitFineTune(job);
  job.status = FineTuneState::kPending;
  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  while (true) {
    const FineTuneStatus status = scorer.PollFineTune(job.job_id);
    job.status = status.state;
    if (status.state == FineTuneState::kDone) return;
    if (status.state == FineTuneState::kFailed) {
      throw ContractError("fine-tune job " + job.job_id + " failed: " +
                          (status.reason.empty() ? "no reason given"
                                                 : status.reason));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TransportError("fine-tune job " + job.job_id + " timed out");
    }
    std::this_thread::sleep_for(options.poll_interval);
  }
}

std::string SyntheticRuleToken(int rule_index, int slot) {
  return "r" + std::to_string(rule_index) + "w" + std::to_string(slot);
}

namespace {

const std::unordered_set<std::string_view>& Stopwords() {
  static const std::unordered_set<std::string_view> kWords = {
      "a",     "an",    "the",  "and",   "or",    "but",   "of",   "to",
      "in",    "on",    "at",   "by",    "for",   "with",  "from", "as",
      "is",    "are",   "was",  "were",  "be",    "been",  "it",   "its",
      "this",  "that",  "these", "those", "their", "them",  "they", "into",
      "use",   "uses",  "using", "story", "stories", "mnemonic", "kanji",
      "each",  "which", "when", "while", "than",  "so",    "such", "not",
      "no",    "do",    "does", "should", "must", "can",   "will", "more",
      "make",  "makes", "rule", "words", "word",  "one",   "all",  "any",
  };
  return kWords;
}

bool IsSyntheticToken(std::string_view token, int rule_index) {
  if (token.size() < 4 || token.front() != 'r') return false;
  const char* begin = token.data() + 1;
  const char* end = token.data() + token.size();
  int rule = -1;
  auto [p, ec] = std::from_chars(begin, end, rule);
  if (ec != std::errc() || p == begin || p == end || *p != 'w') return false;
  int slot = -1;
  const char* slot_begin = p + 1;
  auto [q, ec2] = std::from_chars(slot_begin, end, slot);
  if (ec2 != std::errc() || q != end || q == slot_begin) return false;
  return rule == rule_index && slot >= 0 && slot < kSyntheticVocabSize;
}

}  // namespace

std::vector<std::string> RuleContentWords(std::string_view rule_text) {
  std::vector<std::string> words;
  for (auto& token : Tokenize(rule_text)) {
    if (Stopwords().count(token) == 0) words.push_back(std::move(token));
  }
  return words;
}

double MockJitter(std::string_view kanji_id, int rule_index,
                  std::string_view mnemonic) {
  std::string key(kanji_id);
  key += '\x1f';
  key += std::to_string(rule_index);
  key += '\x1f';
  key += mnemonic;
  const std::uint64_t h = Fnv1a64(key);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * 0.01;
}

double MockOverlap(const Rule& rule, std::string_view mnemonic) {
  const auto tokens = Tokenize(mnemonic);
  if (tokens.empty()) return 0.0;
  const auto content = RuleContentWords(rule.text);
  const std::unordered_set<std::string> vocab(content.begin(), content.end());
  std::size_t hits = 0;
  for (const auto& token : tokens) {
    if (IsSyntheticToken(token, rule.index) || vocab.count(token) != 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

void MockScorer::FailNextFineTune(std::string reason) {
  std::lock_guard<std::mutex> lock(mu_);
  fail_next_ = std::move(reason);
}

double MockScorer::DoScore(const KanjiEntry& context, const Rule& rule,
                           std::string_view mnemonic) {
  return kBaseScore + weight_.load() * MockOverlap(rule, mnemonic) +
         MockJitter(context.kanji_id, rule.index, mnemonic);
}

std::string MockScorer::DoGenerate(const GenerationRequest& request,
                                   const std::string& prompt) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    last_prompt_ = prompt;
  }
  std::vector<std::string> parts;
  parts.push_back(request.context.keyword);
  for (const auto& c : request.context.component_keywords) parts.push_back(c);
  if (request.mode == GenerationMode::kEmRules) {
    for (const auto& rule : request.rules) {
      parts.push_back("rule-" + std::to_string(rule.index));
    }
  }
  return Join(parts, " ");
}

std::string MockScorer::DoSubmitFineTune(const FineTuneJob& job) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = "mock-ft-" + std::to_string(++jobs_submitted_);
  last_hyperparams_ = job.hyperparams;
  last_dataset_ = job.rows;
  if (fail_next_) {
    jobs_[id] = {FineTuneState::kFailed, *fail_next_};
    fail_next_.reset();
    return id;
  }
  weight_.store(std::min(kMaxWeight, weight_.load() + kWeightStep));
  jobs_[id] = {FineTuneState::kDone, ""};
  return id;
}

FineTuneStatus MockScorer::PollFineTune(const std::string& job_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw ContractError("unknown job id " + job_id);
  return it->second;
}

json MockScorer::last_hyperparams() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_hyperparams_;
}

std::size_t MockScorer::last_fine_tune_rows() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_dataset_.size();
}

std::vector<FineTuneRow> MockScorer::last_fine_tune_dataset() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_dataset_;
}

std::string MockScorer::last_prompt() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_prompt_;
}

json ContextJson(const KanjiEntry& kanji) {
  return json{{"kanji", kanji.glyph},
              {"keyword", kanji.keyword},
              {"component_keywords", kanji.component_keywords}};
}

double HttpScorer::DoScore(const KanjiEntry& context, const Rule& rule,
                           std::string_view mnemonic) {
  constexpr std::string_view kEndpoint = "/v1/score";
  const json response = http_.Post(kEndpoint, json{{"context", ContextJson(context)},
                                                  {"rule_text", rule.text},
                                                  {"mnemonic", mnemonic}});
  const json& logprobs = RequireField(response, "token_logprobs", kEndpoint);
  if (!logprobs.is_array() || logprobs.empty()) {
    throw ContractError("/v1/score: token_logprobs must be a non-empty array");
  }
  double sum = 0.0;
  for (const auto& value : logprobs) {
    if (!value.is_number()) {
      throw ContractError("/v1/score: non-numeric token logprob");
    }
    sum += value.get<double>();
  }
  return sum / static_cast<double>(logprobs.size());
}

std::string HttpScorer::DoGenerate(const GenerationRequest& request,
                                   const std::string& prompt) {
  const json response =
      http_.Post("/v1/generate", json{{"prompt", prompt},
                                      {"max_new_tokens", request.max_new_tokens}});
  return RequireString(response, "text", "/v1/generate");
}

std::string HttpScorer::DoSubmitFineTune(const FineTuneJob& job) {
  json rows = json::array();
  for (const auto& row : job.rows) {
    rows.push_back(json{{"context", ContextJson(row.context)},
                        {"rules", row.rule_texts},
                        {"mnemonic", row.mnemonic}});
  }
  const json response = http_.Post(
      "/v1/finetune", json{{"rows", std::move(rows)}, {"hyperparams", job.hyperparams}});
  return RequireString(response, "job_id", "/v1/finetune");
}

FineTuneStatus HttpScorer::PollFineTune(const std::string& job_id) {
  const std::string path = "/v1/finetune/" + job_id;
  const json response = http_.Get(path);
  FineTuneStatus status;
  status.state = ParseFineTuneState(RequireString(response, "status", path));
  auto reason = response.find("reason");
  if (reason != response.end() && reason->is_string()) {
    status.reason = reason->get<std::string>();
  }
  return status;
}

ScoreTable BatchScore(Scorer& scorer, const KanjiCatalog& catalog,
                      const std::vector<MnemonicRecord>& records,
                      const RuleSet& rules, const BatchOptions& options) {
  if (rules.empty()) throw ValidationError("batch score: empty rule set");
  if (records.empty()) throw ValidationError("batch score: no observations");
  std::vector<PairKey> pairs;
  pairs.reserve(records.size());
  std::vector<const KanjiEntry*> contexts;
  contexts.reserve(records.size());
  for (const auto& record : records) {
    pairs.push_back(KeyOf(record));
    contexts.push_back(&catalog.At(record.kanji_id));
  }
  const int k = static_cast<int>(rules.size());
  ScoreTable table(k, std::move(pairs));
  ParallelFor(records.size() * k, options.max_in_flight, [&](std::size_t task) {
    const std::size_t row = task / k;
    const int rule = static_cast<int>(task % k);
    try {
      table.Set(row, rule, scorer.Score(*contexts[row], rules[rule],
                                        records[row].text));
    } catch (const Error& e) {
      throw e.WithContext("score (kanji " + records[row].kanji_id +
                          ", learner " + records[row].learner_id + ", rule " +
                          std::to_string(rule) + ")");
    }
  });
  return table;
}

}  // namespace mnemos
