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

#ifndef MNEMOS_SCORER_H_
#define MNEMOS_SCORER_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnemos/corpus.h"
#include "mnemos/http_transport.h"
#include "mnemos/prompts.h"
#include "mnemos/rule_set.h"

namespace mnemos {

// Per-token mean log-likelihood for every (pair, rule). Pairs keep the order
// they were given in; rows are contiguous.
class ScoreTable {
 public:
  ScoreTable() = default;
  ScoreTable(int num_rules, std::vector<PairKey> pairs);

  int num_rules() const { return num_rules_; }
  std::size_t num_pairs() const { return pairs_.size(); }
  const std::vector<PairKey>& pairs() const { return pairs_; }

  double At(std::size_t pair_index, int rule) const {
    return values_[pair_index * num_rules_ + rule];
  }
  void Set(std::size_t pair_index, int rule, double value) {
    values_[pair_index * num_rules_ + rule] = value;
  }
  std::span<const double> Row(std::size_t pair_index) const {
    return {values_.data() + pair_index * num_rules_,
            static_cast<std::size_t>(num_rules_)};
  }
  std::optional<std::size_t> IndexOf(const PairKey& pair) const;
  std::optional<double> Find(const PairKey& pair, int rule) const;

  bool operator==(const ScoreTable& other) const {
    return num_rules_ == other.num_rules_ && pairs_ == other.pairs_ &&
           values_ == other.values_;
  }

 private:
  int num_rules_ = 0;
  std::vector<PairKey> pairs_;
  std::unordered_map<PairKey, std::size_t, PairKeyHash> index_;
  std::vector<double> values_;
};

struct FineTuneRow {
  KanjiEntry context;
  std::vector<std::string> rule_texts;  // at most 3
  std::string mnemonic;
};

enum class FineTuneState { kPending, kRunning, kDone, kFailed };

std::string_view FineTuneStateName(FineTuneState state);
FineTuneState ParseFineTuneState(std::string_view name);

struct FineTuneStatus {
  FineTuneState state = FineTuneState::kPending;
  std::string reason;  // adapter-provided, mostly for kFailed
};

struct FineTuneJob {
  std::vector<FineTuneRow> rows;
  nlohmann::json hyperparams = nlohmann::json::object();
  std::string job_id;
  FineTuneState status = FineTuneState::kPending;
};

// Adapter hyperparameters forwarded verbatim with every fine-tune job.
nlohmann::json DefaultFineTuneHyperparams();

// Scoring, generation and fine-tune dispatch. The public entry points check
// preconditions and post-process; subclasses implement the Do* hooks.
// Implementations must tolerate concurrent Score/Generate calls.
class Scorer {
 public:
  virtual ~Scorer() = default;

  double Score(const KanjiEntry& context, const Rule& rule,
               std::string_view mnemonic);

  // Returns the generation truncated to request.max_new_tokens tokens.
  std::string Generate(const GenerationRequest& request);

  std::string SubmitFineTune(const FineTuneJob& job);
  virtual FineTuneStatus PollFineTune(const std::string& job_id) = 0;

  std::size_t score_calls() const { return score_calls_.load(); }
  std::size_t generate_calls() const { return generate_calls_.load(); }
  std::size_t fine_tune_calls() const { return fine_tune_calls_.load(); }

 protected:
  virtual double DoScore(const KanjiEntry& context, const Rule& rule,
                         std::string_view mnemonic) = 0;
  virtual std::string DoGenerate(const GenerationRequest& request,
                                 const std::string& prompt) = 0;
  virtual std::string DoSubmitFineTune(const FineTuneJob& job) = 0;

 private:
  std::atomic<std::size_t> score_calls_{0};
  std::atomic<std::size_t> generate_calls_{0};
  std::atomic<std::size_t> fine_tune_calls_{0};
};

struct AwaitOptions {
  std::chrono::milliseconds poll_interval{2000};
  std::chrono::milliseconds timeout{std::chrono::hours(24)};
};

// Submits `job`, polls until done, and records id/status on the job. A failed
// job raises a contract error carrying the adapter's reason.
void RunFineTune(Scorer& scorer, FineTuneJob& job,
                 const AwaitOptions& options = {});

// Token "r{rule}w{slot}" from the synthetic per-rule vocabularies.
std::string SyntheticRuleToken(int rule_index, int slot);
inline constexpr int kSyntheticVocabSize = 50;

// Content words of a rule text (tokens minus a small stopword list).
std::vector<std::string> RuleContentWords(std::string_view rule_text);

// Deterministic jitter in [-0.01, 0.01] keyed on (kanji, rule, mnemonic).
double MockJitter(std::string_view kanji_id, int rule_index,
                  std::string_view mnemonic);

// Share of mnemonic tokens (with multiplicity) that belong to vocab(rule):
// the synthetic tokens of rule.index plus the content words of rule.text.
double MockOverlap(const Rule& rule, std::string_view mnemonic);

class MockScorer : public Scorer {
 public:
  static constexpr double kInitialWeight = 2.0;
  static constexpr double kWeightStep = 0.1;
  static constexpr double kMaxWeight = 3.0;
  static constexpr double kBaseScore = -3.0;

  MockScorer() = default;
  explicit MockScorer(double weight) : weight_(weight) {}

  double weight() const { return weight_.load(); }
  void set_weight(double weight) { weight_.store(weight); }

  // The next submitted job reports kFailed with `reason` and leaves w alone.
  void FailNextFineTune(std::string reason);

  FineTuneStatus PollFineTune(const std::string& job_id) override;

  nlohmann::json last_hyperparams() const;
  std::size_t last_fine_tune_rows() const;
  std::vector<FineTuneRow> last_fine_tune_dataset() const;
  std::string last_prompt() const;

 protected:
  double DoScore(const KanjiEntry& context, const Rule& rule,
                 std::string_view mnemonic) override;
  std::string DoGenerate(const GenerationRequest& request,
                         const std::string& prompt) override;
  std::string DoSubmitFineTune(const FineTuneJob& job) override;

 private:
  std::atomic<double> weight_{kInitialWeight};
  std::size_t jobs_submitted_ = 0;

  mutable std::mutex mu_;
  std::optional<std::string> fail_next_;
  std::unordered_map<std::string, FineTuneStatus> jobs_;
  nlohmann::json last_hyperparams_;
  std::vector<FineTuneRow> last_dataset_;
  std::string last_prompt_;
};

// Context object sent over the wire for a kanji.
nlohmann::json ContextJson(const KanjiEntry& kanji);

class HttpScorer : public Scorer {
 public:
  explicit HttpScorer(HttpOptions options) : http_(std::move(options)) {}

  FineTuneStatus PollFineTune(const std::string& job_id) override;

 protected:
  double DoScore(const KanjiEntry& context, const Rule& rule,
                 std::string_view mnemonic) override;
  std::string DoGenerate(const GenerationRequest& request,
                         const std::string& prompt) override;
  std::string DoSubmitFineTune(const FineTuneJob& job) override;

 private:
  HttpTransport http_;
};

struct BatchOptions {
  std::size_t max_in_flight = 8;
};

// One score per (record, rule); rows follow `records` order.
ScoreTable BatchScore(Scorer& scorer, const KanjiCatalog& catalog,
                      const std::vector<MnemonicRecord>& records,
                      const RuleSet& rules, const BatchOptions& options = {});

}  // namespace mnemos

#endif  // MNEMOS_SCORER_H_
