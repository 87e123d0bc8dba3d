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

#ifndef MNEMOS_EVAL_H_
#define MNEMOS_EVAL_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnemos/corpus.h"
#include "mnemos/http_transport.h"
#include "mnemos/prompts.h"

namespace mnemos {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Prf&) const = default;
};

// Clipped n-gram overlap over corpus tokens. Empty inputs score zero.
Prf RougeN(std::string_view candidate, std::string_view reference, int n);
Prf RougeL(std::string_view candidate, std::string_view reference);

std::size_t LcsLength(const std::vector<std::string>& a,
                      const std::vector<std::string>& b);

// Sum of candidate tokens over sum of reference tokens.
double LengthRatio(const std::vector<std::string>& candidates,
                   const std::vector<std::string>& references);

struct TextPair {
  std::string candidate;
  std::string reference;
};

struct RougeSummary {
  Prf rouge1;
  Prf rouge2;
  Prf rougeL;
};

// Component-wise mean over pairs.
RougeSummary AverageRouge(const std::vector<TextPair>& pairs);

struct SemanticScores {
  Prf bertscore;
  std::map<std::string, double> luar;  // variant label -> score
};

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual SemanticScores Similarity(const std::vector<TextPair>& pairs) = 0;
};

// Returns the scores it was built with.
class MockEmbeddingClient : public EmbeddingClient {
 public:
  MockEmbeddingClient();
  explicit MockEmbeddingClient(SemanticScores fixed) : fixed_(std::move(fixed)) {}
  SemanticScores Similarity(const std::vector<TextPair>& pairs) override;

 private:
  SemanticScores fixed_;
};

class HttpEmbeddingClient : public EmbeddingClient {
 public:
  explicit HttpEmbeddingClient(HttpOptions options) : http_(std::move(options)) {}
  SemanticScores Similarity(const std::vector<TextPair>& pairs) override;

 private:
  HttpTransport http_;
};

// Validates the pair list and forwards it.
SemanticScores ComputeSemanticScores(const std::vector<TextPair>& pairs,
                                     EmbeddingClient& client);

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual std::string Judge(const std::string& prompt) = 0;
};

// Scripted judge. The default answers "[RESULT] A" to comparison prompts and
// marks every listed rule as satisfied otherwise.
class MockJudge : public JudgeClient {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;
  MockJudge();
  explicit MockJudge(Responder responder) : responder_(std::move(responder)) {}
  std::string Judge(const std::string& prompt) override;

 private:
  Responder responder_;
};

class HttpJudge : public JudgeClient {
 public:
  explicit HttpJudge(HttpOptions options) : http_(std::move(options)) {}
  std::string Judge(const std::string& prompt) override;

 private:
  HttpTransport http_;
};

struct WinRateItem {
  IclExample history;
  KanjiEntry target;
  std::string system;    // the method being rated
  std::string baseline;  // the method it is compared against
  std::string reference;
};

struct JudgeOptions {
  bool swap_even_positions = true;
  double max_skipped_fraction = 0.1;
  std::size_t max_in_flight = 8;
};

struct WinRateResult {
  double win_rate = 0.0;  // system wins / judged
  std::size_t wins = 0;
  std::size_t judged = 0;
  std::size_t skipped = 0;
};

// "A" or "B" from the last [RESULT] marker; nullopt otherwise.
std::optional<char> ParseVerdict(std::string_view judge_output);

// Items at even positions present the system as Response B when swapping is
// on. Unparseable verdicts are skipped; too many skips raise a contract error.
WinRateResult WinRate(const std::vector<WinRateItem>& items, JudgeClient& judge,
                      const JudgeOptions& options = {});

struct ComplianceItem {
  KanjiEntry kanji;
  std::string story;
  std::vector<std::string> rules;  // activated rule texts
};

struct ComplianceResult {
  double rate = 0.0;
  std::size_t scored = 0;
  std::size_t excluded = 0;  // no activated rules
  std::size_t skipped = 0;   // unparseable judge output
};

ComplianceResult ComplianceRate(const std::vector<ComplianceItem>& items,
                                JudgeClient& judge,
                                const JudgeOptions& options = {});

struct EvalReport {
  std::string method;
  std::size_t num_pairs = 0;
  RougeSummary rouge;
  double length_ratio = 0.0;
  std::optional<Prf> bertscore;
  std::optional<std::map<std::string, double>> luar;
  std::optional<double> win_rate;
  std::optional<double> compliance;
};

EvalReport LexicalReport(std::string method, const std::vector<TextPair>& pairs);

nlohmann::json EvalReportToJson(const EvalReport& report);

// Aligned plain-text table, one row per report: BERTScore P/R/F1, ROUGE
// 1/2/L F1, length ratio, LUAR CRUD/MUD, win rate, compliance.
std::string FormatEvalTable(const std::vector<EvalReport>& reports);

}  // namespace mnemos

#endif  // MNEMOS_EVAL_H_
