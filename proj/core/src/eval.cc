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

#include "mnemos/eval.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mnemos/errors.h"
#include "mnemos/parallel.h"
#include "mnemos/text.h"

namespace mnemos {

using nlohmann::json;

namespace {

Prf FromCounts(double overlap, double candidate_total, double reference_total) {
  Prf out;
  if (candidate_total <= 0.0 || reference_total <= 0.0) return out;
  out.precision = overlap / candidate_total;
  out.recall = overlap / reference_total;
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

std::unordered_map<std::string, std::size_t> NGramCounts(
    const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (int j = 1; j < n; ++j) {
      gram += '\x1f';
      gram += tokens[i + j];
    }
    ++counts[gram];
  }
  return counts;
}

}  // namespace

Prf RougeN(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw ValidationError("ROUGE-N needs n >= 1");
  const auto cand = Tokenize(candidate);
  const auto ref = Tokenize(reference);
  if (cand.size() < static_cast<std::size_t>(n) ||
      ref.size() < static_cast<std::size_t>(n)) {
    return {};
  }
  const auto cand_counts = NGramCounts(cand, n);
  const auto ref_counts = NGramCounts(ref, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  return FromCounts(static_cast<double>(overlap),
                    static_cast<double>(cand.size() - n + 1),
                    static_cast<double>(ref.size() - n + 1));
}

std::size_t LcsLength(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Prf RougeL(std::string_view candidate, std::string_view reference) {
  const auto cand = Tokenize(candidate);
  const auto ref = Tokenize(reference);
  if (cand.empty() || ref.empty()) return {};
  return FromCounts(static_cast<double>(LcsLength(cand, ref)),
                    static_cast<double>(cand.size()),
                    static_cast<double>(ref.size()));
}

double LengthRatio(const std::vector<std::string>& candidates,
                   const std::vector<std::string>& references) {
  if (candidates.size() != references.size()) {
    throw ValidationError("length ratio: list sizes differ");
  }
  if (references.empty()) throw ValidationError("length ratio: no references");
  std::size_t cand_tokens = 0;
  std::size_t ref_tokens = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_tokens += TokenCount(candidates[i]);
    ref_tokens += TokenCount(references[i]);
  }
  if (ref_tokens == 0) throw ValidationError("length ratio: references have no tokens");
  return static_cast<double>(cand_tokens) / static_cast<double>(ref_tokens);
}

RougeSummary AverageRouge(const std::vector<TextPair>& pairs) {
  RougeSummary sum;
  if (pairs.empty()) return sum;
  auto add = [](Prf& acc, const Prf& x) {
    acc.precision += x.precision;
    acc.recall += x.recall;
    acc.f1 += x.f1;
  };
  for (const auto& pair : pairs) {
    add(sum.rouge1, RougeN(pair.candidate, pair.reference, 1));
    add(sum.rouge2, RougeN(pair.candidate, pair.reference, 2));
    add(sum.rougeL, RougeL(pair.candidate, pair.reference));
  }
  const double n = static_cast<double>(pairs.size());
  for (Prf* p : {&sum.rouge1, &sum.rouge2, &sum.rougeL}) {
    p->precision /= n;
    p->recall /= n;
    p->f1 /= n;
  }
  return sum;
}

MockEmbeddingClient::MockEmbeddingClient() {
  fixed_.bertscore = {0.5, 0.5, 0.5};
  fixed_.luar = {{"CRUD", 0.5}, {"MUD", 0.5}};
}

SemanticScores MockEmbeddingClient::Similarity(const std::vector<TextPair>&) {
  return fixed_;
}

namespace {

double RequireNumber(const json& obj, const char* field, const char* endpoint) {
  const json& value = RequireField(obj, field, endpoint);
  if (!value.is_number()) {
    throw ContractError(std::string(endpoint) + ": field '" + field +
                        "' is not a number");
  }
  return value.get<double>();
}

}  // namespace

SemanticScores HttpEmbeddingClient::Similarity(const std::vector<TextPair>& pairs) {
  constexpr const char* kEndpoint = "/v1/similarity";
  json body = json::array();
  for (const auto& pair : pairs) {
    body.push_back(json{{"candidate", pair.candidate}, {"reference", pair.reference}});
  }
  const json response = http_.Post(kEndpoint, json{{"pairs", std::move(body)}});
  SemanticScores scores;
  const json& bert = RequireField(response, "bertscore", kEndpoint);
  if (!bert.is_object()) throw ContractError("/v1/similarity: bertscore is not an object");
  scores.bertscore = {RequireNumber(bert, "P", kEndpoint),
                      RequireNumber(bert, "R", kEndpoint),
                      RequireNumber(bert, "F1", kEndpoint)};
  const json& luar = RequireField(response, "luar", kEndpoint);
  if (!luar.is_object()) throw ContractError("/v1/similarity: luar is not an object");
  for (const auto& [variant, value] : luar.items()) {
    if (!value.is_number()) {
      throw ContractError("/v1/similarity: luar." + variant + " is not a number");
    }
    scores.luar[variant] = value.get<double>();
  }
  return scores;
}

SemanticScores ComputeSemanticScores(const std::vector<TextPair>& pairs,
                                     EmbeddingClient& client) {
  if (pairs.empty()) throw ValidationError("semantic scores: no pairs");
  return client.Similarity(pairs);
}

MockJudge::MockJudge()
    : responder_([](const std::string& prompt) -> std::string {
        if (prompt.find("Response A") != std::string::npos) {
          return "Feedback: mock verdict. [RESULT] A";
        }
        std::vector<std::string> numbers;
        std::size_t pos = 0;
        while ((pos = prompt.find("- Rule ", pos)) != std::string::npos) {
          pos += 7;
          std::size_t end = pos;
          while (end < prompt.size() && prompt[end] >= '0' && prompt[end] <= '9') ++end;
          if (end > pos) numbers.push_back(prompt.substr(pos, end - pos));
        }
        return "Feedback: mock verdict. [RESULT] " +
               (numbers.empty() ? std::string("none") : Join(numbers, ", "));
      }) {}

std::string MockJudge::Judge(const std::string& prompt) { return responder_(prompt); }

std::string HttpJudge::Judge(const std::string& prompt) {
  const json response = http_.Post("/v1/judge", json{{"prompt", prompt}});
  return RequireString(response, "text", "/v1/judge");
}

std::optional<char> ParseVerdict(std::string_view judge_output) {
  auto tail = ResultTail(judge_output);
  if (!tail) return std::nullopt;
  std::string_view v = Trim(*tail);
  while (!v.empty() && (v.back() == '.' || v.back() == '"' || v.back() == '\'' ||
                        v.back() == ')')) {
    v.remove_suffix(1);
  }
  while (!v.empty() && (v.front() == '"' || v.front() == '\'' || v.front() == '(')) {
    v.remove_prefix(1);
  }
  if (v == "A" || v == "a") return 'A';
  if (v == "B" || v == "b") return 'B';
  return std::nullopt;
}

namespace {

std::vector<std::string> JudgeAll(const std::vector<std::string>& prompts,
                                  JudgeClient& judge, std::size_t max_in_flight) {
  std::vector<std::string> replies(prompts.size());
  ParallelFor(prompts.size(), max_in_flight,
              [&](std::size_t i) { replies[i] = judge.Judge(prompts[i]); });
  return replies;
}

void CheckSkipped(std::size_t skipped, std::size_t total, double limit,
                  const char* what) {
  if (total > 0 && static_cast<double>(skipped) > limit * static_cast<double>(total)) {
    throw ContractError(std::string(what) + ": " + std::to_string(skipped) + " of " +
                        std::to_string(total) + " judge replies were unparseable");
  }
}

}  // namespace

WinRateResult WinRate(const std::vector<WinRateItem>& items, JudgeClient& judge,
                      const JudgeOptions& options) {
  if (items.empty()) throw ValidationError("win rate: no items");
  std::vector<std::string> prompts;
  std::vector<bool> swapped;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    const bool swap = options.swap_even_positions && i % 2 == 0;
    WinRatePromptInput input{item.history, item.target,
                             swap ? item.baseline : item.system,
                             swap ? item.system : item.baseline, item.reference};
    prompts.push_back(RenderWinRatePrompt(input));
    swapped.push_back(swap);
  }
  const auto replies = JudgeAll(prompts, judge, options.max_in_flight);
  WinRateResult result;
  for (std::size_t i = 0; i < replies.size(); ++i) {
    const auto verdict = ParseVerdict(replies[i]);
    if (!verdict) {
      ++result.skipped;
      continue;
    }
    ++result.judged;
    const char system_label = swapped[i] ? 'B' : 'A';
    if (*verdict == system_label) ++result.wins;
  }
  CheckSkipped(result.skipped, items.size(), options.max_skipped_fraction, "win rate");
  if (result.judged == 0) throw ContractError("win rate: no parseable verdicts");
  result.win_rate = static_cast<double>(result.wins) / static_cast<double>(result.judged);
  return result;
}

ComplianceResult ComplianceRate(const std::vector<ComplianceItem>& items,
                                JudgeClient& judge, const JudgeOptions& options) {
  ComplianceResult result;
  std::vector<const ComplianceItem*> scored_items;
  std::vector<std::string> prompts;
  for (const auto& item : items) {
    if (item.rules.empty()) {
      ++result.excluded;
      continue;
    }
    scored_items.push_back(&item);
    prompts.push_back(RenderCompliancePrompt(item.kanji, item.story, item.rules));
  }
  if (scored_items.empty()) {
    throw ValidationError("compliance: no generation has activated rules");
  }
  const auto replies = JudgeAll(prompts, judge, options.max_in_flight);
  double total = 0.0;
  for (std::size_t i = 0; i < replies.size(); ++i) {
    const std::size_t num_rules = scored_items[i]->rules.size();
    const auto tail = ResultTail(replies[i]);
    const auto numbers = tail ? ParseNumberList(*tail) : std::nullopt;
    bool valid = numbers.has_value();
    std::set<int> satisfied;
    if (valid) {
      for (int n : *numbers) {
        if (n < 1 || static_cast<std::size_t>(n) > num_rules) {
          valid = false;
          break;
        }
        satisfied.insert(n);
      }
    }
    if (!valid) {
      ++result.skipped;
      continue;
    }
    total += static_cast<double>(satisfied.size()) / static_cast<double>(num_rules);
    ++result.scored;
  }
  CheckSkipped(result.skipped, scored_items.size(), options.max_skipped_fraction,
               "compliance");
  if (result.scored == 0) throw ContractError("compliance: no parseable judgements");
  result.rate = total / static_cast<double>(result.scored);
  return result;
}

EvalReport LexicalReport(std::string method, const std::vector<TextPair>& pairs) {
  if (pairs.empty()) throw ValidationError("evaluation: no pairs");
  EvalReport report;
  report.method = std::move(method);
  report.num_pairs = pairs.size();
  report.rouge = AverageRouge(pairs);
  std::vector<std::string> candidates;
  std::vector<std::string> references;
  for (const auto& pair : pairs) {
    candidates.push_back(pair.candidate);
    references.push_back(pair.reference);
  }
  report.length_ratio = LengthRatio(candidates, references);
  return report;
}

namespace {

json PrfJson(const Prf& prf) {
  return json{{"P", prf.precision}, {"R", prf.recall}, {"F1", prf.f1}};
}

std::string Fixed(double value, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace

json EvalReportToJson(const EvalReport& report) {
  json out{{"method", report.method},
           {"num_pairs", report.num_pairs},
           {"rouge1", PrfJson(report.rouge.rouge1)},
           {"rouge2", PrfJson(report.rouge.rouge2)},
           {"rougeL", PrfJson(report.rouge.rougeL)},
           {"length_ratio", report.length_ratio}};
  out["bertscore"] = report.bertscore ? PrfJson(*report.bertscore) : json(nullptr);
  out["luar"] = report.luar ? json(*report.luar) : json(nullptr);
  out["win_rate"] = report.win_rate ? json(*report.win_rate) : json(nullptr);
  out["compliance"] = report.compliance ? json(*report.compliance) : json(nullptr);
  return out;
}

std::string FormatEvalTable(const std::vector<EvalReport>& reports) {
  const std::vector<std::string> header = {
      "Model", "BERT-P", "BERT-R", "BERT-F1", "ROUGE-1", "ROUGE-2", "ROUGE-L",
      "Length", "LUAR-CRUD", "LUAR-MUD", "Win Rate", "Compliance"};
  std::vector<std::vector<std::string>> rows{header};
  auto opt = [](const std::optional<double>& v) { return v ? Fixed(*v) : std::string("-"); };
  for (const auto& r : reports) {
    std::optional<double> crud, mud;
    if (r.luar) {
      if (auto it = r.luar->find("CRUD"); it != r.luar->end()) crud = it->second;
      if (auto it = r.luar->find("MUD"); it != r.luar->end()) mud = it->second;
    }
    rows.push_back({r.method,
                    r.bertscore ? Fixed(r.bertscore->precision) : "-",
                    r.bertscore ? Fixed(r.bertscore->recall) : "-",
                    r.bertscore ? Fixed(r.bertscore->f1) : "-",
                    Fixed(r.rouge.rouge1.f1), Fixed(r.rouge.rouge2.f1),
                    Fixed(r.rouge.rougeL.f1), "x" + Fixed(r.length_ratio), opt(crud),
                    opt(mud), opt(r.win_rate), opt(r.compliance)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mnemos
