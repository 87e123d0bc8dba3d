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

#include "mnemos/prompts.h"

#include <cctype>
#include <sstream>

#include "mnemos/errors.h"
#include "mnemos/text.h"

namespace mnemos {

std::string_view GenerationModeName(GenerationMode mode) {
  switch (mode) {
    case GenerationMode::kEmRules:
      return "em_rules";
    case GenerationMode::kNoRules:
      return "no_rules";
    case GenerationMode::kIclOne:
      return "icl_one";
  }
  return "unknown";
}

GenerationMode ParseGenerationMode(std::string_view name) {
  if (name == "em" || name == "em_rules") return GenerationMode::kEmRules;
  if (name == "zs" || name == "sft" || name == "no_rules") {
    return GenerationMode::kNoRules;
  }
  if (name == "icl" || name == "icl_one") return GenerationMode::kIclOne;
  throw ValidationError("unknown generation mode '" + std::string(name) + "'");
}

namespace {

std::string Keywords(const KanjiEntry& kanji) {
  return Join(kanji.component_keywords, ", ");
}

void InputData(std::ostringstream& out, const KanjiEntry& kanji) {
  out << "Input Data\n\n"
      << "Kanji Character:\n" << kanji.glyph << "\n\n"
      << "Meaning of the Character:\n" << kanji.keyword << "\n\n"
      << "Keywords Representing Its Components:\n" << Keywords(kanji)
      << "\n\n";
}

}  // namespace

std::string RenderGenerationPrompt(const GenerationRequest& request) {
  std::ostringstream out;
  const bool with_rules = request.mode == GenerationMode::kEmRules;
  out << "Task Description\n\n"
      << "Create a single memorable and effective story for the kanji "
         "character below. ";
  if (with_rules) {
    out << "You must strictly follow the provided rules when creating the "
           "story.\n\n";
  } else {
    out << "You may use your creativity freely to generate the story.\n\n";
  }
  if (request.mode == GenerationMode::kIclOne && request.icl_example) {
    const IclExample& ex = *request.icl_example;
    out << "Example Story Written by This User\n\n"
        << "Kanji Character:\n" << ex.kanji.glyph << "\n\n"
        << "Meaning of the Character:\n" << ex.kanji.keyword << "\n\n"
        << "Keywords Representing Its Components:\n" << Keywords(ex.kanji)
        << "\n\n"
        << "Story:\n" << ex.mnemonic << "\n\n";
  }
  InputData(out, request.context);
  if (with_rules) {
    out << "Rules for Generating the Story:\n\n";
    for (const Rule& rule : request.rules) out << "- " << rule.text << "\n";
    out << "\n";
  }
  out << "Output (Story):\n\n"
      << "Please write a story that incorporates the meaning of the kanji and "
         "its components";
  if (with_rules) out << ", and that strictly adheres to the rules provided above";
  out << ". Do not include any explanations or additional text.\n";
  return out.str();
}

std::string RenderRuleInitPrompt(const std::vector<RuleInitSample>& samples,
                                 int num_rules) {
  std::ostringstream out;
  out << "Task\n"
      << "Your task is to summarize how users write mnemonic stories for "
         "kanji. Read the stories below and identify "
      << num_rules
      << " common patterns or recurring techniques that users follow when "
         "connecting the component keywords to the meaning of the kanji.\n"
      << "New Input Examples\n";
  for (const auto& sample : samples) {
    out << "---\n"
        << "Kanji (Meaning): " << sample.kanji.glyph << " ("
        << sample.kanji.keyword << ")\n"
        << "Keywords: " << Keywords(sample.kanji) << "\n"
        << "Story: " << sample.mnemonic << "\n";
  }
  out << "---\n"
      << "Output Format\n"
      << "Use <thinking></thinking> to explain the patterns you observed. Then "
         "write exactly "
      << num_rules
      << " rules, each enclosed in its own <rule></rule> tag. Each rule must "
         "be one clear, single sentence, and the rules must not overlap.\n"
      << "Output\n";
  return out.str();
}

std::string RenderActivationPrompt(const KanjiEntry& kanji,
                                   const RuleSet& rules,
                                   std::string_view mnemonic) {
  std::ostringstream out;
  out << "Task\n"
      << "Decide which of the rules below the user followed when writing "
         "this mnemonic story. Select at most three rules, and only rules "
         "that clearly apply.\n"
      << "Rules\n";
  for (const Rule& rule : rules) {
    out << "- Rule " << rule.index + 1 << ": " << rule.text << "\n";
  }
  out << "Input\n"
      << "Kanji (Meaning): " << kanji.glyph << " (" << kanji.keyword << ")\n"
      << "Keywords: " << Keywords(kanji) << "\n"
      << "Story: " << mnemonic << "\n"
      << "Output Format\n"
      << "Answer with [RESULT] followed by the numbers of the applicable "
         "rules separated by commas, or [RESULT] none.\n"
      << "Output\n";
  return out.str();
}

std::string RenderOrthogonalRulePrompt(
    const std::vector<NumberedRule>& existing_rules,
    const std::vector<RuleInitSample>& examples) {
  std::ostringstream out;
  out << "Task\n"
      << "Your task is to generate a new rule based on mnemonic stories "
         "written by users.\n"
      << "Focus on identifying common patterns or recurring techniques across "
         "multiple stories,\n"
      << "but ensure that the rule you create is orthogonal (i.e., distinct "
         "and non-overlapping)\n"
      << "to the existing rules provided below.\n"
      << "Existing Rules\n"
      << "Below are other rules that have already been established:\n";
  for (const auto& rule : existing_rules) {
    out << "- Rule " << rule.number << ": " << rule.text << "\n";
  }
  out << "New Input Examples\n";
  for (const auto& example : examples) {
    out << "---\n"
        << "Kanji (Meaning): " << example.kanji.glyph << " ("
        << example.kanji.keyword << ")\n"
        << "Keywords: " << Keywords(example.kanji) << "\n"
        << "Story: " << example.mnemonic << "\n";
  }
  out << "---\n"
      << "Output Format\n"
      << "Use <thinking></thinking> to explain the common patterns or "
         "narrative elements you observed\n"
      << "across the stories. Then, propose a new rule enclosed in "
         "<rule></rule> that captures these shared elements.\n"
      << "The new rule must be one clear, single sentence and must not "
         "overlap with the existing rules listed above.\n"
      << "Output\n";
  return out.str();
}

std::string RenderWinRatePrompt(const WinRatePromptInput& input) {
  std::ostringstream out;
  out << "Task Description\n"
      << "An instruction (might include an Input inside it), two responses to "
         "evaluate (denoted as Response A and Response B), a reference "
         "answer, and an evaluation criteria are given.\n"
      << "1. Write a detailed feedback that assesses the quality of the two "
         "responses strictly based on the given evaluation criteria, not "
         "evaluating in general.\n"
      << "2. Make comparisons between Response A, Response B, and the "
         "Reference Answer. Instead of examining Response A and Response B "
         "separately, go straight to the point and mention the commonalities "
         "and differences between them.\n"
      << "3. After writing the feedback, indicate the better response, either "
         "\"A\" or \"B\".\n"
      << "4. The output format should look as follows: \"Feedback: (write a "
         "feedback for criteria) [RESULT] (Either \"A\" or \"B\")\"\n"
      << "5. Please do not generate any other opening, closing, and "
         "explanations.\n\n"
      << "Instruction\n"
      << "For the kanji " << input.history.kanji.glyph << " meaning "
      << input.history.kanji.keyword
      << ", which is described by the mnemonic keywords "
      << Keywords(input.history.kanji)
      << ", the user wrote: " << input.history.mnemonic << ".\n\n"
      << "Now, given the kanji " << input.target.glyph << " meaning "
      << input.target.keyword << ", which is described by the mnemonic keywords "
      << Keywords(input.target)
      << ", what is the most likely story the user would write to memorize "
         "this kanji?\n\n"
      << "Response A\n" << input.response_a << "\n\n"
      << "Response B\n" << input.response_b << "\n\n"
      << "Reference Answer\n" << input.reference << "\n\n"
      << "Score Rubric\n"
      << "Which response is more likely to have been written by the user, "
         "based on the given history of the user? Focus on the user's writing "
         "style and sentence structure.\n\n"
      << "Feedback\n";
  return out.str();
}

std::string RenderCompliancePrompt(const KanjiEntry& kanji,
                                   std::string_view story,
                                   const std::vector<std::string>& rules) {
  std::ostringstream out;
  out << "Task\n"
      << "Evaluate whether the mnemonic story below adheres to each of the "
         "listed rules. Identify every rule that is correctly applied.\n"
      << "Rules\n";
  for (std::size_t i = 0; i < rules.size(); ++i) {
    out << "- Rule " << i + 1 << ": " << rules[i] << "\n";
  }
  out << "Input\n"
      << "Kanji (Meaning): " << kanji.glyph << " (" << kanji.keyword << ")\n"
      << "Keywords: " << Keywords(kanji) << "\n"
      << "Story: " << story << "\n"
      << "Output Format\n"
      << "Feedback: (short justification) [RESULT] (comma-separated numbers "
         "of the satisfied rules, or none)\n";
  return out.str();
}

std::vector<std::string> ExtractTagged(std::string_view text,
                                       std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t begin = text.find(open, pos);
    if (begin == std::string_view::npos) break;
    const std::size_t content = begin + open.size();
    const std::size_t end = text.find(close, content);
    if (end == std::string_view::npos) break;
    out.emplace_back(Trim(text.substr(content, end - content)));
    pos = end + close.size();
  }
  return out;
}

std::optional<std::string> ResultTail(std::string_view text) {
  constexpr std::string_view kMarker = "[RESULT]";
  const std::size_t at = text.rfind(kMarker);
  if (at == std::string_view::npos) return std::nullopt;
  return std::string(Trim(text.substr(at + kMarker.size())));
}

std::optional<std::vector<int>> ParseNumberList(std::string_view text) {
  std::string lowered;
  for (char c : text) {
    lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  std::string_view body = Trim(lowered);
  while (!body.empty() && (body.back() == '.' || body.back() == ')')) {
    body.remove_suffix(1);
  }
  while (!body.empty() && body.front() == '(') body.remove_prefix(1);
  body = Trim(body);
  if (body == "none" || body.empty()) return std::vector<int>{};
  std::vector<int> numbers;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (body[i] == ' ' || body[i] == ',')) ++i;
    if (i >= body.size()) break;
    if (body.compare(i, 4, "rule") == 0) {
      i += 4;
      while (i < body.size() && body[i] == ' ') ++i;
    }
    if (i >= body.size() || !std::isdigit(static_cast<unsigned char>(body[i]))) {
      return std::nullopt;
    }
    int value = 0;
    while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
      value = value * 10 + (body[i] - '0');
      if (value > 1000000) return std::nullopt;
      ++i;
    }
    numbers.push_back(value);
    if (i < body.size() && body[i] != ',' && body[i] != ' ') return std::nullopt;
  }
  return numbers;
}

}  // namespace mnemos
