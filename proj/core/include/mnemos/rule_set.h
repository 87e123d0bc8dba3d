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

#ifndef MNEMOS_RULE_SET_H_
#define MNEMOS_RULE_SET_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mnemos {

// A one-sentence mnemonic-authoring rule. `revision` is the EM iteration that
// last rewrote the text (0 for initialization).
struct Rule {
  int index = 0;
  std::string text;
  int revision = 0;

  bool operator==(const Rule&) const = default;
};

// True when `text` is non-empty and has no sentence terminator (. ! ?)
// followed by whitespace and more text.
bool IsSingleSentence(std::string_view text);

// Rules with indices 0..K-1, stored by index. Immutable once built; updates
// produce a new RuleSet.
class RuleSet {
 public:
  RuleSet() = default;
  // Validates index coverage and single-sentence texts; input order is free.
  explicit RuleSet(std::vector<Rule> rules);

  // Rules "0..n-1" built from plain texts, all at `revision`.
  static RuleSet FromTexts(const std::vector<std::string>& texts,
                           int revision = 0);

  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const Rule& operator[](std::size_t index) const { return rules_[index]; }
  const Rule& at(std::size_t index) const { return rules_.at(index); }
  const std::vector<Rule>& rules() const { return rules_; }
  auto begin() const { return rules_.begin(); }
  auto end() const { return rules_.end(); }

  bool operator==(const RuleSet&) const = default;

 private:
  std::vector<Rule> rules_;
};

}  // namespace mnemos

#endif  // MNEMOS_RULE_SET_H_
