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

#ifndef MNEMOS_CORPUS_H_
#define MNEMOS_CORPUS_H_

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace mnemos {

inline constexpr std::size_t kMaxMnemonicTokens = 180;

// Background metadata for one kanji: its English keyword and the keywords of
// its components. `kanji_id` is the glyph itself in corpus files.
struct KanjiEntry {
  std::string kanji_id;
  std::string glyph;
  std::string keyword;
  std::vector<std::string> component_keywords;

  bool operator==(const KanjiEntry&) const = default;
};

struct MnemonicRecord {
  std::string learner_id;
  std::string kanji_id;
  std::string text;
  std::size_t token_count = 0;

  bool operator==(const MnemonicRecord&) const = default;
};

// One observed (learner, kanji) cell.
struct PairKey {
  std::string learner_id;
  std::string kanji_id;

  auto operator<=>(const PairKey&) const = default;
  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& key) const;
};

inline PairKey KeyOf(const MnemonicRecord& record) {
  return {record.learner_id, record.kanji_id};
}

// Kanji metadata indexed by id, in first-seen order.
class KanjiCatalog {
 public:
  KanjiCatalog() = default;
  explicit KanjiCatalog(std::vector<KanjiEntry> entries);

  // Adds `entry` or checks it against an existing entry with the same id;
  // throws a validation error on conflicting metadata.
  void Add(const KanjiEntry& entry);

  const KanjiEntry* Find(std::string_view kanji_id) const;
  const KanjiEntry& At(std::string_view kanji_id) const;

  const std::vector<KanjiEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<KanjiEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Corpus {
  KanjiCatalog kanji;
  std::vector<MnemonicRecord> records;  // corpus (file) order
};

// Parses one corpus line. Throws a validation error naming the missing or
// malformed field.
std::pair<KanjiEntry, MnemonicRecord> ParseCorpusLine(const nlohmann::json& obj);

nlohmann::json ToCorpusLine(const KanjiEntry& kanji,
                            const MnemonicRecord& record);

// Reads a UTF-8 JSONL corpus. Errors carry the 1-based line number. Blank
// lines are skipped. Duplicate (learner, kanji) pairs and mnemonics longer
// than kMaxMnemonicTokens are rejected.
Corpus LoadCorpus(const std::filesystem::path& path);
Corpus ParseCorpus(std::string_view jsonl);

void WriteCorpus(const std::filesystem::path& path, const KanjiCatalog& kanji,
                 const std::vector<MnemonicRecord>& records);

// Learners in first-seen order with their record counts.
std::vector<std::pair<std::string, std::size_t>> CountByLearner(
    const std::vector<MnemonicRecord>& records);

// Learner ids sorted by record count descending, ties by id ascending.
std::vector<std::string> LearnersByCountDescending(
    const std::vector<MnemonicRecord>& records);

// Keeps only records whose learner authored at least `min_count` mnemonics.
std::vector<MnemonicRecord> FilterLearners(
    const std::vector<MnemonicRecord>& records, std::size_t min_count = 5);

struct SplitConfig {
  int train_parts = 8;
  int val_parts = 1;
  int test_parts = 1;
  double subsample_fraction = 0.25;
};

struct CorpusSplit {
  // Learner ids of each split in sorted (count-descending) order.
  std::vector<std::string> train_learners;
  std::vector<std::string> val_learners;
  std::vector<std::string> test_learners;
  // Records of each split in corpus order.
  std::vector<MnemonicRecord> train;
  std::vector<MnemonicRecord> val;
  std::vector<MnemonicRecord> test;
};

// Sorts learners by count descending (ties by id), deals them round-robin
// into train/val/test by the configured ratio, then keeps every
// round(1 / subsample_fraction)-th learner of each split, starting at 0.
CorpusSplit SplitLearners(const std::vector<MnemonicRecord>& records,
                          const SplitConfig& config = {});

nlohmann::json SplitManifest(const CorpusSplit& split,
                             const SplitConfig& config);

// Stable hex digest of a JSON document's canonical dump.
std::string JsonDigest(const nlohmann::json& doc);

// Writes train.jsonl, val.jsonl, test.jsonl and manifest.json into `dir`.
void WriteSplit(const std::filesystem::path& dir, const CorpusSplit& split,
                const SplitConfig& config, const KanjiCatalog& kanji);

}  // namespace mnemos

#endif  // MNEMOS_CORPUS_H_
