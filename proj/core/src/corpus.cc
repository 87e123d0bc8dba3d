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

#include "mnemos/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mnemos/errors.h"
#include "mnemos/text.h"

namespace mnemos {

using nlohmann::json;

std::size_t PairKeyHash::operator()(const PairKey& key) const {
  std::uint64_t h = Fnv1a64(key.learner_id);
  h = Fnv1a64("\x1f", h);
  return static_cast<std::size_t>(Fnv1a64(key.kanji_id, h));
}

KanjiCatalog::KanjiCatalog(std::vector<KanjiEntry> entries) {
  for (const auto& entry : entries) Add(entry);
}

void KanjiCatalog::Add(const KanjiEntry& entry) {
  auto it = index_.find(entry.kanji_id);
  if (it == index_.end()) {
    index_.emplace(entry.kanji_id, entries_.size());
    entries_.push_back(entry);
    return;
  }
  if (!(entries_[it->second] == entry)) {
    throw ValidationError("conflicting metadata for kanji '" + entry.kanji_id +
                          "'");
  }
}

const KanjiEntry* KanjiCatalog::Find(std::string_view kanji_id) const {
  auto it = index_.find(std::string(kanji_id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const KanjiEntry& KanjiCatalog::At(std::string_view kanji_id) const {
  const KanjiEntry* entry = Find(kanji_id);
  if (entry == nullptr) {
    throw ValidationError("unknown kanji '" + std::string(kanji_id) + "'");
  }
  return *entry;
}

namespace {

const json& RequireField(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw ValidationError(std::string("missing field '") + name + "'");
  }
  return *it;
}

std::string RequireString(const json& obj, const char* name) {
  const json& value = RequireField(obj, name);
  if (!value.is_string()) {
    throw ValidationError(std::string("field '") + name +
                          "' must be a string");
  }
  std::string s = value.get<std::string>();
  if (Trim(s).empty()) {
    throw ValidationError(std::string("field '") + name + "' is empty");
  }
  return s;
}

}  // namespace

std::pair<KanjiEntry, MnemonicRecord> ParseCorpusLine(const json& obj) {
  if (!obj.is_object()) throw ValidationError("line is not a JSON object");
  KanjiEntry kanji;
  kanji.glyph = RequireString(obj, "kanji");
  kanji.kanji_id = kanji.glyph;
  kanji.keyword = RequireString(obj, "keyword");
  const json& components = RequireField(obj, "component_keywords");
  if (!components.is_array() || components.empty()) {
    throw ValidationError(
        "field 'component_keywords' must be a non-empty array");
  }
  for (const json& c : components) {
    if (!c.is_string() || Trim(c.get<std::string>()).empty()) {
      throw ValidationError(
          "field 'component_keywords' must hold non-empty strings");
    }
    kanji.component_keywords.push_back(c.get<std::string>());
  }

  MnemonicRecord record;
  record.learner_id = RequireString(obj, "learner_id");
  record.kanji_id = kanji.kanji_id;
  record.text = RequireString(obj, "mnemonic");
  record.token_count = TokenCount(record.text);
  if (record.token_count == 0) {
    throw ValidationError("mnemonic has no tokens");
  }
  if (record.token_count > kMaxMnemonicTokens) {
    throw ValidationError("mnemonic has " + std::to_string(record.token_count) +
                          " tokens, limit is " +
                          std::to_string(kMaxMnemonicTokens));
  }
  return {std::move(kanji), std::move(record)};
}

json ToCorpusLine(const KanjiEntry& kanji, const MnemonicRecord& record) {
  return json{{"learner_id", record.learner_id},
              {"kanji", kanji.glyph},
              {"keyword", kanji.keyword},
              {"component_keywords", kanji.component_keywords},
              {"mnemonic", record.text}};
}

Corpus ParseCorpus(std::string_view jsonl) {
  Corpus corpus;
  std::set<PairKey> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = Trim(jsonl.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      json obj = json::parse(line);
      auto [kanji, record] = ParseCorpusLine(obj);
      if (!seen.insert(KeyOf(record)).second) {
        throw ValidationError("duplicate pair (learner '" + record.learner_id +
                              "', kanji '" + record.kanji_id + "')");
      }
      corpus.kanji.Add(kanji);
      corpus.records.push_back(std::move(record));
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": parse error: " + e.what());
    } catch (const Error& e) {
      throw e.WithContext(where);
    }
  }
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseCorpus(buf.str());
  } catch (const Error& e) {
    throw e.WithContext(path.string());
  }
}

void WriteCorpus(const std::filesystem::path& path, const KanjiCatalog& kanji,
                 const std::vector<MnemonicRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& record : records) {
    out << ToCorpusLine(kanji.At(record.kanji_id), record).dump() << '\n';
  }
}

std::vector<std::pair<std::string, std::size_t>> CountByLearner(
    const std::vector<MnemonicRecord>& records) {
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& record : records) {
    auto [it, inserted] = index.emplace(record.learner_id, counts.size());
    if (inserted) counts.emplace_back(record.learner_id, 0);
    ++counts[it->second].second;
  }
  return counts;
}

std::vector<std::string> LearnersByCountDescending(
    const std::vector<MnemonicRecord>& records) {
  auto counts = CountByLearner(records);
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> ids;
  ids.reserve(counts.size());
  for (auto& [id, count] : counts) ids.push_back(std::move(id));
  return ids;
}

std::vector<MnemonicRecord> FilterLearners(
    const std::vector<MnemonicRecord>& records, std::size_t min_count) {
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& record : records) ++counts[record.learner_id];
  std::vector<MnemonicRecord> kept;
  for (const auto& record : records) {
    if (counts[record.learner_id] >= min_count) kept.push_back(record);
  }
  return kept;
}

namespace {

std::vector<std::string> EveryNth(const std::vector<std::string>& ids,
                                  std::size_t stride) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < ids.size(); i += stride) kept.push_back(ids[i]);
  return kept;
}

std::vector<MnemonicRecord> RecordsOf(
    const std::vector<MnemonicRecord>& records,
    const std::vector<std::string>& learners) {
  std::set<std::string> wanted(learners.begin(), learners.end());
  std::vector<MnemonicRecord> out;
  for (const auto& record : records) {
    if (wanted.count(record.learner_id)) out.push_back(record);
  }
  return out;
}

}  // namespace

CorpusSplit SplitLearners(const std::vector<MnemonicRecord>& records,
                          const SplitConfig& config) {
  if (config.train_parts < 1 || config.val_parts < 1 || config.test_parts < 1) {
    throw ValidationError("split ratio parts must be positive integers");
  }
  if (!(config.subsample_fraction > 0.0 && config.subsample_fraction <= 1.0)) {
    throw ValidationError("subsample_fraction must be in (0, 1]");
  }
  const std::size_t cycle = static_cast<std::size_t>(
      config.train_parts + config.val_parts + config.test_parts);
  const std::vector<std::string> sorted = LearnersByCountDescending(records);
  if (sorted.size() < cycle) {
    throw ValidationError("need at least " + std::to_string(cycle) +
                          " learners to populate every split, have " +
                          std::to_string(sorted.size()));
  }

  std::vector<std::string> train, val, test;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const std::size_t slot = i % cycle;
    if (slot < static_cast<std::size_t>(config.train_parts)) {
      train.push_back(sorted[i]);
    } else if (slot <
               static_cast<std::size_t>(config.train_parts + config.val_parts)) {
      val.push_back(sorted[i]);
    } else {
      test.push_back(sorted[i]);
    }
  }

  const auto stride = static_cast<std::size_t>(
      std::max(1.0, std::round(1.0 / config.subsample_fraction)));
  CorpusSplit split;
  split.train_learners = EveryNth(train, stride);
  split.val_learners = EveryNth(val, stride);
  split.test_learners = EveryNth(test, stride);
  split.train = RecordsOf(records, split.train_learners);
  split.val = RecordsOf(records, split.val_learners);
  split.test = RecordsOf(records, split.test_learners);
  return split;
}

json SplitManifest(const CorpusSplit& split, const SplitConfig& config) {
  auto part = [](const std::vector<std::string>& learners,
                 const std::vector<MnemonicRecord>& records) {
    const double avg =
        learners.empty() ? 0.0
                         : static_cast<double>(records.size()) /
                               static_cast<double>(learners.size());
    return json{{"learners", learners},
                {"num_learners", learners.size()},
                {"num_mnemonics", records.size()},
                {"avg_mnemonics_per_learner", avg}};
  };
  return json{
      {"ratio",
       {config.train_parts, config.val_parts, config.test_parts}},
      {"subsample_fraction", config.subsample_fraction},
      {"train", part(split.train_learners, split.train)},
      {"val", part(split.val_learners, split.val)},
      {"test", part(split.test_learners, split.test)},
  };
}

std::string JsonDigest(const json& doc) { return HexDigest(Fnv1a64(doc.dump())); }

void WriteSplit(const std::filesystem::path& dir, const CorpusSplit& split,
                const SplitConfig& config, const KanjiCatalog& kanji) {
  std::filesystem::create_directories(dir);
  WriteCorpus(dir / "train.jsonl", kanji, split.train);
  WriteCorpus(dir / "val.jsonl", kanji, split.val);
  WriteCorpus(dir / "test.jsonl", kanji, split.test);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ValidationError("cannot write manifest in " + dir.string());
  out << SplitManifest(split, config).dump(2) << '\n';
}

}  // namespace mnemos
