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

#include "mnemos/checkpoint.h"

#include <fstream>
#include <sstream>

#include "mnemos/errors.h"
#include "mnemos/rules.h"

namespace mnemos {

using nlohmann::json;

namespace {

json RowMajor(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd FromRowMajor(const json& values, std::size_t rows, int cols,
                             const char* name) {
  if (!values.is_array() || values.size() != rows * static_cast<std::size_t>(cols)) {
    throw ValidationError(std::string("checkpoint: ") + name +
                          " has the wrong number of entries");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = values[i++].get<double>();
  }
  return m;
}

}  // namespace

json TraitsToJson(const TraitState& traits) {
  return json{{"learner_ids", traits.learner_ids()},
              {"kanji_ids", traits.kanji_ids()},
              {"K", traits.num_rules()},
              {"H", RowMajor(traits.learner_affinity())},
              {"G", RowMajor(traits.kanji_compatibility())}};
}

TraitState TraitsFromJson(const json& doc) {
  auto learners = doc.at("learner_ids").get<std::vector<std::string>>();
  auto kanji = doc.at("kanji_ids").get<std::vector<std::string>>();
  const int k = doc.at("K").get<int>();
  Eigen::MatrixXd h = FromRowMajor(doc.at("H"), learners.size(), k, "H");
  Eigen::MatrixXd g = FromRowMajor(doc.at("G"), kanji.size(), k, "G");
  return TraitState(std::move(learners), std::move(kanji), std::move(h),
                    std::move(g));
}

json ActivationsToJson(const ActivationTensor& z) {
  json rows = json::array();
  for (std::size_t i = 0; i < z.size(); ++i) {
    rows.push_back(json{{"learner_id", z.pairs()[i].learner_id},
                        {"kanji_id", z.pairs()[i].kanji_id},
                        {"active", z.ActiveIndices(i)}});
  }
  return json{{"K", z.num_rules()}, {"rows", std::move(rows)}};
}

ActivationTensor ActivationsFromJson(const json& doc) {
  ActivationTensor z(doc.at("K").get<int>());
  for (const auto& row : doc.at("rows")) {
    z.SetActive({row.at("learner_id").get<std::string>(),
                 row.at("kanji_id").get<std::string>()},
                row.at("active").get<std::vector<int>>());
  }
  return z;
}

json ScoresToJson(const ScoreTable& scores) {
  json pairs = json::array();
  json values = json::array();
  for (std::size_t i = 0; i < scores.num_pairs(); ++i) {
    pairs.push_back({scores.pairs()[i].learner_id, scores.pairs()[i].kanji_id});
    for (double v : scores.Row(i)) values.push_back(v);
  }
  return json{{"K", scores.num_rules()},
              {"pairs", std::move(pairs)},
              {"values", std::move(values)}};
}

ScoreTable ScoresFromJson(const json& doc) {
  const int k = doc.at("K").get<int>();
  std::vector<PairKey> pairs;
  for (const auto& p : doc.at("pairs")) {
    pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
  }
  const json& values = doc.at("values");
  if (!values.is_array() || values.size() != pairs.size() * static_cast<std::size_t>(k)) {
    throw ValidationError("checkpoint: score table has the wrong number of values");
  }
  ScoreTable table(k, std::move(pairs));
  std::size_t at = 0;
  for (std::size_t i = 0; i < table.num_pairs(); ++i) {
    for (int r = 0; r < k; ++r) table.Set(i, r, values[at++].get<double>());
  }
  return table;
}

json CheckpointToJson(const EmState& state, const EmConfig& config) {
  return json{
      {"version", kCheckpointVersion},
      {"iteration", state.iteration},
      {"config", EmConfigToJson(config)},
      {"rules", RulesToJson(state.rules)},
      {"traits", TraitsToJson(state.traits)},
      {"activations", ActivationsToJson(state.activations)},
      {"scores", ScoresToJson(state.scores)},
      {"val_loss_history", state.val_loss_history},
      {"budget",
       {{"rulegen_calls", state.budget.rulegen_calls},
        {"expected_rulegen", state.budget.expected_rulegen},
        {"score_calls", state.budget.score_calls},
        {"finetune_jobs", state.budget.finetune_jobs}}},
  };
}

EmState CheckpointFromJson(const json& doc, EmConfig* config) {
  try {
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint version " +
                            std::to_string(version));
    }
    EmState state;
    state.iteration = doc.at("iteration").get<int>();
    state.rules = RulesFromJson(doc.at("rules"));
    state.traits = TraitsFromJson(doc.at("traits"));
    state.activations = ActivationsFromJson(doc.at("activations"));
    state.scores = ScoresFromJson(doc.at("scores"));
    state.val_loss_history = doc.at("val_loss_history").get<std::vector<double>>();
    const json& budget = doc.at("budget");
    state.budget.rulegen_calls = budget.at("rulegen_calls").get<std::int64_t>();
    state.budget.expected_rulegen = budget.at("expected_rulegen").get<std::int64_t>();
    state.budget.score_calls = budget.at("score_calls").get<std::int64_t>();
    state.budget.finetune_jobs = budget.at("finetune_jobs").get<std::int64_t>();
    if (config != nullptr) *config = EmConfigFromJson(doc.at("config"));
    const int k = static_cast<int>(state.rules.size());
    if (state.traits.num_rules() != k || state.activations.num_rules() != k) {
      throw ValidationError("checkpoint: rule count mismatch");
    }
    return state;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const EmState& state,
                    const EmConfig& config) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << CheckpointToJson(state, config).dump(1) << "\n";
  if (!out) throw ValidationError("failed writing " + path.string());
}

EmState LoadCheckpoint(const std::filesystem::path& path, EmConfig* config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) {
    throw ValidationError("checkpoint " + path.string() + " is not valid JSON");
  }
  return CheckpointFromJson(doc, config);
}

}  // namespace mnemos
