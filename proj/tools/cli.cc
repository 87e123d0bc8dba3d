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

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mnemos/checkpoint.h"
#include "mnemos/clustering.h"
#include "mnemos/corpus.h"
#include "mnemos/em.h"
#include "mnemos/errors.h"
#include "mnemos/eval.h"
#include "mnemos/http_transport.h"
#include "mnemos/inference.h"
#include "mnemos/rules.h"
#include "mnemos/scorer.h"
#include "mnemos/synth.h"
#include "mnemos/text.h"

#ifndef MNEMOS_VERSION
#define MNEMOS_VERSION "0.0.0"
#endif

namespace mnemos::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::string scorer = "mock";
  std::string scorer_url;
  std::string rulegen = "mock";
  std::string rulegen_url;
  std::string judge;
  std::string judge_url;
  std::string embed;
  std::string embed_url;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t max_in_flight = 8;
  int retries = 3;
};

// ---- files -----------------------------------------------------------------

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::string HashFile(const fs::path& path) { return HexDigest(Fnv1a64(ReadFile(path))); }

std::vector<json> ReadJsonLines(const fs::path& path) {
  std::vector<json> rows;
  std::istringstream in(ReadFile(path));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (Trim(line).empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      throw ValidationError(path.string() + " line " + std::to_string(number) +
                            ": invalid JSON");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- run manifest ----------------------------------------------------------

// Records what a run read and wrote. No timestamps, so identical runs
// produce identical manifests.
class RunManifest {
 public:
  RunManifest(std::string command, const std::vector<std::string>& args)
      : doc_{{"tool", "mnemos"},
             {"version", MNEMOS_VERSION},
             {"command", std::move(command)},
             {"args", args},
             {"inputs", json::object()},
             {"outputs", json::object()}} {}

  void Input(const fs::path& path) { doc_["inputs"][path.string()] = HashFile(path); }
  void Output(const fs::path& path) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().filename() != kDirManifest) {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) doc_["outputs"][f.string()] = HashFile(f);
    } else {
      doc_["outputs"][path.string()] = HashFile(path);
    }
  }
  json& operator[](const char* key) { return doc_[key]; }

  // `<out>.manifest.json` next to a file, `run_manifest.json` inside a
  // directory.
  void WriteFor(const fs::path& out) const {
    const fs::path target = fs::is_directory(out)
                                ? out / kDirManifest
                                : fs::path(out.string() + ".manifest.json");
    WriteFile(target, doc_.dump(2) + "\n");
  }

  static constexpr const char* kDirManifest = "run_manifest.json";

 private:
  json doc_;
};

// ---- backends --------------------------------------------------------------

HttpOptions HttpFor(const GlobalOptions& g, const std::string& url) {
  HttpOptions options;
  options.base_url = url;
  options.max_retries = g.retries;
  options.bearer_token = AdapterTokenFromEnvironment();
  return options;
}

std::unique_ptr<Scorer> MakeScorer(const GlobalOptions& g) {
  if (!g.scorer_url.empty()) return std::make_unique<HttpScorer>(HttpFor(g, g.scorer_url));
  if (g.scorer == "mock") return std::make_unique<MockScorer>();
  throw ValidationError("use --scorer mock or give --scorer-url");
}

std::unique_ptr<RuleGenClient> MakeRuleGen(const GlobalOptions& g) {
  if (!g.rulegen_url.empty()) return std::make_unique<HttpRuleGen>(HttpFor(g, g.rulegen_url));
  if (g.rulegen == "mock") return std::make_unique<MockRuleGen>();
  throw ValidationError("use --rulegen mock or give --rulegen-url");
}

std::unique_ptr<JudgeClient> MakeJudge(const GlobalOptions& g) {
  if (!g.judge_url.empty()) return std::make_unique<HttpJudge>(HttpFor(g, g.judge_url));
  if (g.judge == "mock") return std::make_unique<MockJudge>();
  if (g.judge.empty()) return nullptr;
  throw ValidationError("--judge accepts only 'mock'; use --judge-url otherwise");
}

std::unique_ptr<EmbeddingClient> MakeEmbedding(const GlobalOptions& g) {
  if (!g.embed_url.empty()) return std::make_unique<HttpEmbeddingClient>(HttpFor(g, g.embed_url));
  if (g.embed == "mock") return std::make_unique<MockEmbeddingClient>();
  if (g.embed.empty()) return nullptr;
  throw ValidationError("--embed accepts only 'mock'; use --embed-url otherwise");
}

json BackendsJson(const GlobalOptions& g) {
  auto describe = [](const std::string& url, const std::string& kind) {
    return url.empty() ? (kind.empty() ? json(nullptr) : json(kind)) : json(url);
  };
  return json{{"scorer", describe(g.scorer_url, g.scorer)},
              {"rulegen", describe(g.rulegen_url, g.rulegen)},
              {"judge", describe(g.judge_url, g.judge)},
              {"embed", describe(g.embed_url, g.embed)}};
}

fs::path RequireOut(const GlobalOptions& g) {
  if (g.out.empty()) throw CLI::RequiredError("--out");
  return g.out;
}

void MergeCatalog(KanjiCatalog& into, const KanjiCatalog& from) {
  for (const auto& entry : from.entries()) into.Add(entry);
}

SplitConfig ParseRatio(const std::string& ratio, double subsample) {
  SplitConfig config;
  int parts[3];
  char tail = 0;
  if (std::sscanf(ratio.c_str(), "%d:%d:%d%c", &parts[0], &parts[1], &parts[2], &tail) != 3) {
    throw ValidationError("--ratio must look like 8:1:1");
  }
  config.train_parts = parts[0];
  config.val_parts = parts[1];
  config.test_parts = parts[2];
  config.subsample_fraction = subsample;
  return config;
}

// ---- subcommands -----------------------------------------------------------

struct IngestArgs {
  std::string corpus;
  std::size_t min_count = 5;
};

int RunIngest(const IngestArgs& a, const GlobalOptions& g, RunManifest& manifest,
              std::ostream& out) {
  const fs::path target = RequireOut(g);
  Corpus corpus = LoadCorpus(a.corpus);
  manifest.Input(a.corpus);
  const auto kept = FilterLearners(corpus.records, a.min_count);
  WriteCorpus(target, corpus.kanji, kept);
  manifest.Output(target);
  const auto learners = CountByLearner(kept);
  manifest["counters"] = {{"records_in", corpus.records.size()},
                          {"records_out", kept.size()},
                          {"learners_out", learners.size()}};
  out << "ingested " << kept.size() << " of " << corpus.records.size()
      << " mnemonics from " << learners.size() << " learners\n";
  manifest.WriteFor(target);
  return kExitOk;
}

struct SplitArgs {
  std::string corpus;
  std::string ratio = "8:1:1";
  double subsample = 0.25;
  std::size_t min_count = 0;
};

int RunSplit(const SplitArgs& a, const GlobalOptions& g, RunManifest& manifest,
             std::ostream& out) {
  const fs::path target = RequireOut(g);
  Corpus corpus = LoadCorpus(a.corpus);
  manifest.Input(a.corpus);
  auto records = a.min_count > 0 ? FilterLearners(corpus.records, a.min_count)
                                 : corpus.records;
  const SplitConfig config = ParseRatio(a.ratio, a.subsample);
  const CorpusSplit split = SplitLearners(records, config);
  WriteSplit(target, split, config, corpus.kanji);
  manifest.Output(target);
  out << "split: train " << split.train_learners.size() << " learners / "
      << split.train.size() << " mnemonics, val " << split.val_learners.size()
      << " / " << split.val.size() << ", test " << split.test_learners.size() << " / "
      << split.test.size() << "\n";
  manifest.WriteFor(target);
  return kExitOk;
}

struct InitArgs {
  std::string corpus;
  int k = 10;
  int sample_learners = 20;
};

int RunInit(const InitArgs& a, const GlobalOptions& g, RunManifest& manifest,
            std::ostream& out) {
  const fs::path target = RequireOut(g);
  Corpus corpus = LoadCorpus(a.corpus);
  manifest.Input(a.corpus);
  auto rulegen = MakeRuleGen(g);
  const RuleSet rules =
      InitializeRules(corpus.records, corpus.kanji, a.k, a.sample_learners, *rulegen);
  const ActivationTensor z =
      InitialActivations(corpus.records, corpus.kanji, rules, *rulegen, g.max_in_flight);
  WriteFile(target, json{{"rules", RulesToJson(rules)},
                         {"activations", ActivationsToJson(z)}}
                        .dump(1) +
                        "\n");
  manifest.Output(target);
  manifest["backends"] = BackendsJson(g);
  manifest["counters"] = {{"rulegen_calls", rulegen->calls()}};
  out << "initialized " << rules.size() << " rules, activations for " << z.size()
      << " mnemonics (" << rulegen->calls() << " rule-generator calls)\n";
  manifest.WriteFor(target);
  return kExitOk;
}

struct TrainArgs {
  std::string corpus;
  std::string val;
  std::string split_dir;
  int k = 10;
  int max_iters = 3;
  int patience = 1;
  std::size_t exemplars = 8;
  int sample_learners = 20;
  std::string trace_dir;
  std::string hyperparams;
  int poll_ms = 2000;
};

int RunTrain(const TrainArgs& a, const GlobalOptions& g, RunManifest& manifest,
             std::ostream& out) {
  const fs::path target = RequireOut(g);
  fs::path train_path = a.corpus;
  fs::path val_path = a.val;
  if (!a.split_dir.empty()) {
    if (train_path.empty()) train_path = fs::path(a.split_dir) / "train.jsonl";
    if (val_path.empty()) val_path = fs::path(a.split_dir) / "val.jsonl";
  }
  if (train_path.empty()) throw CLI::RequiredError("--corpus or --split-dir");
  if (val_path.empty()) throw CLI::RequiredError("--val or --split-dir");

  Corpus train = LoadCorpus(train_path);
  Corpus val = LoadCorpus(val_path);
  manifest.Input(train_path);
  manifest.Input(val_path);
  KanjiCatalog catalog = train.kanji;
  MergeCatalog(catalog, val.kanji);

  EmConfig config;
  config.num_rules = a.k;
  config.max_iters = a.max_iters;
  config.patience = a.patience;
  config.exemplars = a.exemplars;
  config.sample_learners = a.sample_learners;
  config.max_in_flight = g.max_in_flight;
  config.await.poll_interval = std::chrono::milliseconds(a.poll_ms);
  if (!a.hyperparams.empty()) {
    config.hyperparams = json::parse(a.hyperparams, nullptr, false);
    if (config.hyperparams.is_discarded() || !config.hyperparams.is_object()) {
      throw ValidationError("--hyperparams must be a JSON object");
    }
  }

  auto scorer = MakeScorer(g);
  auto rulegen = MakeRuleGen(g);
  IterationCallback trace;
  std::vector<fs::path> traced;
  if (!a.trace_dir.empty()) {
    trace = [&](const EmState& state) {
      char name[32];
      std::snprintf(name, sizeof(name), "iter_%04d.json", state.iteration);
      const fs::path path = fs::path(a.trace_dir) / name;
      SaveCheckpoint(path, state, config);
      traced.push_back(path);
    };
  }
  const EmState best = RunEm(train.records, val.records, catalog, config, *scorer,
                             *rulegen, trace);
  SaveCheckpoint(target, best, config);
  manifest.Output(target);
  for (const auto& path : traced) manifest.Output(path);
  manifest["backends"] = BackendsJson(g);
  manifest["config"] = EmConfigToJson(config);
  manifest["counters"] = {{"rulegen_calls", best.budget.rulegen_calls},
                          {"expected_rulegen", best.budget.expected_rulegen},
                          {"score_calls", best.budget.score_calls},
                          {"finetune_jobs", best.budget.finetune_jobs}};
  manifest["val_loss_history"] = best.val_loss_history;
  out << "trained " << best.rules.size() << " rules; best iteration " << best.iteration
      << " of " << best.val_loss_history.size() - 1 << "; val loss";
  for (double loss : best.val_loss_history) out << " " << loss;
  out << "\nrule-generator calls " << best.budget.rulegen_calls << " (budget "
      << best.budget.expected_rulegen << ")\n";
  manifest.WriteFor(target);
  return kExitOk;
}

struct GenerateArgs {
  std::string checkpoint;
  std::string corpus;
  std::string mode = "em";
  std::string policy = "cold_start";
  std::size_t max_new_tokens = kMaxMnemonicTokens;
};

int RunGenerate(const GenerateArgs& a, const GlobalOptions& g, RunManifest& manifest,
                std::ostream& out, std::ostream& err) {
  const fs::path target = RequireOut(g);
  InferenceOptions options;
  options.mode = ParseGenerationMode(a.mode);
  options.policy = ParsePolicy(a.policy);
  options.seed = g.seed;
  options.max_new_tokens = a.max_new_tokens;
  options.max_in_flight = g.max_in_flight;

  EmConfig config;
  const EmState state = LoadCheckpoint(a.checkpoint, &config);
  options.threshold = config.threshold;
  Corpus corpus = LoadCorpus(a.corpus);
  manifest.Input(a.checkpoint);
  manifest.Input(a.corpus);

  auto scorer = MakeScorer(g);
  const BatchGenerationResult result =
      BatchGenerate(corpus.records, corpus.kanji, state, options, *scorer);
  std::string lines;
  for (const auto& generation : result.outputs) {
    lines += GenerationToJson(generation).dump() + "\n";
  }
  WriteFile(target, lines);
  manifest.Output(target);
  json errors = json::array();
  for (const auto& e : result.errors) {
    err << "generation failed for (" << e.learner_id << ", " << e.kanji_id
        << "): " << e.message << "\n";
    errors.push_back({{"learner_id", e.learner_id}, {"kanji", e.kanji_id},
                      {"message", e.message}});
  }
  manifest["backends"] = BackendsJson(g);
  manifest["errors"] = std::move(errors);
  manifest["counters"] = {{"generated", result.outputs.size()},
                          {"failed", result.errors.size()}};
  out << "generated " << result.outputs.size() << " mnemonics ("
      << result.errors.size() << " failed)\n";
  manifest.WriteFor(target);
  if (result.outputs.empty() && !result.errors.empty()) return kExitService;
  return kExitOk;
}

struct EvalArgs {
  std::string generations;
  std::string reference;
  std::string baseline;
  std::string checkpoint;
  std::string method = "EM";
  std::string table;
};

std::vector<Generation> LoadGenerations(const fs::path& path) {
  std::vector<Generation> out;
  for (const auto& row : ReadJsonLines(path)) out.push_back(GenerationFromJson(row));
  return out;
}

int RunEval(const EvalArgs& a, const GlobalOptions& g, RunManifest& manifest,
            std::ostream& out) {
  const fs::path target = RequireOut(g);
  const auto generations = LoadGenerations(a.generations);
  Corpus reference = LoadCorpus(a.reference);
  manifest.Input(a.generations);
  manifest.Input(a.reference);

  std::map<PairKey, const MnemonicRecord*> by_pair;
  for (const auto& r : reference.records) by_pair[KeyOf(r)] = &r;

  std::vector<TextPair> pairs;
  std::vector<const Generation*> matched;
  for (const auto& gen : generations) {
    auto it = by_pair.find({gen.learner_id, gen.kanji_id});
    if (it == by_pair.end()) {
      throw ValidationError("generation for (" + gen.learner_id + ", " + gen.kanji_id +
                            ") has no reference mnemonic");
    }
    pairs.push_back({gen.text, it->second->text});
    matched.push_back(&gen);
  }
  EvalReport report = LexicalReport(a.method, pairs);

  if (auto embed = MakeEmbedding(g)) {
    SemanticScores semantic = ComputeSemanticScores(pairs, *embed);
    report.bertscore = semantic.bertscore;
    report.luar = semantic.luar;
  }

  JudgeOptions judge_options;
  judge_options.max_in_flight = g.max_in_flight;
  json judge_counts = json::object();
  if (auto judge = MakeJudge(g)) {
    if (!a.baseline.empty()) {
      manifest.Input(a.baseline);
      std::map<PairKey, std::string> baseline;
      for (const auto& gen : LoadGenerations(a.baseline)) {
        baseline[{gen.learner_id, gen.kanji_id}] = gen.text;
      }
      std::vector<WinRateItem> items;
      std::size_t no_history = 0;
      for (const Generation* gen : matched) {
        const PairKey key{gen->learner_id, gen->kanji_id};
        auto b = baseline.find(key);
        if (b == baseline.end()) continue;
        auto history = IclExampleFor(reference.records, reference.kanji, gen->learner_id,
                                     gen->kanji_id);
        if (!history) {
          ++no_history;
          continue;
        }
        items.push_back({*history, reference.kanji.At(gen->kanji_id), gen->text,
                         b->second, by_pair.at(key)->text});
      }
      const WinRateResult wr = WinRate(items, *judge, judge_options);
      report.win_rate = wr.win_rate;
      judge_counts["win_rate"] = {{"judged", wr.judged},
                                  {"skipped", wr.skipped},
                                  {"no_history", no_history}};
    }
    if (!a.checkpoint.empty()) {
      manifest.Input(a.checkpoint);
      const EmState state = LoadCheckpoint(a.checkpoint);
      std::vector<ComplianceItem> items;
      for (const Generation* gen : matched) {
        ComplianceItem item{reference.kanji.At(gen->kanji_id), gen->text, {}};
        for (int k : gen->active_rules) item.rules.push_back(state.rules.at(k).text);
        items.push_back(std::move(item));
      }
      const ComplianceResult cr = ComplianceRate(items, *judge, judge_options);
      report.compliance = cr.rate;
      judge_counts["compliance"] = {{"scored", cr.scored},
                                    {"excluded", cr.excluded},
                                    {"skipped", cr.skipped}};
    }
  }

  WriteFile(target, EvalReportToJson(report).dump(2) + "\n");
  manifest.Output(target);
  const std::string table = FormatEvalTable({report});
  if (!a.table.empty()) {
    WriteFile(a.table, table);
    manifest.Output(a.table);
  }
  manifest["backends"] = BackendsJson(g);
  manifest["counters"] = {{"pairs", pairs.size()}, {"judge", judge_counts}};
  out << table;
  manifest.WriteFor(target);
  return kExitOk;
}

struct ClusterArgs {
  std::string checkpoint;
  std::string target = "learners";
  int kmax = 8;
  int restarts = 10;
  std::string pca_csv;
};

int RunCluster(const ClusterArgs& a, const GlobalOptions& g, RunManifest& manifest,
               std::ostream& out) {
  const fs::path target = RequireOut(g);
  const EmState state = LoadCheckpoint(a.checkpoint);
  manifest.Input(a.checkpoint);
  const bool learners = a.target == "learners";
  if (!learners && a.target != "kanji") {
    throw ValidationError("--target must be 'learners' or 'kanji'");
  }
  const Eigen::MatrixXd& rows = learners ? state.traits.learner_affinity()
                                         : state.traits.kanji_compatibility();
  const auto& ids = learners ? state.traits.learner_ids() : state.traits.kanji_ids();
  if (rows.rows() == 0) throw ValidationError("checkpoint has no trait rows");
  const int kmax = std::min<int>(a.kmax, static_cast<int>(rows.rows()));

  GmmOptions options;
  options.restarts = a.restarts;
  const GmmSelection selection = FitGmmBic(rows, kmax, g.seed, options);

  json clusters = json::array();
  for (int c = 0; c < selection.chosen_k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < selection.assignments.size(); ++i) {
      if (selection.assignments[i] == c) members.push_back(i);
    }
    json entry{{"cluster", c},
               {"size", members.size()},
               {"weight", selection.fit.weights[c]}};
    std::vector<double> centroid(selection.fit.means.cols());
    for (Eigen::Index k = 0; k < selection.fit.means.cols(); ++k) {
      centroid[k] = selection.fit.means(c, k);
    }
    entry["centroid"] = centroid;
    if (!members.empty()) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(rows.cols());
      for (std::size_t i : members) mean += rows.row(static_cast<Eigen::Index>(i)).transpose();
      mean /= static_cast<double>(members.size());
      entry["mean_rule_affinity"] = std::vector<double>(mean.data(), mean.data() + mean.size());
      entry["representative"] =
          ids[Representative(rows, selection.assignments, selection.fit.means, c)];
    } else {
      entry["mean_rule_affinity"] = nullptr;
      entry["representative"] = nullptr;
    }
    clusters.push_back(std::move(entry));
  }
  json assignments = json::object();
  for (std::size_t i = 0; i < ids.size(); ++i) assignments[ids[i]] = selection.assignments[i];
  json doc{{"target", a.target},
           {"num_rows", rows.rows()},
           {"chosen_k", selection.chosen_k},
           {"bic_by_k", selection.bic_by_k},
           {"clusters", std::move(clusters)},
           {"assignments", std::move(assignments)}};
  WriteFile(target, doc.dump(2) + "\n");
  manifest.Output(target);

  if (!a.pca_csv.empty()) {
    const Eigen::MatrixXd projected = PcaProject(rows, 2);
    std::ostringstream csv;
    csv << "id,pc1,pc2,cluster\n";
    for (Eigen::Index i = 0; i < projected.rows(); ++i) {
      csv << ids[i] << "," << projected(i, 0) << ","
          << (projected.cols() > 1 ? projected(i, 1) : 0.0) << ","
          << selection.assignments[i] << "\n";
    }
    WriteFile(a.pca_csv, csv.str());
    manifest.Output(a.pca_csv);
  }
  out << "clustered " << rows.rows() << " " << a.target << " into "
      << selection.chosen_k << " components\n";
  manifest.WriteFor(target);
  return kExitOk;
}

struct SynthArgs {
  int num_kanji = 50;
  int num_learners = 40;
  int num_rules = 10;
  double observation_rate = 1.0;
};

int RunSynth(const SynthArgs& a, const GlobalOptions& g, RunManifest& manifest,
             std::ostream& out) {
  const fs::path target = RequireOut(g);
  SynthConfig config;
  config.num_kanji = a.num_kanji;
  config.num_learners = a.num_learners;
  config.num_rules = a.num_rules;
  config.seed = g.seed;
  config.observation_rate = a.observation_rate;
  const SyntheticPopulation population = GeneratePopulation(config);
  WriteSynthetic(target, population);
  manifest.Output(target);
  out << "wrote " << population.records.size() << " synthetic mnemonics to "
      << target.string() << "\n";
  manifest.WriteFor(target);
  return kExitOk;
}

int ExitCodeFor(const Error& e) {
  return e.kind() == ErrorKind::kValidation ? kExitValidation : kExitService;
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"mnemos: learn mnemonic-writing rules and learner traits", "mnemos"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file");
  app.set_version_flag("--version", MNEMOS_VERSION);

  GlobalOptions g;
  auto global = [&](CLI::App* sub) {
    sub->fallthrough();
  };
  app.add_option("--scorer", g.scorer, "Scorer backend when no URL is set (mock)")
      ->envname("MNEMOS_SCORER");
  app.add_option("--scorer-url", g.scorer_url, "Adapter base URL for scoring")
      ->envname("MNEMOS_SCORER_URL");
  app.add_option("--rulegen", g.rulegen, "Rule generator when no URL is set (mock)")
      ->envname("MNEMOS_RULEGEN");
  app.add_option("--rulegen-url", g.rulegen_url, "Rule generator base URL")
      ->envname("MNEMOS_RULEGEN_URL");
  app.add_option("--judge", g.judge, "Judge backend when no URL is set (mock)")
      ->envname("MNEMOS_JUDGE");
  app.add_option("--judge-url", g.judge_url, "Judge base URL")->envname("MNEMOS_JUDGE_URL");
  app.add_option("--embed", g.embed, "Similarity backend when no URL is set (mock)")
      ->envname("MNEMOS_EMBED");
  app.add_option("--embed-url", g.embed_url, "Similarity service base URL")
      ->envname("MNEMOS_EMBED_URL");
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--max-in-flight", g.max_in_flight, "Concurrent backend requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--retries", g.retries, "HTTP retries after the first attempt")
      ->check(CLI::NonNegativeNumber);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus and drop sparse learners");
  ingest_cmd->add_option("--corpus", ingest.corpus, "Corpus JSONL")->required();
  ingest_cmd->add_option("--min-count", ingest.min_count, "Minimum mnemonics per learner");
  global(ingest_cmd);

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Learner-disjoint train/val/test split");
  split_cmd->add_option("--corpus", split.corpus, "Corpus JSONL")->required();
  split_cmd->add_option("--ratio", split.ratio, "train:val:test parts");
  split_cmd->add_option("--subsample", split.subsample, "Fraction of learners kept per split")
      ->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--min-count", split.min_count, "Drop learners below this count first");
  global(split_cmd);

  InitArgs init;
  auto* init_cmd = app.add_subcommand("init", "Initial rules and rule activations");
  init_cmd->add_option("--corpus", init.corpus, "Training corpus JSONL")->required();
  init_cmd->add_option("--k", init.k, "Number of rules")->check(CLI::PositiveNumber);
  init_cmd->add_option("--sample-learners", init.sample_learners,
                       "Learners sampled for rule initialization");
  global(init_cmd);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Run the EM loop");
  train_cmd->add_option("--corpus", train.corpus, "Training corpus JSONL");
  train_cmd->add_option("--val", train.val, "Validation corpus JSONL");
  train_cmd->add_option("--split-dir", train.split_dir, "Directory written by `split`");
  train_cmd->add_option("--k", train.k, "Number of rules")->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-iters", train.max_iters, "EM iterations")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--patience", train.patience, "Early-stopping patience")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--exemplars", train.exemplars, "Exemplars per rule update");
  train_cmd->add_option("--sample-learners", train.sample_learners,
                        "Learners sampled for rule initialization");
  train_cmd->add_option("--trace-dir", train.trace_dir, "Write a checkpoint per iteration");
  train_cmd->add_option("--hyperparams", train.hyperparams,
                        "Fine-tune hyperparameters as a JSON object");
  train_cmd->add_option("--poll-ms", train.poll_ms, "Fine-tune status poll interval");
  global(train_cmd);

  GenerateArgs generate;
  auto* generate_cmd = app.add_subcommand("generate", "Cold-start mnemonic generation");
  generate_cmd->add_option("--checkpoint", generate.checkpoint, "Checkpoint from `train`")
      ->required();
  generate_cmd->add_option("--corpus,--kanji-file", generate.corpus,
                           "JSONL of (learner, kanji) rows to generate for")
      ->required();
  generate_cmd->add_option("--mode", generate.mode, "em | zs | icl");
  generate_cmd->add_option("--policy", generate.policy,
                           "cold_start | random3 | hbar_only | g_only");
  generate_cmd->add_option("--max-new-tokens", generate.max_new_tokens, "Token cap");
  global(generate_cmd);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score generations against references");
  eval_cmd->add_option("--generations", eval.generations, "Output of `generate`")->required();
  eval_cmd->add_option("--reference", eval.reference, "Reference corpus JSONL")->required();
  eval_cmd->add_option("--baseline", eval.baseline, "Baseline generations for win rate");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint for rule compliance");
  eval_cmd->add_option("--method", eval.method, "Row label in the table");
  eval_cmd->add_option("--table", eval.table, "Also write the text table here");
  global(eval_cmd);

  ClusterArgs cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "GMM clustering of fitted traits");
  cluster_cmd->add_option("--checkpoint", cluster.checkpoint, "Checkpoint from `train`")
      ->required();
  cluster_cmd->add_option("--target", cluster.target, "learners | kanji");
  cluster_cmd->add_option("--kmax", cluster.kmax, "Largest component count")
      ->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--restarts", cluster.restarts, "EM restarts per k")
      ->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--pca-csv", cluster.pca_csv, "Write a 2-D PCA projection");
  global(cluster_cmd);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic population with planted traits");
  synth_cmd->add_option("--I", synth.num_kanji, "Kanji")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--J", synth.num_learners, "Learners")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--K", synth.num_rules, "Rules")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--observation-rate", synth.observation_rate,
                        "Share of (learner, kanji) cells observed");
  global(synth_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    if (e.get_name() == "CallForVersion") {
      out << MNEMOS_VERSION << "\n";
    } else {
      out << app.help();
    }
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  RunManifest manifest(chosen->get_name(), args);
  manifest["seed"] = g.seed;
  try {
    if (chosen == ingest_cmd) return RunIngest(ingest, g, manifest, out);
    if (chosen == split_cmd) return RunSplit(split, g, manifest, out);
    if (chosen == init_cmd) return RunInit(init, g, manifest, out);
    if (chosen == train_cmd) return RunTrain(train, g, manifest, out);
    if (chosen == generate_cmd) return RunGenerate(generate, g, manifest, out, err);
    if (chosen == eval_cmd) return RunEval(eval, g, manifest, out);
    if (chosen == cluster_cmd) return RunCluster(cluster, g, manifest, out);
    if (chosen == synth_cmd) return RunSynth(synth, g, manifest, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << ErrorKindName(e.kind()) << "): " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

int Dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return Dispatch(args, out, err);
}

}  // namespace mnemos::cli
