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


#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.h"
#include "test_util.h"

namespace mnemos {
namespace {

using cli::Dispatch;
using nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Mnemos(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  // synth -> split -> train on a small population.
  void Pipeline() {
    ASSERT_EQ(Mnemos({"synth", "--I", "12", "--J", "10", "--K", "4", "--out", P("synth")}).code, 0);
    ASSERT_EQ(Mnemos({"split", "--corpus", P("synth/corpus.jsonl"), "--subsample", "1",
                      "--out", P("split")})
                  .code,
              0);
    const CliResult train = Mnemos({"train", "--split-dir", P("split"), "--k", "4", "--sample-learners",
                              "4", "--max-iters", "2", "--poll-ms", "0", "--out", P("ckpt.json")});
    ASSERT_EQ(train.code, 0) << train.err;
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, VersionAndHelp) {
  const CliResult version = Mnemos({"--version"});
  EXPECT_EQ(version.code, 0);
  EXPECT_FALSE(version.out.empty());
  EXPECT_EQ(Mnemos({"--help"}).code, 0);
}

TEST_F(CliTest, UsageErrorsExit64) {
  const CliResult missing = Mnemos({"ingest", "--out", P("x.jsonl")});
  EXPECT_EQ(missing.code, cli::kExitUsage);
  EXPECT_NE(missing.err.find("--corpus"), std::string::npos);
  EXPECT_NE(missing.err.find("Usage"), std::string::npos);
  EXPECT_EQ(Mnemos({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(Mnemos({}).code, cli::kExitUsage);
  EXPECT_EQ(Mnemos({"synth", "--bogus-flag"}).code, cli::kExitUsage);
  EXPECT_EQ(Mnemos({"synth"}).code, cli::kExitUsage);
}

TEST_F(CliTest, ValidationErrorsExit1) {
  testing::WriteAll(dir_ / "bad.jsonl", "{\"learner_id\": 3}\n");
  const CliResult run = Mnemos({"ingest", "--corpus", P("bad.jsonl"), "--out", P("o.jsonl")});
  EXPECT_EQ(run.code, cli::kExitValidation);
  EXPECT_NE(run.err.find("line 1"), std::string::npos) << run.err;
  EXPECT_EQ(Mnemos({"ingest", "--corpus", P("missing.jsonl"), "--out", P("o.jsonl")}).code,
            cli::kExitValidation);
}

TEST_F(CliTest, UnreachableScorerExits2) {
  ASSERT_EQ(Mnemos({"synth", "--I", "6", "--J", "10", "--K", "3", "--out", P("synth")}).code, 0);
  ASSERT_EQ(Mnemos({"split", "--corpus", P("synth/corpus.jsonl"), "--subsample", "1", "--out",
                    P("split")})
                .code,
            0);
  const CliResult run = Mnemos({"--retries", "0", "train", "--split-dir", P("split"), "--k", "3",
                          "--sample-learners", "2", "--scorer-url", "http://127.0.0.1:1",
                          "--out", P("ckpt.json")});
  EXPECT_EQ(run.code, cli::kExitService);
  EXPECT_NE(run.err.find("127.0.0.1:1"), std::string::npos) << run.err;
}

TEST_F(CliTest, EndToEndMockPipeline) {
  Pipeline();
  const json ckpt = json::parse(testing::ReadAll(dir_ / "ckpt.json"));
  EXPECT_EQ(ckpt["rules"].size(), 4u);
  const json manifest = json::parse(testing::ReadAll(dir_ / "ckpt.json.manifest.json"));
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_LE(manifest["counters"]["rulegen_calls"].get<long>(),
            manifest["counters"]["expected_rulegen"].get<long>());

  for (const char* mode : {"em", "zs", "icl"}) {
    const CliResult gen = Mnemos({"generate", "--checkpoint", P("ckpt.json"), "--corpus",
                            P("split/test.jsonl"), "--mode", mode, "--out",
                            P(std::string("gen_") + mode + ".jsonl")});
    EXPECT_EQ(gen.code, 0) << mode << gen.err;
  }
  const CliResult eval = Mnemos({"--judge", "mock", "--embed", "mock", "eval", "--generations",
                           P("gen_em.jsonl"), "--reference", P("split/test.jsonl"), "--baseline",
                           P("gen_zs.jsonl"), "--checkpoint", P("ckpt.json"), "--table",
                           P("table.txt"), "--out", P("eval.json")});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const json report = json::parse(testing::ReadAll(dir_ / "eval.json"));
  EXPECT_TRUE(report.contains("win_rate"));
  EXPECT_DOUBLE_EQ(report["compliance"].get<double>(), 1.0);
  EXPECT_NE(testing::ReadAll(dir_ / "table.txt").find("ROUGE-1"), std::string::npos);

  const CliResult cluster = Mnemos({"cluster", "--checkpoint", P("ckpt.json"), "--kmax", "3",
                              "--restarts", "2", "--out", P("clusters.json")});
  EXPECT_EQ(cluster.code, 0) << cluster.err;
  const json clusters = json::parse(testing::ReadAll(dir_ / "clusters.json"));
  EXPECT_GE(clusters["chosen_k"].get<int>(), 1);
}

TEST_F(CliTest, RerunsProduceIdenticalManifests) {
  Pipeline();
  const std::string first_ckpt = testing::ReadAll(dir_ / "ckpt.json");
  const std::string first_manifest = testing::ReadAll(dir_ / "ckpt.json.manifest.json");
  const std::string first_split = testing::ReadAll(dir_ / "split/run_manifest.json");
  Pipeline();
  EXPECT_EQ(testing::ReadAll(dir_ / "ckpt.json"), first_ckpt);
  EXPECT_EQ(testing::ReadAll(dir_ / "ckpt.json.manifest.json"), first_manifest);
  EXPECT_EQ(testing::ReadAll(dir_ / "split/run_manifest.json"), first_split);
}

TEST_F(CliTest, FlagsBeatConfigBeatEnvironment) {
  ASSERT_EQ(Mnemos({"synth", "--I", "4", "--J", "3", "--K", "2", "--out", P("synth")}).code, 0);
  const std::vector<std::string> init = {"init", "--corpus", P("synth/corpus.jsonl"), "--k", "2",
                                         "--sample-learners", "2", "--out", P("init.json")};
  ::setenv("MNEMOS_RULEGEN", "nonexistent", 1);
  EXPECT_EQ(Mnemos(init).code, cli::kExitValidation);

  testing::WriteAll(dir_ / "good.toml", "rulegen = \"mock\"\n");
  std::vector<std::string> with_config = {"--config", P("good.toml")};
  with_config.insert(with_config.end(), init.begin(), init.end());
  EXPECT_EQ(Mnemos(with_config).code, 0);

  testing::WriteAll(dir_ / "bad.toml", "rulegen = \"nonexistent\"\n");
  ::unsetenv("MNEMOS_RULEGEN");
  std::vector<std::string> bad_config = {"--config", P("bad.toml")};
  bad_config.insert(bad_config.end(), init.begin(), init.end());
  EXPECT_EQ(Mnemos(bad_config).code, cli::kExitValidation);
  std::vector<std::string> flag_wins = {"--config", P("bad.toml"), "--rulegen", "mock"};
  flag_wins.insert(flag_wins.end(), init.begin(), init.end());
  EXPECT_EQ(Mnemos(flag_wins).code, 0);
}

}  // namespace
}  // namespace mnemos
