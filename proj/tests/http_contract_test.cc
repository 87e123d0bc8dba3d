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


#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "mnemos/errors.h"
#include "mnemos/eval.h"
#include "mnemos/rules.h"
#include "mnemos/scorer.h"
#include "test_util.h"

// After Eigen: resolv.h defines a _res macro.
#include <httplib.h>

namespace mnemos {
namespace {

using nlohmann::json;
using testing::Rest;

// An in-process adapter stub on a loopback port.
class AdapterStub : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  HttpOptions Options(int retries = 0) const {
    HttpOptions options;
    options.base_url = "http://127.0.0.1:" + std::to_string(port_);
    options.max_retries = retries;
    options.initial_backoff = std::chrono::milliseconds(1);
    options.bearer_token = "secret";
    return options;
  }

  // Handler that records the request and answers with `reply`.
  httplib::Server::Handler Reply(json reply, int status = 200) {
    return [this, reply, status](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard<std::mutex> lock(mu_);
        last_body_ = req.body.empty() ? json() : json::parse(req.body);
        last_auth_ = req.get_header_value("Authorization");
        ++hits_;
      }
      res.status = status;
      res.set_content(reply.dump(), "application/json");
    };
  }

  json LastBody() {
    std::lock_guard<std::mutex> lock(mu_);
    return last_body_;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  json last_body_;
  std::string last_auth_;
  std::atomic<int> hits_{0};
};

TEST_F(AdapterStub, ScoreAveragesTokenLogprobs) {
  server_.Post("/v1/score", Reply({{"token_logprobs", {-1.0, -2.0, -0.5, -0.5}}}));
  HttpScorer scorer(Options());
  EXPECT_DOUBLE_EQ(scorer.Score(Rest(), {2, "Be vivid.", 0}, "a person rests"), -1.0);
  const json body = LastBody();
  EXPECT_EQ(body["rule_text"], "Be vivid.");
  EXPECT_EQ(body["mnemonic"], "a person rests");
  EXPECT_EQ(body["context"]["keyword"], "rest");
  EXPECT_EQ(body["context"]["component_keywords"], json({"person", "tree"}));
  EXPECT_EQ(last_auth_, "Bearer secret");
}

TEST_F(AdapterStub, MissingLogprobsIsContractError) {
  server_.Post("/v1/score", Reply({{"logprobs", {-1.0}}}));
  HttpScorer scorer(Options());
  try {
    scorer.Score(Rest(), {0, "r", 0}, "story");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
  server_.Post("/v1/score", Reply({{"token_logprobs", json::array()}}));
  EXPECT_THROW(scorer.Score(Rest(), {0, "r", 0}, "story"), Error);
}

TEST_F(AdapterStub, ClientErrorIsNotRetried) {
  server_.Post("/v1/score", Reply({{"error", "bad body"}}, 400));
  HttpScorer scorer(Options(3));
  try {
    scorer.Score(Rest(), {0, "r", 0}, "story");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
    EXPECT_NE(std::string(e.what()).find("400"), std::string::npos);
  }
  EXPECT_EQ(hits_.load(), 1);
}

TEST_F(AdapterStub, ServerErrorsRetryThenFailAsTransport) {
  server_.Post("/v1/score", Reply({{"error", "not ready"}}, 503));
  HttpScorer scorer(Options(3));
  try {
    scorer.Score(Rest(), {0, "r", 0}, "story");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTransport);
  }
  EXPECT_EQ(hits_.load(), 4);
}

TEST_F(AdapterStub, RecoversAfterTransientFailure) {
  std::atomic<int> calls{0};
  server_.Post("/v1/score", [&](const httplib::Request&, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 500;
      return;
    }
    res.set_content(R"({"token_logprobs":[-0.25]})", "application/json");
  });
  HttpScorer scorer(Options(2));
  EXPECT_DOUBLE_EQ(scorer.Score(Rest(), {0, "r", 0}, "story"), -0.25);
  EXPECT_EQ(calls.load(), 2);
}

TEST_F(AdapterStub, NonJsonBodyIsContractError) {
  server_.Post("/v1/generate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html>oops</html>", "text/html");
  });
  HttpScorer scorer(Options());
  try {
    scorer.Generate({Rest(), {{0, "r", 0}}, GenerationMode::kEmRules});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST_F(AdapterStub, GenerateSendsPromptAndCap) {
  server_.Post("/v1/generate", Reply({{"text", "one two three four"}}));
  HttpScorer scorer(Options());
  GenerationRequest request{Rest(), {{0, "Be vivid.", 0}}, GenerationMode::kEmRules};
  request.max_new_tokens = 3;
  EXPECT_EQ(scorer.Generate(request), "one two three");
  const json body = LastBody();
  EXPECT_EQ(body["max_new_tokens"], 3);
  EXPECT_EQ(body["prompt"], RenderGenerationPrompt(request));
}

TEST_F(AdapterStub, EmptyGenerationIsContractError) {
  server_.Post("/v1/generate", Reply({{"text", "  "}}));
  HttpScorer scorer(Options());
  try {
    scorer.Generate({Rest(), {}, GenerationMode::kNoRules});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST_F(AdapterStub, FineTuneLifecycle) {
  server_.Post("/v1/finetune", Reply({{"job_id", "job-7"}}));
  std::atomic<int> polls{0};
  server_.Get(R"(/v1/finetune/([\w-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(req.matches[1], "job-7");
    const int n = polls++;
    const char* status = n == 0 ? "pending" : n == 1 ? "running" : "done";
    res.set_content(json{{"status", status}}.dump(), "application/json");
  });
  HttpScorer scorer(Options());
  FineTuneJob job;
  job.rows.push_back({Rest(), {"Be vivid.", "Use wordplay."}, "a person rests"});
  job.hyperparams = DefaultFineTuneHyperparams();
  RunFineTune(scorer, job, {std::chrono::milliseconds(1), std::chrono::seconds(10)});
  EXPECT_EQ(job.job_id, "job-7");
  EXPECT_EQ(job.status, FineTuneState::kDone);
  EXPECT_EQ(polls.load(), 3);
  const json body = LastBody();
  EXPECT_EQ(body["hyperparams"], DefaultFineTuneHyperparams());
  ASSERT_EQ(body["rows"].size(), 1u);
  EXPECT_EQ(body["rows"][0]["rules"], json({"Be vivid.", "Use wordplay."}));
  EXPECT_EQ(body["rows"][0]["mnemonic"], "a person rests");
  EXPECT_EQ(body["rows"][0]["context"]["keyword"], "rest");
}

TEST_F(AdapterStub, FailedFineTuneCarriesReason) {
  server_.Post("/v1/finetune", Reply({{"job_id", "j"}}));
  server_.Get("/v1/finetune/j", Reply({{"status", "failed"}, {"reason", "CUDA OOM"}}));
  HttpScorer scorer(Options());
  FineTuneJob job;
  job.rows.push_back({Rest(), {}, "story"});
  try {
    RunFineTune(scorer, job, {std::chrono::milliseconds(1), std::chrono::seconds(10)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("CUDA OOM"), std::string::npos);
  }
}

TEST_F(AdapterStub, FineTuneTimesOut) {
  server_.Post("/v1/finetune", Reply({{"job_id", "j"}}));
  server_.Get("/v1/finetune/j", Reply({{"status", "running"}}));
  HttpScorer scorer(Options());
  FineTuneJob job;
  job.rows.push_back({Rest(), {}, "story"});
  EXPECT_THROW(
      RunFineTune(scorer, job, {std::chrono::milliseconds(5), std::chrono::milliseconds(30)}),
      Error);
}

TEST_F(AdapterStub, UnknownFineTuneStatusIsContractError) {
  server_.Post("/v1/finetune", Reply({{"job_id", "j"}}));
  server_.Get("/v1/finetune/j", Reply({{"status", "exploded"}}));
  HttpScorer scorer(Options());
  FineTuneJob job;
  job.rows.push_back({Rest(), {}, "story"});
  try {
    RunFineTune(scorer, job, {std::chrono::milliseconds(1), std::chrono::seconds(1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST_F(AdapterStub, SimilarityContract) {
  server_.Post("/v1/similarity",
               Reply({{"bertscore", {{"P", 0.1}, {"R", 0.2}, {"F1", 0.121}}},
                      {"luar", {{"CRUD", 0.487}, {"MUD", 0.447}}}}));
  HttpEmbeddingClient client(Options());
  const SemanticScores scores = ComputeSemanticScores({{"cand", "ref"}}, client);
  EXPECT_DOUBLE_EQ(scores.bertscore.f1, 0.121);
  EXPECT_DOUBLE_EQ(scores.luar.at("MUD"), 0.447);
  EXPECT_EQ(LastBody()["pairs"], json::parse(R"([{"candidate":"cand","reference":"ref"}])"));
}

TEST_F(AdapterStub, SimilarityShapeChecked) {
  server_.Post("/v1/similarity", Reply({{"bertscore", {{"P", 0.1}}}, {"luar", json::object()}}));
  HttpEmbeddingClient client(Options());
  EXPECT_THROW(client.Similarity({{"a", "b"}}), Error);
}

TEST_F(AdapterStub, JudgeContract) {
  server_.Post("/v1/judge", Reply({{"text", "Feedback: fine [RESULT] B"}}));
  HttpJudge judge(Options());
  JudgeOptions options;
  options.swap_even_positions = false;
  const WinRateResult result =
      WinRate({{{Rest(), "old"}, Rest(), "sys", "base", "ref"}}, judge, options);
  EXPECT_DOUBLE_EQ(result.win_rate, 0.0);
  EXPECT_NE(LastBody()["prompt"].get<std::string>().find("Response A\nsys"), std::string::npos);
}

TEST_F(AdapterStub, RuleGeneratorOverGenerate) {
  server_.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const std::string prompt = body["prompt"];
    std::string text;
    if (prompt.find("write exactly") != std::string::npos) {
      text = "<thinking>hm</thinking><rule>Use wordplay.</rule><rule>Be vivid.</rule>";
    } else if (prompt.find("Decide which") != std::string::npos) {
      text = "Feedback: both apply [RESULT] 2, 1";
    } else {
      text = "<thinking>x</thinking><rule>Mention a place.</rule>";
    }
    res.set_content(json{{"text", text}}.dump(), "application/json");
  });
  HttpRuleGen rulegen(Options());
  const std::vector<MnemonicRecord> records{testing::Record("u1", "休", "a person rests")};
  KanjiCatalog catalog;
  catalog.Add(Rest());
  const RuleSet rules = InitializeRules(records, catalog, 2, 1, rulegen);
  EXPECT_EQ(rules[0].text, "Use wordplay.");
  EXPECT_EQ(rules[1].text, "Be vivid.");
  const ActivationTensor z = InitialActivations(records, catalog, rules, rulegen);
  EXPECT_EQ(z.ActiveIndices(0), (std::vector<int>{0, 1}));
  const RuleSet updated = OrthogonalUpdate(rules, {{0, {}}, {1, {}}}, catalog, rulegen);
  EXPECT_EQ(updated[1].text, "Mention a place.");
  EXPECT_EQ(updated[1].revision, 1);
  EXPECT_EQ(rulegen.calls(), 4u);
}

TEST_F(AdapterStub, RuleGeneratorNeedsResultMarker) {
  server_.Post("/v1/generate", Reply({{"text", "I think rules 1 and 2"}}));
  HttpRuleGen rulegen(Options());
  try {
    rulegen.SelectRules(Rest(), RuleSet::FromTexts({"a", "b"}), "story");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST(HttpTransportTest, UnreachableIsTransportError) {
  HttpOptions options;
  options.base_url = "http://127.0.0.1:1";
  options.max_retries = 1;
  options.initial_backoff = std::chrono::milliseconds(1);
  HttpScorer scorer(options);
  try {
    scorer.Score(Rest(), {0, "r", 0}, "story");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTransport);
    EXPECT_NE(std::string(e.what()).find("2 attempts"), std::string::npos) << e.what();
  }
}

TEST(HttpTransportTest, TokenFromEnvironment) {
  ::setenv(kAdapterTokenEnv, "from-env", 1);
  EXPECT_EQ(AdapterTokenFromEnvironment(), "from-env");
  ::unsetenv(kAdapterTokenEnv);
  EXPECT_EQ(AdapterTokenFromEnvironment(), "");
}

}  // namespace
}  // namespace mnemos
