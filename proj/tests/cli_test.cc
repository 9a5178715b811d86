// Copyright 2026 The Mnemo Authors
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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mnemo/eval.h"
#include "session_fixtures.h"
#include "temp_dir.h"

namespace mnemo {
namespace {

using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(MNEMO_FIXTURE_DIR) + "/" + name; }

// Ten cases whose true topic shares vocabulary with the last user line.
std::vector<RetrievalCase> overlap_cases() {
  const std::vector<std::string> words = {"piano", "hiking", "soup",   "chess",  "garden",
                                          "kayak", "poetry", "salsa", "pottery", "violin"};
  std::vector<RetrievalCase> cases;
  for (std::size_t c = 0; c < words.size(); ++c) {
    RetrievalCase rc;
    rc.context = {Utterance::user("hey there"), Utterance::bot("hello, what is new?"),
                  Utterance::user("I spent the whole day on " + words[c])};
    for (std::size_t i = 0; i < words.size(); ++i) {
      rc.candidates.push_back("User enjoys " + words[(c + i) % words.size()]);
    }
    rc.truth_index = 0;
    cases.push_back(rc);
  }
  return cases;
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const CliRun r = run({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("run-session"), std::string::npos);
}

TEST(Cli, HelpSucceeds) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST(Cli, RunSessionIsDeterministic) {
  const std::vector<std::string> args = {"--mock", testing::s1_dir(), "run-session", "--policy",
                                         "per_session"};
  const CliRun a = run(args);
  const CliRun b = run(args);
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("retrieved_topic: User is learning piano"), std::string::npos);
  EXPECT_NE(a.out.find("shift_turn: 3"), std::string::npos);
  EXPECT_NE(a.out.find("[shift=Yes]"), std::string::npos);
  EXPECT_NE(a.err.find("command=run-session"), std::string::npos);
}

TEST(Cli, MissingBackendIsDomainError) {
  const CliRun r = run({"run-session", "--session", testing::s1_dir() + "/session.json"});
  EXPECT_EQ(r.code, cli::kExitDomainError);
  EXPECT_NE(r.err.find("ConfigError"), std::string::npos);
}

TEST(Cli, TrainThenEvaluate) {
  testing::TempDir dir;
  const auto cases = overlap_cases();
  save_testset(cases, dir / "train.jsonl");
  const CliRun trained = run({"--mock", fixture("mock_basic"), "train-ranker", "--data",
                           (dir / "train.jsonl").string(), "--out", (dir / "m.json").string()});
  ASSERT_EQ(trained.code, cli::kExitOk) << trained.err;
  EXPECT_EQ(json::parse(trained.out)["pairs"], 10);  // one sampled negative per case
  ASSERT_TRUE(std::filesystem::exists(dir / "m.json"));

  const CliRun eval = run({"--mock", fixture("mock_basic"), "eval-retrieval", "--testset",
                        (dir / "train.jsonl").string(), "--model", (dir / "m.json").string()});
  ASSERT_EQ(eval.code, cli::kExitOk) << eval.err;
  const json report = json::parse(eval.out);
  EXPECT_EQ(report["n"], 10);
  EXPECT_GE(report["r_at"]["1"].get<double>(), 0.9);
}

TEST(Cli, EvalRejectsWrongCandidateCount) {
  testing::TempDir dir;
  auto cases = overlap_cases();
  cases[3].candidates.pop_back();
  save_testset(cases, dir / "t.jsonl");
  const std::vector<std::string> base = {"--mock", fixture("mock_basic"), "eval-retrieval",
                                         "--testset", (dir / "t.jsonl").string()};
  EXPECT_EQ(run(base).code, cli::kExitDomainError);
  auto relaxed = base;
  relaxed.push_back("--allow-n");
  EXPECT_EQ(run(relaxed).code, cli::kExitOk);
}

TEST(Cli, ForgeThenStats) {
  testing::TempDir dir;
  const CliRun forged = run({"--mock", fixture("forge"), "--seed", "3", "forge", "--per-memorable",
                          "2", "--continuations", "4", "--out", (dir / "corpus").string()});
  ASSERT_EQ(forged.code, cli::kExitOk) << forged.err;
  for (const char* f : {"historical.jsonl", "current.jsonl", "bundles.jsonl", "stats.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "corpus" / f)) << f;
  }
  const json report = json::parse(forged.out);
  EXPECT_EQ(report["bundles"], 4);

  const CliRun stats = run({"stats", "--historical", (dir / "corpus" / "historical.jsonl").string(),
                         "--current", (dir / "corpus" / "current.jsonl").string()});
  ASSERT_EQ(stats.code, cli::kExitOk) << stats.err;
  EXPECT_EQ(json::parse(stats.out), report["stats"]);
}

TEST(Cli, BadConfigIsDomainError) {
  testing::TempDir dir;
  std::ofstream(dir / "c.json") << R"({"ranker.epochz": 3})";
  const CliRun r = run({"--config", (dir / "c.json").string(), "stats"});
  EXPECT_EQ(r.code, cli::kExitDomainError);
}

}  // namespace
}  // namespace mnemo
