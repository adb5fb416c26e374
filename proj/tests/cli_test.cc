// Copyright 2026 The claimx Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "claimx/cli.hpp"
#include "claimx/corpus.hpp"
#include "json.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"
#include "toy_model.hpp"

namespace claimx {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "claimx");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fresh_dir(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / "claimx_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kClaims = testing::fixture("claims_small.jsonl");

TEST(Cli, UsageErrorsExitTwo) {
  RunResult r = run_cli({"eval", "--bogus"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"stats", "--corpus", "/nonexistent/file.jsonl"}).code, kExitUsage);
  // Transfer never falls back to scratch training.
  EXPECT_EQ(run_cli({"transfer", "--corpus", kClaims}).code, kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(Cli, RuntimeErrorsExitOne) {
  const std::string dir = fresh_dir("runtime");
  const std::string bad = dir + "/bad.jsonl";
  std::ofstream(bad) << "{\"id\":\"x\",\"title\":\"\",\"sentences\":[\"a\"]}\n{not json\n";
  const RunResult r = run_cli({"stats", "--corpus", bad, "--out", dir});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("bad.jsonl"), std::string::npos);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);

  const std::string junk = dir + "/junk.ckpt";
  std::ofstream(junk) << "nope";
  const std::string text = dir + "/a.txt";
  std::ofstream(text) << "One. Two.\n";
  EXPECT_EQ(run_cli({"predict", "--checkpoint", junk, "--text-file", text, "--out", dir}).code,
            kExitRuntime);
}

TEST(Cli, StatsOnFixture) {
  const std::string dir = fresh_dir("stats");
  const RunResult r = run_cli({"stats", "--corpus", kClaims, "--out", dir});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string s = slurp(dir + "/stats.txt");
  EXPECT_NE(s.find("abstracts: 2\n"), std::string::npos);
  EXPECT_NE(s.find("sentences: 5\n"), std::string::npos);
  EXPECT_NE(s.find("claims: 2\n"), std::string::npos);
  EXPECT_NE(s.find("last_sentence_fraction: 0.500"), std::string::npos);
  EXPECT_EQ(r.out, s);
  const auto manifest = nlohmann::json::parse(slurp(dir + "/manifest.json"));
  EXPECT_EQ(manifest["command"], "stats");
  EXPECT_TRUE(manifest["inputs"].contains(kClaims));
}

TEST(Cli, StatsOnEmptyCorpus) {
  const std::string dir = fresh_dir("empty");
  const std::string empty = dir + "/empty.jsonl";
  std::ofstream(empty).flush();
  const RunResult r = run_cli({"stats", "--corpus", empty, "--out", dir});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("abstracts: 0\n"), std::string::npos);
  EXPECT_NE(r.out.find("claims: 0\n"), std::string::npos);
}

TEST(Cli, EvalIsDeterministic) {
  const std::string a = fresh_dir("eval_a"), b = fresh_dir("eval_b");
  for (const auto& dir : {a, b}) {
    const RunResult r = run_cli({"eval", "--model", "last-sentence", "--model", "rule-based",
                                 "--corpus", kClaims, "--split", "all", "--seed", "7", "--out", dir});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  for (const char* f : {"report.txt", "report.jsonl", "errors.jsonl"}) {
    EXPECT_EQ(slurp(a + "/" + f), slurp(b + "/" + f)) << f;
  }
  EXPECT_NE(slurp(a + "/report.txt").find("# seed=7"), std::string::npos);
  EXPECT_NE(slurp(a + "/report.txt").find("rule-based"), std::string::npos);
}

TEST(Cli, VoteWritesGoldAndAgreement) {
  const std::string dir = fresh_dir("vote");
  const RunResult r = run_cli({"vote", "--corpus", kClaims, "--out", dir});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto voted = parse_claim_corpus(dir + "/voted.jsonl");
  ASSERT_EQ(voted.size(), 2u);
  EXPECT_EQ(*voted[0].gold_labels, (std::vector<bool>{false, true, false}));
  EXPECT_NE(slurp(dir + "/agreement.txt").find("fleiss"), std::string::npos);
}

TEST(Cli, TrainThenPredict) {
  const std::string dir = fresh_dir("train");
  const std::string corpus = dir + "/marker.jsonl";
  {
    std::vector<ClaimRecord> records;
    for (const auto& a : testing::marker_corpus(16, 2)) {
      ClaimRecord r;
      r.abstract = a.abstract;
      r.gold_labels = a.claims;
      records.push_back(r);
    }
    std::ofstream(corpus) << serialize_claim_corpus(records);
  }
  const RunResult t = run_cli({"train", "--corpus", corpus, "--out", dir, "--embedding-dim", "6",
                               "--word-hidden", "6", "--ff-hidden", "6", "--epochs", "3",
                               "--dropout", "0"});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  ASSERT_TRUE(fs::exists(dir + "/claim.ckpt"));
  EXPECT_FALSE(slurp(dir + "/training_log.jsonl").empty());

  const std::string text = dir + "/abs.txt";
  std::ofstream(text) << "W1 w2. W3 zmark.\n\nOnly one sentence here\n";
  const std::string pdir = dir + "/pred";
  const RunResult p = run_cli({"predict", "--checkpoint", dir + "/claim.ckpt", "--text-file", text,
                               "--out", pdir});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  std::istringstream lines(slurp(pdir + "/predictions.jsonl"));
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0]["abstract_id"], "1");
  EXPECT_EQ(rows[1]["index"], 1);
  EXPECT_EQ(rows[2]["abstract_id"], "2");
  for (const auto& row : rows) {
    for (const char* k : {"text", "claim_prob", "claim", "discourse_dist"}) EXPECT_TRUE(row.contains(k)) << k;
  }
  EXPECT_EQ(p.out, slurp(pdir + "/predictions.jsonl"));
}

}  // namespace
}  // namespace claimx
