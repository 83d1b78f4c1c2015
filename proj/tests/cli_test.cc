// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Drives the dpaudit binary (path passed as argv[1]) through realistic
// subcommand sequences and checks outputs with the library's own loaders.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

#include "dpaudit/attack.hpp"
#include "dpaudit/corpus.hpp"
#include "dpaudit/outlier.hpp"
#include "dpaudit/plan.hpp"
#include "dpaudit/rng.hpp"
#include "testutil.hpp"

namespace dpaudit {
namespace {

using nlohmann::json;
using testutil::TempDir;

std::string g_binary;  // set from argv[1] in main

int run(const std::string& args) {
  std::string cmd = g_binary + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

json load(const std::string& path) {
  json j = json::parse(slurp(path), nullptr, false);
  EXPECT_FALSE(j.is_discarded()) << path;
  return j;
}

class CliPipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = testutil::make_english_fixture(300, 2024);
    corpus_path_ = dir_.str("corpus.jsonl");
    save_corpus(corpus_, corpus_path_);
  }

  TempDir dir_;
  Corpus corpus_;
  std::string corpus_path_;
};

TEST_F(CliPipelineTest, FullAuditPipeline) {
  ASSERT_EQ(run("outliers --input " + corpus_path_ + " --hash-embed --out " +
                dir_.str("outliers.json")),
            0);
  // Self-consumption: the toolkit's own loader reads what the CLI wrote.
  OutlierReport outliers = load_outlier_report(dir_.str("outliers.json"));
  EXPECT_FALSE(outliers.target_ids.empty());
  EXPECT_EQ(outliers.scores.size(), corpus_.size());

  ASSERT_EQ(run("plan --input " + corpus_path_ + " --outliers " +
                dir_.str("outliers.json") +
                " --trials 40 --seed 11 --epsilon 0.5 --delta 0 --out " +
                dir_.str("plan")),
            0);
  AuditPlan plan = import_plan(dir_.str("plan"));
  EXPECT_EQ(plan.trials.size(), 40u);
  ASSERT_TRUE(plan.claimed_budget.has_value());
  EXPECT_DOUBLE_EQ(plan.claimed_budget->epsilon, 0.5);

  ASSERT_EQ(run("simgen --plan " + dir_.str("plan") + " --input " +
                corpus_path_ + " --kind copier --seed 12 --out " +
                dir_.str("gen")),
            0);
  std::map<std::string, Corpus> syn = import_synthetic(plan, dir_.str("gen"));
  EXPECT_EQ(syn.size(), 40u);

  ASSERT_EQ(run("audit --plan " + dir_.str("plan") + " --syn " +
                dir_.str("gen") + " --aux " + corpus_path_ +
                " --repeats 10 --seed 13 --out " + dir_.str("audit")),
            0);
  RocResult roc = load_roc_json(dir_.str("audit/roc.json"));
  EXPECT_EQ(roc.n_repeats, 10);
  EXPECT_GT(roc.auc_mean, 0.9);  // copier leaks everything

  ASSERT_EQ(run("bounds-check --roc " + dir_.str("audit/roc.json") +
                " --epsilon 0.5 --delta 0 --out " + dir_.str("audit")),
            0);
  json violation = load(dir_.str("audit/violation.json"));
  EXPECT_TRUE(violation["violated"].get<bool>());
  EXPECT_EQ(violation["format_version"], "dpaudit-1");
  // Perfect recall at fpr 0 serializes the empirical epsilon sentinel.
  EXPECT_EQ(violation["points"][0]["empirical_epsilon"], "unbounded");

  ASSERT_EQ(run("report --dir " + dir_.str("audit")), 0);
  json report = load(dir_.str("audit/report.json"));
  EXPECT_FALSE(report["roc"].is_null());
  EXPECT_FALSE(report["violations"].is_null());
  EXPECT_TRUE(report["fidelity"].is_null());  // not produced in this run
  EXPECT_TRUE(report["quality"].is_null());

  // Overlay CSV exists and has one bound column.
  std::string overlay = slurp(dir_.str("audit/roc_overlay.csv"));
  EXPECT_THAT(overlay, ::testing::StartsWith(
                           "fpr,tpr_mean,tpr_lo,tpr_hi,bound_eps0.5\n"));
}

TEST_F(CliPipelineTest, FidelityQualityLeakage) {
  // Synthetic side: an independent shuffle of fixture text.
  Corpus other = testutil::make_english_fixture(200, 2025);
  std::string other_path = dir_.str("other.jsonl");
  save_corpus(other, other_path);

  ASSERT_EQ(run("fidelity --real " + corpus_path_ + " --syn " + other_path +
                " --hash-embed --seed 3 --out " + dir_.str("fidelity.json")),
            0);
  json fidelity = load(dir_.str("fidelity.json"));
  EXPECT_GE(fidelity["mauve"].get<double>(), 0.0);
  EXPECT_LE(fidelity["mauve"].get<double>(), 1.0);
  EXPECT_TRUE(fidelity["entity_divergence"].is_null());
  EXPECT_GE(fidelity["length_divergence"].get<double>(), 0.0);

  // Same corpus on both sides: fidelity floor.
  ASSERT_EQ(run("fidelity --real " + corpus_path_ + " --syn " + corpus_path_ +
                " --hash-embed --seed 3 --out " + dir_.str("fid_self.json")),
            0);
  json self_fidelity = load(dir_.str("fid_self.json"));
  EXPECT_GE(self_fidelity["mauve"].get<double>(), 0.99);
  EXPECT_EQ(self_fidelity["length_divergence"].get<double>(), 0.0);

  ASSERT_EQ(run("quality --input " + corpus_path_ + " --seed 4 --out " +
                dir_.str("quality.json")),
            0);
  json quality = load(dir_.str("quality.json"));
  EXPECT_GT(quality["distinct1"].get<double>(), 0.0);
  EXPECT_LE(quality["distinct1"].get<double>(), 1.0);
  EXPECT_LT(quality["zipf_slope"].get<double>(), 0.0);

  ASSERT_EQ(run("leakage --input " + corpus_path_ + " --reference " +
                corpus_path_ + " --threshold 1 --out " +
                dir_.str("leakage.json")),
            0);
  json leakage = load(dir_.str("leakage.json"));
  EXPECT_DOUBLE_EQ(leakage["leaked_fraction"].get<double>(), 1.0);
}

TEST_F(CliPipelineTest, UtilityAndCorrelate) {
  {
    std::ofstream table(dir_.str("table.csv"));
    table << "dataset,classifier,method,epsilon,f1_syn,f1_real,f1_random,"
             "f1_majority\n"
          << "hoc,bert-large,dp-gen,inf,51.0,71.9,3.7,9.1\n";
    std::ofstream leak(dir_.str("leak.csv"));
    leak << "dataset,value\na,0.1\nb,0.2\nc,0.3\nd,0.4\n";
    std::ofstream metric(dir_.str("metric.csv"));
    metric << "dataset,value\na,1.0\nb,2.1\nc,2.9\nd,4.2\n";
  }
  ASSERT_EQ(run("utility --table " + dir_.str("table.csv") + " --out " +
                dir_.str("utility.json")),
            0);
  json utility = load(dir_.str("utility.json"));
  EXPECT_NEAR(utility["rows"][0]["relative_improvement"].get<double>(), 0.667,
              1e-3);

  ASSERT_EQ(run("correlate --leakage " + dir_.str("leak.csv") + " --metric " +
                dir_.str("metric.csv") + " --out " + dir_.str("corr.json")),
            0);
  json corr = load(dir_.str("corr.json"));
  EXPECT_DOUBLE_EQ(corr["rho"].get<double>(), 1.0);
  EXPECT_EQ(corr["n"].get<int>(), 4);
}

TEST_F(CliPipelineTest, ReportRejectsConflictingFormatVersions) {
  std::filesystem::create_directories(dir_.path() / "merged");
  ASSERT_EQ(run("quality --input " + corpus_path_ + " --out " +
                dir_.str("merged/quality.json")),
            0);
  {
    std::ofstream stale(dir_.str("merged/leakage.json"));
    stale << R"({"format_version": "dpaudit-0", "leaked_fraction": 0.0})"
          << "\n";
  }
  EXPECT_EQ(run("report --dir " + dir_.str("merged")), 1);
}

TEST_F(CliPipelineTest, ExitCodes) {
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("outliers --input " + corpus_path_ + " --hash-embed "
                "--bogus-flag"),
            1);
  EXPECT_EQ(run("audit --plan /nonexistent --syn x --aux " + corpus_path_), 2);
  // Validation failure: corpus with a duplicate id.
  std::ofstream bad(dir_.str("bad.jsonl"));
  bad << R"({"id": "a", "text": "one"})" << "\n"
      << R"({"id": "a", "text": "two"})" << "\n";
  bad.close();
  EXPECT_EQ(run("outliers --input " + dir_.str("bad.jsonl") +
                " --hash-embed --out " + dir_.str("x.json")),
            1);
}

TEST_F(CliPipelineTest, SeedFromEnvironment) {
  ASSERT_EQ(run("outliers --input " + corpus_path_ + " --hash-embed --out " +
                dir_.str("o.json")),
            0);
  ASSERT_EQ(run("plan --input " + corpus_path_ + " --outliers " +
                dir_.str("o.json") + " --trials 10 --seed 77 --out " +
                dir_.str("plan_flag")),
            0);
  std::string env_cmd = "DPTA_SEED=77 " + g_binary + " plan --input " +
                        corpus_path_ + " --outliers " + dir_.str("o.json") +
                        " --trials 10 --out " + dir_.str("plan_env") +
                        " > /dev/null 2>&1";
  ASSERT_EQ(WEXITSTATUS(std::system(env_cmd.c_str())), 0);
  EXPECT_EQ(slurp(dir_.str("plan_flag/plan.json")),
            slurp(dir_.str("plan_env/plan.json")));
  EXPECT_EQ(slurp(dir_.str("plan_flag/key.jsonl")),
            slurp(dir_.str("plan_env/key.jsonl")));
}

}  // namespace
}  // namespace dpaudit

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc > 1) {
    dpaudit::g_binary = argv[1];
  } else if (const char* env = std::getenv("DPAUDIT_BIN")) {
    dpaudit::g_binary = env;
  } else {
    std::fprintf(stderr, "usage: cli_test <path-to-dpaudit>\n");
    return 2;
  }
  return RUN_ALL_TESTS();
}
