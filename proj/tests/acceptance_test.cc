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
// Acceptance suite: one numbered criterion per invocation (or all when run
// bare), each printing a single PASS/FAIL line with its measured runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dpaudit/attack.hpp"
#include "dpaudit/bounds.hpp"
#include "dpaudit/corpus.hpp"
#include "dpaudit/embedding.hpp"
#include "dpaudit/fidelity.hpp"
#include "dpaudit/leakage.hpp"
#include "dpaudit/ngram.hpp"
#include "dpaudit/outlier.hpp"
#include "dpaudit/plan.hpp"
#include "dpaudit/quality.hpp"
#include "dpaudit/rng.hpp"
#include "dpaudit/simgen.hpp"
#include "testutil.hpp"

namespace dpaudit::acceptance {
namespace {

namespace fs = std::filesystem;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED: " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// The shared end-to-end fixture: a 2k-record pseudo-English corpus, targets
// from the real outlier detector over hashed TF-IDF embeddings.
struct AuditFixture {
  Corpus corpus;
  OutlierReport outliers;
  AuditPlan plan;
  Corpus aux;
  std::map<std::string, Record> targets;
};

AuditFixture make_audit_fixture(int n_trials, uint64_t plan_seed) {
  AuditFixture f;
  // Record lengths track the short end of the published datasets
  // (15-40 tokens).
  f.corpus = testutil::make_english_fixture(2000, 1234, 15, 40);
  EmbeddingMatrix emb = hash_embed(f.corpus, 256, 1, 2);
  f.outliers = detect_outliers(emb, {});
  PlanParams params;
  params.n_trials = n_trials;
  f.plan = build_plan(f.corpus, f.outliers, params, plan_seed);
  f.aux.name = "aux";
  for (const std::string& id : f.plan.aux_ids) {
    f.aux.records.push_back(*f.corpus.find(id));
  }
  f.targets = collect_targets(f.plan, f.corpus);
  return f;
}

// --------------------------------------------------------------------------
// 1. Bound identity.

Check criterion_1() {
  Check c;
  DpBudget zero{0.0, 0.0};
  for (int i = 0; i <= 100; ++i) {
    double fpr = static_cast<double>(i) / 100.0;
    if (tpr_bound(zero, fpr) != fpr) {
      c.require(false, "tpr_bound(0,0," + fmt(fpr) + ") != fpr exactly");
      break;
    }
  }
  double v = tpr_bound(DpBudget{1.0, 0.0}, 0.1);
  c.require(std::abs(v - 0.27183) <= 1e-4,
            "tpr_bound(1,0,0.1) = " + fmt(v) + ", want 0.27183 +- 1e-4");
  c.note("eps=0 diagonal exact at 101 points, eps=1 value " + fmt(v));
  return c;
}

// --------------------------------------------------------------------------
// 2. AUC oracle.

Check criterion_2() {
  Check c;
  Rng rng(222);
  double worst = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    size_t n = 4 + rng.bounded(60);
    size_t members = 1 + rng.bounded(n - 1);
    std::vector<std::pair<double, bool>> scores;
    scores.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      // Mix of continuous and coarse scores so tie handling is exercised.
      double v = rng.coin() ? rng.next_double()
                            : static_cast<double>(rng.bounded(6)) / 6.0;
      scores.push_back({v, i < members});
    }
    RocCurve curve = roc_auc(scores);
    double trapezoid = 0.0;
    for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
      trapezoid += (curve.points[i + 1].fpr - curve.points[i].fpr) *
                   (curve.points[i].tpr + curve.points[i + 1].tpr) * 0.5;
    }
    double mw = testutil::auc_bruteforce(scores);
    worst = std::max({worst, std::abs(curve.auc - trapezoid),
                      std::abs(curve.auc - mw)});
  }
  c.require(worst < 1e-9, "max |trapezoid - Mann-Whitney| = " + fmt(worst));
  c.note("1000 score sets, max deviation " + fmt(worst));
  return c;
}

// --------------------------------------------------------------------------
// 3. LOF oracle.

Check criterion_3() {
  Check c;
  Rng rng(333);
  std::vector<std::vector<double>> rows;
  rows.reserve(200);
  for (int i = 0; i < 200; ++i) {
    rows.push_back({rng.next_double() * 5.0, rng.next_double() * 5.0,
                    rng.next_double() * 5.0});
  }
  // A few exact duplicates keep the degenerate path honest.
  rows[50] = rows[51] = rows[52];
  EmbeddingMatrix m = testutil::make_matrix(rows, Metric::kEuclidean);
  std::vector<std::vector<double>> dist(200, std::vector<double>(200));
  for (size_t i = 0; i < 200; ++i) {
    for (size_t j = 0; j < 200; ++j) dist[i][j] = pairwise_distance(m, i, j);
  }
  double worst = 0.0;
  for (int k : {5, 20}) {
    std::map<std::string, double> scores = lof_scores(m, k);
    std::vector<double> oracle = testutil::lof_bruteforce(dist, k);
    for (size_t i = 0; i < 200; ++i) {
      worst = std::max(worst, std::abs(scores.at(m.ids()[i]) - oracle[i]));
    }
  }
  c.require(worst < 1e-9, "max |lof - oracle| = " + fmt(worst));
  c.note("200 points, k in {5, 20}, max deviation " + fmt(worst));
  return c;
}

// --------------------------------------------------------------------------
// 4. End-to-end leaky audit.

Check criterion_4() {
  Check c;
  AuditFixture f = make_audit_fixture(100, 91);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kCopier;
  spec.dropout = 0.0;
  spec.seed = 92;
  AttackScorer scorer(
      f.plan,
      [&](const Trial& t) { return generate_trial(spec, f.plan, f.corpus, t); },
      f.aux, f.targets, {});
  RocResult roc = roc_with_ci(scorer, 50, 93);
  ViolationReport report = check_violation(roc, DpBudget{0.5, 0.0});
  c.require(roc.auc_mean >= 0.95,
            "mean AUC = " + fmt(roc.auc_mean) + ", want >= 0.95");
  c.require(report.violated, "bound check vs eps=0.5 must report violated");
  c.note("auc_mean=" + fmt(roc.auc_mean) +
         ", violated=" + (report.violated ? "true" : "false"));
  return c;
}

// --------------------------------------------------------------------------
// 5. End-to-end null audit.

Check criterion_5() {
  Check c;
  int clean_seeds = 0;
  constexpr int kSeeds = 20;
  double default_ci_lo = 0.0;
  double default_ci_hi = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    AuditFixture f = make_audit_fixture(100, 4200 + s);
    SimGeneratorSpec spec;
    spec.kind = SimGeneratorSpec::Kind::kIndependent;
    spec.seed = 9000 + s;
    AttackScorer scorer(
        f.plan,
        [&](const Trial& t) { return generate_trial(spec, f.plan, f.corpus, t); },
        f.aux, f.targets, {});
    RocResult roc = roc_with_ci(scorer, 50, 7000 + s);
    if (s == 0) {
      default_ci_lo = roc.auc_ci.first;
      default_ci_hi = roc.auc_ci.second;
    }
    ViolationReport report = check_violation(roc, DpBudget{0.5, 0.0});
    if (!report.violated) ++clean_seeds;
  }
  c.require(default_ci_lo <= 0.5 && 0.5 <= default_ci_hi,
            "default-seed AUC CI [" + fmt(default_ci_lo) + ", " +
                fmt(default_ci_hi) + "] must contain 0.5");
  c.require(clean_seeds >= 19, "violated=false in " +
                                   std::to_string(clean_seeds) + "/20 seeds, "
                                   "want >= 19");
  c.note("CI=[" + fmt(default_ci_lo) + ", " + fmt(default_ci_hi) + "], clean " +
         std::to_string(clean_seeds) + "/20 seeds");
  return c;
}

// --------------------------------------------------------------------------
// 6. Calibrated mechanism audit.

Check criterion_6() {
  Check c;
  AuditFixture f = make_audit_fixture(5000, 95);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kRandomizedResponse;
  spec.p1 = 0.731;
  spec.p0 = 0.269;
  spec.seed = 96;
  double true_eps = rr_epsilon(spec.p1, spec.p0);
  AttackScorer scorer(
      f.plan,
      [&](const Trial& t) { return generate_trial(spec, f.plan, f.corpus, t); },
      f.aux, f.targets, {});
  RocResult roc = roc_with_ci(scorer, 20, 97);
  ViolationReport honest = check_violation(roc, DpBudget{1.0, 0.0});
  ViolationReport lowball = check_violation(roc, DpBudget{0.3, 0.0});
  c.require(!honest.violated,
            "claimed eps=1.0 must not violate (worst_gap=" +
                fmt(honest.worst_gap) + ")");
  c.require(lowball.violated, "claimed eps=0.3 must violate");
  c.note("true_eps=" + fmt(true_eps) + ", auc=" + fmt(roc.auc_mean) +
         ", gap@1.0=" + fmt(honest.worst_gap) + ", gap@0.3=" +
         fmt(lowball.worst_gap));
  return c;
}

// --------------------------------------------------------------------------
// 7. MAUVE identity and frontier.

Check criterion_7() {
  Check c;
  Corpus corpus = testutil::make_english_fixture(400, 777);
  EmbeddingMatrix emb = hash_embed(corpus, 256, 1, 2);
  auto [p_same, q_same] = kmeans_quantize(emb, emb, 40, 7);
  double identity = mauve(p_same, q_same);
  c.require(identity >= 0.99,
            "MAUVE(identical embeddings) = " + fmt(identity) + ", want >= 0.99");

  CategoricalDist p{{"0", "1", "2", "3"}, {0.5, 0.5, 0.0, 0.0}};
  CategoricalDist q{{"0", "1", "2", "3"}, {0.0, 0.0, 0.5, 0.5}};
  double frontier = mauve(p, q, 5.0, 99);
  c.require(std::abs(frontier - 0.003968) <= 1e-3,
            "MAUVE(disjoint, c=5) = " + fmt(frontier) + ", want 0.003968 +- 1e-3");
  c.note("identity=" + fmt(identity) + ", disjoint=" + fmt(frontier));
  return c;
}

// --------------------------------------------------------------------------
// 8. Divergence floor.

Check criterion_8() {
  Check c;
  Corpus corpus = testutil::make_english_fixture(300, 888);
  EntityCounts tags;
  Rng tag_rng(889);
  const char* kTypes[] = {"DRUG", "ORG", "PER", "LOC"};
  for (const Record& r : corpus.records) {
    auto& counts = tags[r.id];
    for (int e = 0; e < 3; ++e) {
      ++counts[kTypes[tag_rng.bounded(4)]];
    }
  }
  double self_entity = entity_divergence(tags, tags);
  double self_length = length_divergence(corpus, corpus, 20);
  c.require(self_entity == 0.0,
            "entity_divergence(self) = " + fmt(self_entity) + ", want exact 0");
  c.require(self_length == 0.0,
            "length_divergence(self) = " + fmt(self_length) + ", want exact 0");

  Rng rng(890);
  double min_kl = 1.0;
  for (int iter = 0; iter < 10000; ++iter) {
    size_t n = 2 + rng.bounded(10);
    std::vector<double> p(n), q(n);
    double sp = 0.0, sq = 0.0;
    for (size_t i = 0; i < n; ++i) {
      p[i] = rng.next_double() + 1e-9;
      q[i] = rng.next_double() + 1e-9;
      sp += p[i];
      sq += q[i];
    }
    for (size_t i = 0; i < n; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    min_kl = std::min(min_kl, kl_divergence(p, q));
  }
  c.require(min_kl >= 0.0, "KL went negative: " + fmt(min_kl));
  c.note("self divergences exactly 0, min KL over 10k pairs = " + fmt(min_kl));
  return c;
}

// --------------------------------------------------------------------------
// 9. Leakage oracle.

Check criterion_9() {
  Check c;
  // ~50k-token reference.
  Corpus ref = testutil::make_english_fixture(2500, 999, 15, 25);
  size_t ref_tokens = 0;
  std::vector<TokenSeq> docs;
  docs.reserve(ref.size());
  for (const Record& r : ref.records) {
    docs.push_back(tokenize(r.text));
    ref_tokens += docs.back().size();
  }
  MatchIndex idx = MatchIndex::build(ref);

  Corpus queries = testutil::make_english_fixture(500, 1000, 10, 30);
  Rng rng(1001);
  for (Record& q : queries.records) {
    if (rng.bounded(4) == 0) {  // splice in verbatim reference fragments
      const TokenSeq& doc = docs[rng.bounded(docs.size())];
      size_t start = rng.bounded(doc.size());
      size_t len = 1 + rng.bounded(doc.size() - start);
      for (size_t k = start; k < start + len; ++k) {
        q.text += ' ';
        q.text += doc[k];
      }
    }
  }
  int mismatches = 0;
  for (const Record& q : queries.records) {
    int got = idx.longest_match(q);
    int want = testutil::longest_match_bruteforce(docs, tokenize(q.text));
    if (got != want) ++mismatches;
  }
  c.require(mismatches == 0,
            std::to_string(mismatches) + " of 500 queries disagree with the "
                                         "brute-force scan");

  double self_rate = leakage_rate(idx, ref, 1).leaked_fraction;
  c.require(self_rate == 1.0, "self leakage = " + fmt(self_rate));
  Corpus disjoint;
  for (int i = 0; i < 50; ++i) {
    disjoint.records.push_back(
        {"d" + std::to_string(i), "qq" + std::to_string(i) + " zz", {}, {}});
  }
  double zero_rate = leakage_rate(idx, disjoint, 1).leaked_fraction;
  c.require(zero_rate == 0.0, "disjoint leakage = " + fmt(zero_rate));
  c.note(std::to_string(ref_tokens) + "-token reference, 500 queries exact, "
                                      "self=1, disjoint=0");
  return c;
}

// --------------------------------------------------------------------------
// 10. Utility arithmetic anchored to the published F1 table.

Check criterion_10() {
  Check c;
  double v = relative_improvement({51.0, 71.9, 3.7, 9.1});
  c.require(std::abs(v - 0.667) <= 0.001,
            "relative_improvement = " + fmt(v) + ", want 0.667 +- 0.001");
  c.note("(51.0 - 9.1) / (71.9 - 9.1) = " + fmt(v));
  return c;
}

// --------------------------------------------------------------------------
// 11. Determinism across the full CLI matrix.

int run_cli(const std::string& bin, const std::string& args) {
  std::string cmd = bin + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  uint64_t h = fnv1a64(bytes);
  return std::to_string(h) + ":" + std::to_string(bytes.size());
}

std::map<std::string, std::string> tree_digest(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), root).string()] =
          file_digest(entry.path());
    }
  }
  return out;
}

Check criterion_11() {
  Check c;
  const char* bin = std::getenv("DPAUDIT_BIN");
  if (bin == nullptr) {
    c.require(false, "DPAUDIT_BIN not set; cannot drive the CLI");
    return c;
  }
  testutil::TempDir scratch;
  fs::path base = scratch.path();

  // Shared inputs.
  Corpus corpus = testutil::make_english_fixture(300, 1111);
  save_corpus(corpus, (base / "corpus.jsonl").string());
  {
    std::ofstream scores(base / "filter.jsonl");
    Rng rng(1112);
    for (const Record& r : corpus.records) {
      scores << "{\"id\": \"" << r.id << "\", \"score\": "
             << (static_cast<double>(rng.bounded(1000)) / 1000.0) << "}\n";
    }
    std::ofstream leak_csv(base / "leak.csv");
    leak_csv << "dataset,value\na,0.1\nb,0.5\nc,0.3\nd,0.9\ne,0.2\n";
    std::ofstream metric_csv(base / "metric.csv");
    metric_csv << "dataset,value\na,0.2\nb,0.6\nc,0.25\nd,0.95\ne,0.1\n";
    std::ofstream table(base / "table.csv");
    table << "dataset,classifier,method,epsilon,f1_syn,f1_real,f1_random,"
             "f1_majority\n"
          << "hoc,bert-large,dp-gen,inf,51.0,71.9,3.7,9.1\n"
          << "hoc,bert-large,dp-gen,0.5,14.7,71.9,3.7,9.1\n";
    std::ofstream entities(base / "entities.jsonl");
    for (const Record& r : corpus.records) {
      entities << "{\"id\": \"" << r.id
               << "\", \"entities\": [{\"type\": \"ORG\"}]}\n";
    }
  }

  const auto pipeline = [&](const fs::path& dir) {
    fs::create_directories(dir);
    std::string d = dir.string() + "/";
    std::string corpus_path = (base / "corpus.jsonl").string();
    std::vector<std::string> commands = {
        "outliers --input " + corpus_path + " --hash-embed --out " + d +
            "outliers.json",
        "plan --input " + corpus_path + " --outliers " + d +
            "outliers.json --trials 30 --seed 17 --epsilon 0.5 --delta 0 "
            "--out " + d + "plan",
        "simgen --plan " + d + "plan --input " + corpus_path +
            " --kind copier --seed 18 --out " + d + "gen-copy",
        "simgen --plan " + d + "plan --input " + corpus_path +
            " --kind independent --seed 18 --out " + d + "gen-ind",
        "simgen --plan " + d + "plan --input " + corpus_path +
            " --kind randomized-response --p1 0.731 --p0 0.269 --seed 18 "
            "--out " + d + "gen-rr",
        "audit --plan " + d + "plan --syn " + d + "gen-copy --aux " +
            corpus_path + " --repeats 10 --seed 19 --out " + d + "audit",
        "bounds-check --roc " + d + "audit/roc.json --epsilon 0.5 --delta 0 "
            "--out " + d + "audit",
        "fidelity --real " + corpus_path + " --syn " + d +
            "gen-ind/synthetic/t00.jsonl --hash-embed --entities-real " +
            (base / "entities.jsonl").string() + " --entities-syn " +
            (base / "entities.jsonl").string() + " --seed 20 --out " + d +
            "audit/fidelity.json",
        "quality --input " + corpus_path + " --scores " +
            (base / "filter.jsonl").string() + " --filter " +
            (base / "filter.jsonl").string() +
            " --filter-top-fraction 0.5 --filtered-out " + d +
            "filtered.jsonl --seed 21 --out " + d + "audit/quality.json",
        "leakage --input " + d + "gen-copy/synthetic/t00.jsonl --reference " +
            corpus_path + " --out " + d + "audit/leakage.json --csv " + d +
            "leakage.csv",
        "leakage --input " + d + "gen-copy/synthetic/t00.jsonl --reference " +
            corpus_path + " --raw-bytes --threshold 40 --out " + d +
            "leakage-bytes.json",
        "correlate --leakage " + (base / "leak.csv").string() + " --metric " +
            (base / "metric.csv").string() + " --out " + d + "correlate.json",
        "utility --table " + (base / "table.csv").string() + " --out " + d +
            "utility.json --csv " + d + "utility.csv",
        "report --dir " + d + "audit",
    };
    for (const std::string& cmd : commands) {
      if (run_cli(bin, cmd) != 0) {
        return std::string("command failed: dpaudit ") + cmd;
      }
    }
    return std::string();
  };

  // Identical invocations: the pipeline runs twice against the same paths,
  // with the whole output tree wiped in between.
  const fs::path run_dir = base / "run";
  std::string err_a = pipeline(run_dir);
  c.require(err_a.empty(), err_a);
  if (!c.ok) return c;
  std::map<std::string, std::string> da = tree_digest(run_dir);
  fs::remove_all(run_dir);

  std::string err_b = pipeline(run_dir);
  c.require(err_b.empty(), err_b);
  if (!c.ok) return c;
  std::map<std::string, std::string> db = tree_digest(run_dir);
  c.require(da.size() == db.size(), "output file sets differ in size");
  size_t mismatched = 0;
  for (const auto& [rel, digest] : da) {
    auto it = db.find(rel);
    if (it == db.end() || it->second != digest) {
      ++mismatched;
      if (mismatched == 1) {
        c.require(false, "first differing output: " + rel);
      }
    }
  }
  c.require(mismatched == 0,
            std::to_string(mismatched) + " outputs differ between runs");
  c.note(std::to_string(da.size()) +
         " output files byte-identical across both runs");
  return c;
}

// --------------------------------------------------------------------------

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;
  std::function<Check()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> kCriteria = {
      {1, "bound identity", 1.0, criterion_1},
      {2, "AUC trapezoid vs Mann-Whitney oracle", 5.0, criterion_2},
      {3, "LOF brute-force oracle", 5.0, criterion_3},
      {4, "end-to-end leaky audit (copier)", 120.0, criterion_4},
      {5, "end-to-end null audit (independent)", 300.0, criterion_5},
      {6, "calibrated randomized-response audit", 600.0, criterion_6},
      {7, "MAUVE identity and frontier", 30.0, criterion_7},
      {8, "divergence floor", 10.0, criterion_8},
      {9, "leakage suffix-array oracle", 30.0, criterion_9},
      {10, "utility arithmetic anchor", 1.0, criterion_10},
      {11, "CLI determinism matrix", 600.0, criterion_11},
  };
  return kCriteria;
}

int run_criterion(const Criterion& criterion) {
  auto start = std::chrono::steady_clock::now();
  Check check;
  try {
    check = criterion.run();
  } catch (const std::exception& e) {
    check.ok = false;
    check.detail = std::string("exception: ") + e.what();
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  bool in_budget = elapsed < criterion.budget_seconds;
  bool pass = check.ok && in_budget;
  std::printf("[%s] criterion %d: %s (%s) [%.1fs < %.0fs]\n",
              pass ? "PASS" : "FAIL", criterion.number, criterion.name.c_str(),
              check.detail.c_str(), elapsed, criterion.budget_seconds);
  std::fflush(stdout);
  return pass ? 0 : 1;
}

}  // namespace
}  // namespace dpaudit::acceptance

int main(int argc, char** argv) {
  using dpaudit::acceptance::criteria;
  using dpaudit::acceptance::run_criterion;

  if (argc > 1) {
    int failures = 0;
    for (int i = 1; i < argc; ++i) {
      int number = std::atoi(argv[i]);
      bool found = false;
      for (const auto& criterion : criteria()) {
        if (criterion.number == number) {
          failures += run_criterion(criterion);
          found = true;
        }
      }
      if (!found) {
        std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
        return 2;
      }
    }
    return failures == 0 ? 0 : 1;
  }
  int failures = 0;
  for (const auto& criterion : criteria()) failures += run_criterion(criterion);
  return failures == 0 ? 0 : 1;
}
