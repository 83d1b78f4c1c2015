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
// Single-binary CLI over the audit pipeline. Every subcommand is
// deterministic given its flags: all randomness flows from --seed (env
// DPTA_SEED as fallback) and identical invocations produce byte-identical
// output files.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpaudit/attack.hpp"
#include "dpaudit/bounds.hpp"
#include "dpaudit/corpus.hpp"
#include "dpaudit/embedding.hpp"
#include "dpaudit/errors.hpp"
#include "dpaudit/fidelity.hpp"
#include "dpaudit/leakage.hpp"
#include "dpaudit/outlier.hpp"
#include "dpaudit/plan.hpp"
#include "dpaudit/quality.hpp"
#include "dpaudit/simgen.hpp"
#include "dpaudit/version.hpp"

namespace dpaudit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

void write_report(const std::string& path, json j) {
  j["format_version"] = kFormatVersion;
  write_file(path, j.dump(2) + "\n");
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ValidationError("'" + path + "' is not valid JSON");
  }
  return j;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Plain-text reference loader: each non-empty line is one document.
Corpus load_text_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  Corpus corpus;
  corpus.name = fs::path(path).stem().string();
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    corpus.records.push_back({"line" + std::to_string(n), line, {}, {}});
  }
  return corpus;
}

// Minimal CSV reader: comma-separated, first row is the header, no quoting.
std::vector<std::map<std::string, std::string>> load_csv(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else if (c != '\r') {
        cell += c;
      }
    }
    cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("'" + path + "' is empty; expected a CSV header");
  }
  std::vector<std::string> header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw ValidationError("'" + path + "' line " + std::to_string(line_no) +
                            " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
    }
    std::map<std::string, std::string> row;
    for (size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

double csv_number(const std::map<std::string, std::string>& row,
                  const std::string& key, const std::string& path) {
  auto it = row.find(key);
  if (it == row.end()) {
    throw ValidationError("'" + path + "' is missing column '" + key + "'");
  }
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ValidationError("'" + path + "': cannot parse '" + it->second +
                          "' in column '" + key + "'");
  }
}

json epsilon_json(double v) {
  if (std::isinf(v)) return "unbounded";
  return v;
}

struct SeedOption {
  uint64_t value = 42;
  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", value, "Seed for all randomness in this command")
        ->envname("DPTA_SEED")
        ->capture_default_str();
  }
};

// ---------------------------------------------------------------------------
// outliers

int cmd_outliers(const std::string& input, const std::string& embeddings,
                 bool use_hash_embed, int dim, int ngram_lo, int ngram_hi,
                 const std::string& metric, double top_fraction, int k,
                 double lof_threshold, const std::string& out) {
  Corpus corpus = load_corpus(input);
  Metric m = parse_metric(metric);
  std::vector<std::string> warnings;
  EmbeddingMatrix emb =
      use_hash_embed
          ? hash_embed(corpus, static_cast<size_t>(dim), ngram_lo, ngram_hi, m)
          : load_embeddings(embeddings, corpus, m, &warnings);
  print_warnings(warnings);

  OutlierParams params{top_fraction, k, lof_threshold};
  OutlierReport report = detect_outliers(emb, params);
  std::map<std::string, std::string> config = {
      {"input", input},
      {"embeddings", use_hash_embed ? "hash-embed" : embeddings},
      {"dim", std::to_string(dim)},
      {"ngram_lo", std::to_string(ngram_lo)},
      {"ngram_hi", std::to_string(ngram_hi)},
      {"metric", metric},
      {"top_fraction", fmt(top_fraction)},
      {"k", std::to_string(k)},
      {"lof_threshold", fmt(lof_threshold)},
  };
  save_outlier_report(report, out, config);
  std::cout << "wrote " << out << " (" << report.target_ids.size()
            << " targets of " << corpus.size() << " records)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plan

int cmd_plan(const std::string& input, const std::string& outliers_path,
             int trials, double subset_fraction, int refs, uint64_t seed,
             std::optional<double> epsilon, double delta,
             const std::string& out) {
  Corpus corpus = load_corpus(input);
  OutlierReport outliers = load_outlier_report(outliers_path);
  PlanParams params;
  params.n_trials = trials;
  params.subset_fraction = subset_fraction;
  params.m_refs = refs;
  std::optional<DpBudget> budget;
  if (epsilon) budget = DpBudget{*epsilon, delta};
  AuditPlan plan = build_plan(corpus, outliers, params, seed, budget);
  ensure_dir(out);
  export_manifests(plan, out);
  std::cout << "wrote " << out << "/{plan.json,trials.jsonl,references.jsonl,key.jsonl}\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simgen

int cmd_simgen(const std::string& plan_dir, const std::string& input,
               const std::string& kind, double dropout, double p1, double p0,
               uint64_t seed, const std::string& out) {
  AuditPlan plan = import_plan(plan_dir);
  Corpus corpus = load_corpus(input);
  SimGeneratorSpec spec;
  spec.kind = parse_generator_kind(kind);
  spec.dropout = dropout;
  spec.p1 = p1;
  spec.p0 = p0;
  spec.seed = seed;
  spec.validate();
  ensure_dir(out);
  write_synthetic(generate(spec, plan, corpus), out);

  json j;
  j["config"] = {{"plan", plan_dir},       {"input", input},
                 {"kind", kind},           {"dropout", fmt(dropout)},
                 {"p1", fmt(p1)},          {"p0", fmt(p0)},
                 {"seed", std::to_string(seed)}};
  if (spec.kind == SimGeneratorSpec::Kind::kRandomizedResponse) {
    j["true_epsilon"] = rr_epsilon(p1, p0);
  }
  write_report(out + "/simgen.json", std::move(j));
  std::cout << "wrote " << out << "/synthetic/ (" << plan.trials.size()
            << " trials)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// audit

int cmd_audit(const std::string& plan_dir, const std::string& syn_dir,
              const std::string& aux_path, int ngram_order, double alpha,
              bool raw_logprob, int repeats, uint64_t seed,
              const std::string& out) {
  AuditPlan plan = import_plan(plan_dir);
  // The aux file must cover the aux ids and the target records; the original
  // corpus qualifies.
  Corpus aux = load_corpus(aux_path);
  std::map<std::string, Record> targets = collect_targets(plan, aux);
  std::vector<std::string> warnings;
  std::map<std::string, Corpus> synthetic =
      import_synthetic(plan, syn_dir, &warnings);
  print_warnings(warnings);

  AttackParams params;
  params.ngram_order = ngram_order;
  params.alpha = alpha;
  params.length_normalized = !raw_logprob;
  AttackScorer scorer(plan, synthetic, aux, targets, params);
  RocResult roc = roc_with_ci(scorer, repeats, seed);

  ensure_dir(out);
  std::map<std::string, std::string> config = {
      {"plan", plan_dir},
      {"syn", syn_dir},
      {"aux", aux_path},
      {"ngram_order", std::to_string(ngram_order)},
      {"alpha", fmt(alpha)},
      {"score", raw_logprob ? "raw-logprob" : "mean-logprob"},
      {"repeats", std::to_string(repeats)},
      {"seed", std::to_string(seed)},
  };
  save_roc_json(roc, out + "/roc.json", config);
  save_roc_csv(roc, out + "/roc.csv");
  std::cout << "wrote " << out << "/roc.{json,csv} (auc_mean="
            << fmt(roc.auc_mean) << ", ci=[" << fmt(roc.auc_ci.first) << ", "
            << fmt(roc.auc_ci.second) << "])\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bounds-check

json violation_to_json(const ViolationReport& report) {
  json points = json::array();
  for (const ViolationPoint& p : report.points) {
    points.push_back({{"empirical_epsilon", epsilon_json(p.empirical_epsilon)},
                      {"fpr", p.fpr},
                      {"tpr_bound", p.tpr_bound},
                      {"tpr_observed", p.tpr_observed}});
  }
  json j;
  j["budget"] = {{"delta", report.budget.delta},
                 {"epsilon", report.budget.epsilon}};
  j["points"] = std::move(points);
  j["statistic"] = violation_statistic_name(report.statistic);
  j["violated"] = report.violated;
  j["worst_gap"] = report.worst_gap;
  return j;
}

int cmd_bounds_check(const std::string& roc_path, double epsilon, double delta,
                     const std::string& statistic, const std::string& out) {
  RocResult roc = load_roc_json(roc_path);
  DpBudget budget{epsilon, delta};
  ViolationReport report =
      check_violation(roc, budget, parse_violation_statistic(statistic));

  ensure_dir(out);
  json j = violation_to_json(report);
  j["config"] = {{"roc", roc_path},
                 {"epsilon", fmt(epsilon)},
                 {"delta", fmt(delta)},
                 {"statistic", statistic}};
  write_report(out + "/violation.json", std::move(j));

  std::string csv = "fpr,tpr_bound\n";
  for (const ViolationPoint& p : report.points) {
    csv += fmt(p.fpr) + "," + fmt(p.tpr_bound) + "\n";
  }
  write_file(out + "/bound.csv", csv);
  std::cout << "wrote " << out << "/violation.json (violated="
            << (report.violated ? "true" : "false")
            << ", worst_gap=" << fmt(report.worst_gap) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fidelity

struct FidelityInputs {
  const Corpus* real;
  const Corpus* other;  // synthetic or heldout
  std::string real_emb;
  std::string other_emb;
  bool use_hash_embed;
  int dim;
  std::string entities_real;
  std::string entities_other;
};

json fidelity_metrics(const FidelityInputs& in, int kmeans_k, uint64_t seed,
                      double mauve_c, int lambdas, int bins, double entity_alpha,
                      bool use_js) {
  DivergenceKind kind = use_js ? DivergenceKind::kJs : DivergenceKind::kKl;
  json j;

  EmbeddingMatrix real_m({}, {}, 1, Metric::kCosine);
  EmbeddingMatrix other_m({}, {}, 1, Metric::kCosine);
  if (in.use_hash_embed) {
    // Pool the two corpora before hashing so both sides share one IDF and
    // land in the same feature space.
    Corpus pooled;
    for (const Record& r : in.real->records) {
      Record copy = r;
      copy.id = "real:" + r.id;
      pooled.records.push_back(std::move(copy));
    }
    for (const Record& r : in.other->records) {
      Record copy = r;
      copy.id = "other:" + r.id;
      pooled.records.push_back(std::move(copy));
    }
    EmbeddingMatrix all =
        hash_embed(pooled, static_cast<size_t>(in.dim), 1, 2, Metric::kCosine);
    size_t n_real = in.real->size();
    std::vector<std::string> real_ids(all.ids().begin(),
                                      all.ids().begin() + n_real);
    std::vector<std::string> other_ids(all.ids().begin() + n_real,
                                       all.ids().end());
    std::vector<double> real_data(all.row(0).data(),
                                  all.row(0).data() + n_real * all.cols());
    std::vector<double> other_data(
        all.row(0).data() + n_real * all.cols(),
        all.row(0).data() + all.rows() * all.cols());
    real_m = EmbeddingMatrix(std::move(real_ids), std::move(real_data),
                             all.cols(), Metric::kCosine);
    other_m = EmbeddingMatrix(std::move(other_ids), std::move(other_data),
                              all.cols(), Metric::kCosine);
  } else {
    real_m = load_embeddings(in.real_emb, *in.real);
    other_m = load_embeddings(in.other_emb, *in.other);
  }

  int k = kmeans_k > 0
              ? kmeans_k
              : default_mauve_clusters(real_m.rows(), other_m.rows());
  auto [p, q] = kmeans_quantize(real_m, other_m, k, seed);
  j["mauve"] = mauve(p, q, mauve_c, lambdas);
  j["kmeans_k"] = k;

  if (!in.entities_real.empty() && !in.entities_other.empty()) {
    j["entity_divergence"] = entity_divergence(
        load_entities(in.entities_real), load_entities(in.entities_other),
        entity_alpha, kind);
  } else {
    j["entity_divergence"] = nullptr;
  }
  j["length_divergence"] = length_divergence(*in.real, *in.other, bins, kind);
  return j;
}

int cmd_fidelity(const std::string& real_path, const std::string& syn_path,
                 const std::string& real_emb, const std::string& syn_emb,
                 bool use_hash_embed, int dim, const std::string& entities_real,
                 const std::string& entities_syn, const std::string& heldout,
                 const std::string& heldout_emb,
                 const std::string& entities_heldout, int kmeans_k,
                 uint64_t seed, double mauve_c, int lambdas, int bins,
                 double entity_alpha, bool use_js, const std::string& out) {
  Corpus real = load_corpus(real_path);
  Corpus syn = load_corpus(syn_path);
  FidelityInputs inputs{&real,   &syn,          real_emb,
                        syn_emb, use_hash_embed, dim,
                        entities_real, entities_syn};
  json j = fidelity_metrics(inputs, kmeans_k, seed, mauve_c, lambdas, bins,
                            entity_alpha, use_js);

  if (!heldout.empty()) {
    // Same metrics between real and a heldout split of real data: the
    // attainable floor for the divergences on this dataset.
    Corpus held = load_corpus(heldout);
    FidelityInputs floor_in{&real,       &held,          real_emb,
                            heldout_emb, use_hash_embed, dim,
                            entities_real, entities_heldout};
    j["reference_floor"] = fidelity_metrics(floor_in, kmeans_k, seed, mauve_c,
                                            lambdas, bins, entity_alpha, use_js);
  } else {
    j["reference_floor"] = nullptr;
  }

  j["params"] = {{"mauve_c", mauve_c},
                 {"lambdas", lambdas},
                 {"bins", bins},
                 {"divergence", use_js ? "js" : "kl"},
                 {"entity_alpha", entity_alpha}};
  j["config"] = {{"real", real_path},
                 {"syn", syn_path},
                 {"embeddings", use_hash_embed ? "hash-embed" : real_emb + ";" + syn_emb},
                 {"seed", std::to_string(seed)}};
  write_report(out, std::move(j));
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// quality

int cmd_quality(const std::string& input,
                const std::vector<std::string>& score_files, int max_refs,
                int top_k, uint64_t seed, const std::string& filter_scores,
                std::optional<double> filter_threshold,
                std::optional<double> filter_top_fraction,
                const std::string& filtered_out, const std::string& out) {
  Corpus corpus = load_corpus(input);
  json j;
  j["distinct1"] = distinct_n(corpus, 1);
  j["distinct2"] = distinct_n(corpus, 2);
  j["self_bleu"] = self_bleu(corpus, max_refs, seed);
  auto [slope, r2] = zipf_fit(corpus, top_k);
  j["zipf_slope"] = slope;
  j["zipf_r2"] = r2;
  auto [mean_len, sd_len] = length_stats(corpus);
  j["mean_len"] = mean_len;
  j["sd_len"] = sd_len;

  json ingested = json::object();
  std::vector<std::string> warnings;
  for (const std::string& file : score_files) {
    ScoreAggregate agg = ingest_scores(file, corpus, &warnings);
    ingested[fs::path(file).stem().string()] = {{"count", agg.count},
                                                {"max", agg.max},
                                                {"mean", agg.mean},
                                                {"min", agg.min},
                                                {"sd", agg.sd}};
  }
  print_warnings(warnings);
  j["ingested"] = std::move(ingested);

  if (!filter_scores.empty()) {
    if (filter_threshold.has_value() == filter_top_fraction.has_value()) {
      throw ValidationError(
          "filtering needs exactly one of --filter-threshold / "
          "--filter-top-fraction");
    }
    if (filtered_out.empty()) {
      throw ValidationError("--filtered-out is required when filtering");
    }
    FilterMode mode = filter_threshold
                          ? FilterMode::threshold(*filter_threshold)
                          : FilterMode::top_fraction(*filter_top_fraction);
    Corpus filtered =
        filter_by_score(corpus, load_score_map(filter_scores), mode);
    save_corpus(filtered, filtered_out);
    j["filtered"] = {{"input_records", corpus.size()},
                     {"kept_records", filtered.size()},
                     {"output", filtered_out}};
  }

  j["config"] = {{"input", input},
                 {"max_refs", std::to_string(max_refs)},
                 {"top_k", std::to_string(top_k)},
                 {"seed", std::to_string(seed)}};
  write_report(out, std::move(j));
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// leakage

int cmd_leakage(const std::string& input, const std::string& reference,
                const std::string& reference_format, int threshold,
                bool token_weighted, bool raw_bytes, const std::string& out,
                const std::string& csv_out) {
  Corpus probe = load_corpus(input);
  Corpus ref = reference_format == "text" ? load_text_corpus(reference)
                                          : load_corpus(reference);
  MatchIndex index =
      raw_bytes ? MatchIndex::build_bytes(ref) : MatchIndex::build(ref);
  LeakageReport report = leakage_rate(index, probe, threshold, token_weighted);

  json per_record = json::object();
  for (const auto& [id, longest] : report.per_record) per_record[id] = longest;
  json j;
  j["leaked_fraction"] = report.leaked_fraction;
  j["per_record"] = std::move(per_record);
  j["threshold_tokens"] = report.threshold_tokens;
  j["token_weighted"] = report.token_weighted;
  j["match_units"] = raw_bytes ? "bytes" : "tokens";
  j["config"] = {{"input", input},
                 {"reference", reference},
                 {"reference_format", reference_format},
                 {"threshold", std::to_string(threshold)}};
  write_report(out, std::move(j));

  if (!csv_out.empty()) {
    std::string csv = "id,longest_match,leaked\n";
    for (const auto& [id, longest] : report.per_record) {
      csv += id + "," + std::to_string(longest) + "," +
             (longest >= threshold ? "1" : "0") + "\n";
    }
    write_file(csv_out, csv);
  }
  std::cout << "wrote " << out << " (leaked_fraction="
            << fmt(report.leaked_fraction) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// correlate

int cmd_correlate(const std::string& leakage_csv, const std::string& metric_csv,
                  const std::string& out) {
  const auto column = [](const std::string& path) {
    std::map<std::string, double> values;
    for (const auto& row : load_csv(path)) {
      auto it = row.find("dataset");
      if (it == row.end()) {
        throw ValidationError("'" + path + "' is missing column 'dataset'");
      }
      values[it->second] = csv_number(row, "value", path);
    }
    return values;
  };
  std::map<std::string, double> leak = column(leakage_csv);
  std::map<std::string, double> metric = column(metric_csv);

  std::vector<std::string> datasets;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [name, v] : leak) {
    auto it = metric.find(name);
    if (it == metric.end()) continue;
    datasets.push_back(name);
    x.push_back(v);
    y.push_back(it->second);
  }
  if (datasets.size() < 3) {
    throw DomainError("correlate needs >= 3 datasets common to both files, got " +
                      std::to_string(datasets.size()));
  }
  auto [rho, p] = spearman(x, y);
  json j;
  j["datasets"] = datasets;
  j["n"] = datasets.size();
  j["p_approx"] = p;
  j["rho"] = rho;
  j["config"] = {{"leakage", leakage_csv}, {"metric", metric_csv}};
  write_report(out, std::move(j));
  std::cout << "wrote " << out << " (rho=" << fmt(rho) << ", p=" << fmt(p)
            << ", n=" << datasets.size() << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// utility

int cmd_utility(const std::string& table, const std::string& out,
                const std::string& csv_out) {
  json rows = json::array();
  double best = -std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  std::string csv =
      "dataset,classifier,method,epsilon,f1_syn,f1_real,f1_random,f1_majority,"
      "relative_improvement\n";
  for (const auto& row : load_csv(table)) {
    UtilityTriple u;
    u.f1_syn = csv_number(row, "f1_syn", table);
    u.f1_real = csv_number(row, "f1_real", table);
    u.f1_random = csv_number(row, "f1_random", table);
    u.f1_majority = csv_number(row, "f1_majority", table);
    double improvement = relative_improvement(u);
    best = std::max(best, improvement);
    worst = std::min(worst, improvement);
    const auto field = [&](const std::string& key) {
      auto it = row.find(key);
      return it == row.end() ? std::string() : it->second;
    };
    rows.push_back({{"classifier", field("classifier")},
                    {"dataset", field("dataset")},
                    {"epsilon", field("epsilon")},
                    {"method", field("method")},
                    {"relative_improvement", improvement}});
    csv += field("dataset") + "," + field("classifier") + "," +
           field("method") + "," + field("epsilon") + "," + fmt(u.f1_syn) +
           "," + fmt(u.f1_real) + "," + fmt(u.f1_random) + "," +
           fmt(u.f1_majority) + "," + fmt(improvement) + "\n";
  }
  if (rows.empty()) throw ValidationError("'" + table + "' has no data rows");
  json j;
  j["rows"] = std::move(rows);
  j["summary"] = {{"max", best}, {"min", worst}};
  j["config"] = {{"table", table}};
  write_report(out, std::move(j));
  if (!csv_out.empty()) write_file(csv_out, csv);
  std::cout << "wrote " << out << " (improvements in [" << fmt(worst) << ", "
            << fmt(best) << "])\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& dir, const std::string& out_name) {
  if (!fs::is_directory(dir)) {
    throw IoError("'" + dir + "' is not a directory");
  }
  json report;
  std::optional<std::string> version_seen;
  const auto take = [&](const std::string& file) -> json {
    fs::path p = fs::path(dir) / file;
    if (!fs::exists(p)) return nullptr;
    json j = load_json(p.string());
    if (j.contains("format_version")) {
      std::string v = j["format_version"].get<std::string>();
      if (version_seen && *version_seen != v) {
        throw ValidationError("conflicting format versions under '" + dir +
                              "': " + *version_seen + " vs " + v + " (" + file +
                              ")");
      }
      version_seen = v;
    }
    return j;
  };

  report["roc"] = take("roc.json");
  report["fidelity"] = take("fidelity.json");
  report["quality"] = take("quality.json");
  report["leakage"] = take("leakage.json");

  // Any number of violation reports (violation.json, violation_eps0.5.json,
  // ...) are merged; each contributes a bound column to the overlay.
  json violations = json::array();
  std::vector<fs::path> violation_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("violation", 0) == 0 && entry.path().extension() == ".json") {
      violation_files.push_back(entry.path());
    }
  }
  std::sort(violation_files.begin(), violation_files.end());
  for (const fs::path& p : violation_files) {
    violations.push_back(take(p.filename().string()));
  }
  report["violations"] = violations.empty() ? json(nullptr) : violations;
  report["config"] = {{"dir", dir}};

  if (!report["roc"].is_null()) {
    const json& roc = report["roc"];
    std::string csv = "fpr,tpr_mean,tpr_lo,tpr_hi";
    for (const json& v : violations) {
      csv += ",bound_eps" + fmt(v["budget"]["epsilon"].get<double>());
    }
    csv += "\n";
    const auto& grid = roc["grid"];
    for (size_t i = 0; i < grid.size(); ++i) {
      csv += fmt(grid[i].get<double>()) + "," +
             fmt(roc["tpr_mean"][i].get<double>()) + "," +
             fmt(roc["tpr_lo"][i].get<double>()) + "," +
             fmt(roc["tpr_hi"][i].get<double>());
      for (const json& v : violations) {
        csv += "," + fmt(v["points"][i]["tpr_bound"].get<double>());
      }
      csv += "\n";
    }
    write_file((fs::path(dir) / "roc_overlay.csv").string(), csv);
  }

  write_report((fs::path(dir) / out_name).string(), std::move(report));
  std::cout << "wrote " << (fs::path(dir) / out_name).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{
      "dpaudit: privacy auditing and quality scoring for synthetic text "
      "corpora"};
  app.require_subcommand(1);

  // outliers ----------------------------------------------------------------
  auto* outliers = app.add_subcommand(
      "outliers", "Stage 1: select attack targets (centroid-farthest + LOF)");
  struct {
    std::string input, embeddings, metric = "cosine", out = "outliers.json";
    bool hash = false;
    int dim = 256, lo = 1, hi = 2, k = 20;
    double top_fraction = 0.01, lof_threshold = 1.5;
  } o;
  outliers->add_option("--input", o.input, "Corpus JSONL")->required();
  auto* emb_opt = outliers->add_option("--embeddings", o.embeddings,
                                       "Embedding JSONL from an external encoder");
  outliers->add_flag("--hash-embed", o.hash,
                     "Use the built-in hashed TF-IDF embedder");
  outliers->add_option("--dim", o.dim, "hash-embed dimension")
      ->capture_default_str();
  outliers->add_option("--ngram-lo", o.lo, "hash-embed n-gram low order")
      ->capture_default_str();
  outliers->add_option("--ngram-hi", o.hi, "hash-embed n-gram high order")
      ->capture_default_str();
  outliers->add_option("--metric", o.metric, "cosine | euclidean")
      ->capture_default_str();
  outliers
      ->add_option("--top-fraction", o.top_fraction,
                   "Fraction of centroid-farthest points flagged")
      ->capture_default_str();
  outliers->add_option("--k", o.k, "LOF neighborhood size")
      ->capture_default_str();
  outliers
      ->add_option("--lof-threshold", o.lof_threshold,
                   "LOF score above which a point is an outlier")
      ->capture_default_str();
  outliers->add_option("--out", o.out, "Output report path")
      ->capture_default_str();
  outliers->callback([&] {
    if (o.hash == !o.embeddings.empty()) {
      throw CLI::ValidationError(
          "outliers", "exactly one of --embeddings / --hash-embed is required");
    }
    (void)emb_opt;
    cmd_outliers(o.input, o.embeddings, o.hash, o.dim, o.lo, o.hi, o.metric,
                 o.top_fraction, o.k, o.lof_threshold, o.out);
  });

  // plan ---------------------------------------------------------------------
  auto* plan = app.add_subcommand(
      "plan", "Stage 2: build membership trials and reference sets");
  struct {
    std::string input, outliers, out = "plan";
    int trials = 100, refs = 4;
    double subset_fraction = 0.5, delta = 1e-5;
    std::optional<double> epsilon;
    SeedOption seed;
  } p;
  plan->add_option("--input", p.input, "Corpus JSONL")->required();
  plan->add_option("--outliers", p.outliers, "Outlier report from `outliers`")
      ->required();
  plan->add_option("--trials", p.trials, "Number of membership trials")
      ->capture_default_str();
  plan->add_option("--subset-fraction", p.subset_fraction,
                   "Fraction of D_prv sampled per trial")
      ->capture_default_str();
  plan->add_option("--refs", p.refs, "Number of reference sets (even)")
      ->capture_default_str();
  plan->add_option("--epsilon", p.epsilon,
                   "Claimed privacy budget recorded in the plan");
  plan->add_option("--delta", p.delta, "Claimed delta (with --epsilon)")
      ->capture_default_str();
  p.seed.attach(plan);
  plan->add_option("--out", p.out, "Output manifest directory")
      ->capture_default_str();
  plan->callback([&] {
    cmd_plan(p.input, p.outliers, p.trials, p.subset_fraction, p.refs,
             p.seed.value, p.epsilon, p.delta, p.out);
  });

  // simgen ---------------------------------------------------------------
  auto* simgen = app.add_subcommand(
      "simgen", "Generate synthetic corpora with a simulator of known privacy");
  struct {
    std::string plan, input, kind, out = "simgen-out";
    double dropout = 0.0, p1 = 0.0, p0 = 0.0;
    SeedOption seed;
  } s;
  simgen->add_option("--plan", s.plan, "Plan manifest directory")->required();
  simgen->add_option("--input", s.input, "Original corpus JSONL")->required();
  simgen
      ->add_option("--kind", s.kind,
                   "copier | independent | randomized-response")
      ->required();
  simgen->add_option("--dropout", s.dropout, "copier: per-token dropout")
      ->capture_default_str();
  simgen->add_option("--p1", s.p1, "randomized-response: member inclusion prob")
      ->capture_default_str();
  simgen
      ->add_option("--p0", s.p0,
                   "randomized-response: non-member inclusion prob")
      ->capture_default_str();
  s.seed.attach(simgen);
  simgen->add_option("--out", s.out, "Output directory")->capture_default_str();
  simgen->callback([&] {
    cmd_simgen(s.plan, s.input, s.kind, s.dropout, s.p1, s.p0, s.seed.value,
               s.out);
  });

  // audit ---------------------------------------------------------------
  auto* audit = app.add_subcommand(
      "audit", "Stage 3: score trials, aggregate ROC/AUC with CI");
  struct {
    std::string plan, syn, aux, out = "audit-out";
    int order = 2, repeats = 50;
    double alpha = 1.0;
    bool raw = false;
    SeedOption seed;
  } a;
  audit->add_option("--plan", a.plan, "Plan manifest directory")->required();
  audit->add_option("--syn", a.syn, "Directory holding synthetic/<trial>.jsonl")
      ->required();
  audit
      ->add_option("--aux", a.aux,
                   "Corpus JSONL covering aux ids and target records (the "
                   "original corpus qualifies)")
      ->required();
  audit->add_option("--ngram-order", a.order, "n-gram order of attack models")
      ->capture_default_str();
  audit->add_option("--alpha", a.alpha, "Additive smoothing constant")
      ->capture_default_str();
  audit->add_flag("--raw-logprob", a.raw,
                  "Score with summed rather than mean log-probability");
  audit->add_option("--repeats", a.repeats,
                    "Negative-pair resampling repetitions")
      ->capture_default_str();
  a.seed.attach(audit);
  audit->add_option("--out", a.out, "Output directory")->capture_default_str();
  audit->callback([&] {
    cmd_audit(a.plan, a.syn, a.aux, a.order, a.alpha, a.raw, a.repeats,
              a.seed.value, a.out);
  });

  // bounds-check ----------------------------------------------------------
  auto* bounds = app.add_subcommand(
      "bounds-check", "Compare an empirical ROC against the (eps, delta) bound");
  struct {
    std::string roc, statistic = "lower_ci", out = ".";
    double epsilon = 0.0, delta = 1e-5;
  } b;
  bounds->add_option("--roc", b.roc, "roc.json from `audit`")->required();
  bounds->add_option("--epsilon", b.epsilon, "Claimed epsilon")->required();
  bounds
      ->add_option("--delta", b.delta,
                   "Claimed delta (default matches common DP-SGD practice; "
                   "always recorded in the report)")
      ->capture_default_str();
  bounds
      ->add_option("--statistic", b.statistic,
                   "ROC statistic compared against the bound: lower_ci | mean")
      ->capture_default_str();
  bounds->add_option("--out", b.out, "Output directory")->capture_default_str();
  bounds->callback([&] {
    cmd_bounds_check(b.roc, b.epsilon, b.delta, b.statistic, b.out);
  });

  // fidelity ---------------------------------------------------------------
  auto* fidelity = app.add_subcommand(
      "fidelity", "Reference-based fidelity: MAUVE and N/L divergences");
  struct {
    std::string real, syn, real_emb, syn_emb, entities_real, entities_syn;
    std::string heldout, heldout_emb, entities_heldout;
    std::string out = "fidelity.json";
    bool hash = false, js = false;
    int dim = 256, kmeans_k = 0, lambdas = 99, bins = 20;
    double mauve_c = 5.0, entity_alpha = 0.5;
    SeedOption seed;
  } f;
  fidelity->add_option("--real", f.real, "Real corpus JSONL")->required();
  fidelity->add_option("--syn", f.syn, "Synthetic corpus JSONL")->required();
  fidelity->add_option("--real-emb", f.real_emb, "Real embedding JSONL");
  fidelity->add_option("--syn-emb", f.syn_emb, "Synthetic embedding JSONL");
  fidelity->add_flag("--hash-embed", f.hash,
                     "Embed both corpora with the built-in hashed TF-IDF");
  fidelity->add_option("--dim", f.dim, "hash-embed dimension")
      ->capture_default_str();
  fidelity->add_option("--entities-real", f.entities_real,
                       "entities.jsonl for the real corpus");
  fidelity->add_option("--entities-syn", f.entities_syn,
                       "entities.jsonl for the synthetic corpus");
  fidelity->add_option("--heldout", f.heldout,
                       "Heldout real split; adds the reference_floor section");
  fidelity->add_option("--heldout-emb", f.heldout_emb,
                       "Heldout embedding JSONL");
  fidelity->add_option("--entities-heldout", f.entities_heldout,
                       "entities.jsonl for the heldout split");
  fidelity
      ->add_option("--kmeans-k", f.kmeans_k,
                   "MAUVE cluster count (0 = min(500, N/10))")
      ->capture_default_str();
  fidelity->add_option("--mauve-c", f.mauve_c, "MAUVE scaling constant")
      ->capture_default_str();
  fidelity->add_option("--lambdas", f.lambdas, "MAUVE mixture grid size")
      ->capture_default_str();
  fidelity->add_option("--bins", f.bins, "Length histogram bins")
      ->capture_default_str();
  fidelity
      ->add_option("--entity-alpha", f.entity_alpha,
                   "Additive smoothing for the entity-type distributions")
      ->capture_default_str();
  fidelity->add_flag("--js", f.js,
                     "Use Jensen-Shannon instead of KL for N/L divergences");
  f.seed.attach(fidelity);
  fidelity->add_option("--out", f.out, "Output report path")
      ->capture_default_str();
  fidelity->callback([&] {
    if (f.hash == (!f.real_emb.empty() && !f.syn_emb.empty())) {
      throw CLI::ValidationError(
          "fidelity",
          "embeddings required: either --hash-embed or both --real-emb and "
          "--syn-emb");
    }
    cmd_fidelity(f.real, f.syn, f.real_emb, f.syn_emb, f.hash, f.dim,
                 f.entities_real, f.entities_syn, f.heldout, f.heldout_emb,
                 f.entities_heldout, f.kmeans_k, f.seed.value, f.mauve_c,
                 f.lambdas, f.bins, f.entity_alpha, f.js, f.out);
  });

  // quality ---------------------------------------------------------------
  auto* quality = app.add_subcommand(
      "quality", "Reference-free metrics, score ingestion and filtering");
  struct {
    std::string input, filter_scores, filtered_out, out = "quality.json";
    std::vector<std::string> scores;
    int max_refs = 100, top_k = 5000;
    std::optional<double> filter_threshold, filter_top_fraction;
    SeedOption seed;
  } q;
  quality->add_option("--input", q.input, "Corpus JSONL")->required();
  quality->add_option("--scores", q.scores,
                      "External per-sample score JSONL file(s)");
  quality
      ->add_option("--max-refs", q.max_refs,
                   "Self-BLEU references sampled per record")
      ->capture_default_str();
  quality->add_option("--top-k", q.top_k, "Tokens used in the Zipf fit")
      ->capture_default_str();
  quality->add_option("--filter", q.filter_scores,
                      "Score JSONL used to filter the corpus");
  quality->add_option("--filter-threshold", q.filter_threshold,
                      "Keep records with score >= t");
  quality->add_option("--filter-top-fraction", q.filter_top_fraction,
                      "Keep the top fraction by score");
  quality->add_option("--filtered-out", q.filtered_out,
                      "Where to write the filtered corpus");
  q.seed.attach(quality);
  quality->add_option("--out", q.out, "Output report path")
      ->capture_default_str();
  quality->callback([&] {
    cmd_quality(q.input, q.scores, q.max_refs, q.top_k, q.seed.value,
                q.filter_scores, q.filter_threshold, q.filter_top_fraction,
                q.filtered_out, q.out);
  });

  // leakage ---------------------------------------------------------------
  auto* leakage = app.add_subcommand(
      "leakage", "Exact-match contamination against a reference corpus");
  struct {
    std::string input, reference, reference_format = "jsonl";
    std::string out = "leakage.json", csv;
    int threshold = 8;
    bool token_weighted = false, raw_bytes = false;
  } l;
  leakage->add_option("--input", l.input, "Corpus JSONL to test")->required();
  leakage->add_option("--reference", l.reference, "Reference corpus")
      ->required();
  leakage
      ->add_option("--reference-format", l.reference_format,
                   "jsonl | text (one document per line)")
      ->capture_default_str();
  leakage
      ->add_option("--threshold", l.threshold,
                   "Minimum verbatim match length counted as leaked")
      ->capture_default_str();
  leakage->add_flag("--token-weighted", l.token_weighted,
                    "Report the leaked fraction of tokens, not records");
  leakage->add_flag("--raw-bytes", l.raw_bytes,
                    "Bit-exact byte matching instead of token matching");
  leakage->add_option("--out", l.out, "Output report path")
      ->capture_default_str();
  leakage->add_option("--csv", l.csv, "Optional per-record CSV path");
  leakage->callback([&] {
    cmd_leakage(l.input, l.reference, l.reference_format, l.threshold,
                l.token_weighted, l.raw_bytes, l.out, l.csv);
  });

  // correlate ---------------------------------------------------------------
  auto* correlate = app.add_subcommand(
      "correlate", "Spearman correlation between per-dataset leakage and a "
                   "metric");
  struct {
    std::string leakage, metric, out = "correlate.json";
  } co;
  correlate
      ->add_option("--leakage", co.leakage, "CSV with columns dataset,value")
      ->required();
  correlate->add_option("--metric", co.metric, "CSV with columns dataset,value")
      ->required();
  correlate->add_option("--out", co.out, "Output report path")
      ->capture_default_str();
  correlate->callback(
      [&] { cmd_correlate(co.leakage, co.metric, co.out); });

  // utility ---------------------------------------------------------------
  auto* utility = app.add_subcommand(
      "utility", "Baseline-discounted relative improvement from an F1 table");
  struct {
    std::string table, out = "utility.json", csv;
  } u;
  utility
      ->add_option("--table", u.table,
                   "CSV: dataset,classifier,method,epsilon,f1_syn,f1_real,"
                   "f1_random,f1_majority")
      ->required();
  utility->add_option("--out", u.out, "Output report path")
      ->capture_default_str();
  utility->add_option("--csv", u.csv, "Optional CSV output path");
  utility->callback([&] { cmd_utility(u.table, u.out, u.csv); });

  // report ---------------------------------------------------------------
  auto* report = app.add_subcommand(
      "report", "Merge prior outputs into report.json + roc_overlay.csv");
  struct {
    std::string dir, out = "report.json";
  } r;
  report->add_option("--dir", r.dir, "Directory holding subcommand outputs")
      ->required();
  report->add_option("--out", r.out, "Report filename inside --dir")
      ->capture_default_str();
  report->callback([&] { cmd_report(r.dir, r.out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace dpaudit::cli

int main(int argc, char** argv) {
  try {
    return dpaudit::cli::run(argc, argv);
  } catch (const dpaudit::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const dpaudit::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const dpaudit::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
