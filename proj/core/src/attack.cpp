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

#include "dpaudit/attack.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dpaudit/errors.hpp"
#include "dpaudit/ngram.hpp"
#include "dpaudit/rng.hpp"
#include "dpaudit/version.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

using internal::json;

constexpr int kGridPoints = 101;

std::vector<double> make_grid() {
  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[i] = static_cast<double>(i) / (kGridPoints - 1);
  }
  return grid;
}

// Percentile with linear interpolation between order statistics; input is
// copied and sorted.
double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  double rank = p / 100.0 * static_cast<double>(v.size() - 1);
  auto lo = static_cast<size_t>(std::floor(rank));
  if (lo + 1 >= v.size()) return v.back();
  double frac = rank - static_cast<double>(lo);
  return v[lo] + (v[lo + 1] - v[lo]) * frac;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

AttackScorer::AttackScorer(const AuditPlan& plan, SyntheticProvider provider,
                           const Corpus& aux_corpus,
                           const std::map<std::string, Record>& targets,
                           const AttackParams& params)
    : plan_(plan) {
  if (plan.targets.empty()) throw DomainError("plan has no targets");

  for (const std::string& t : plan.targets) {
    if (!targets.count(t)) {
      throw ValidationError("no record supplied for target '" + t + "'");
    }
    target_index_[t] = target_order_.size();
    target_order_.push_back(t);
  }

  std::unordered_map<std::string, const Record*> aux_by_id;
  for (const Record& r : aux_corpus.records) aux_by_id[r.id] = &r;
  for (const std::string& id : plan_.aux_ids) {
    if (!aux_by_id.count(id)) {
      throw ValidationError("aux corpus is missing id '" + id + "'");
    }
  }

  // Tokenizing each target once and scoring token sequences avoids
  // re-tokenizing inside every model evaluation.
  std::vector<TokenSeq> target_tokens(target_order_.size());
  for (size_t t = 0; t < target_order_.size(); ++t) {
    const Record& rec = targets.at(target_order_[t]);
    target_tokens[t] = tokenize(rec.text);
    if (target_tokens[t].empty()) {
      throw ValidationError("target '" + rec.id + "' tokenizes to nothing");
    }
  }

  // Reference models: aux plus each reference set's included targets,
  // trained once and shared by every trial.
  const size_t m = plan_.references.size();
  std::vector<std::vector<double>> ref_scores(
      m, std::vector<double>(target_order_.size()));
  internal::parallel_for(m, [&](size_t j) {
    Corpus ref;
    ref.name = plan_.references[j].ref_id;
    ref.records.reserve(plan_.aux_ids.size() +
                        plan_.references[j].included_targets.size());
    for (const std::string& id : plan_.aux_ids) {
      ref.records.push_back(*aux_by_id.at(id));
    }
    for (const std::string& t : plan_.references[j].included_targets) {
      ref.records.push_back(targets.at(t));
    }
    NgramModel model = train_ngram(ref, params.ngram_order, params.alpha);
    for (size_t t = 0; t < target_order_.size(); ++t) {
      ref_scores[j][t] =
          model.sequence_score(target_tokens[t], params.length_normalized);
    }
  });
  p_ref_mean_.resize(target_order_.size());
  for (size_t t = 0; t < target_order_.size(); ++t) {
    double s = 0.0;
    for (size_t j = 0; j < m; ++j) s += ref_scores[j][t];
    p_ref_mean_[t] = s / static_cast<double>(m);
  }

  // Per-trial synthetic models; only the (trial, target) score matrix is
  // retained, so the provider can stream corpora.
  p_syn_.resize(plan_.trials.size());
  internal::parallel_for(plan_.trials.size(), [&](size_t i) {
    Corpus syn = provider(plan_.trials[i]);
    if (syn.empty()) {
      throw ValidationError("synthetic corpus for trial '" +
                            plan_.trials[i].trial_id + "' is empty");
    }
    NgramModel model = train_ngram(syn, params.ngram_order, params.alpha);
    p_syn_[i].resize(target_order_.size());
    for (size_t t = 0; t < target_order_.size(); ++t) {
      p_syn_[i][t] =
          model.sequence_score(target_tokens[t], params.length_normalized);
    }
  });
}

AttackScorer::AttackScorer(const AuditPlan& plan,
                           const std::map<std::string, Corpus>& synthetic,
                           const Corpus& aux_corpus,
                           const std::map<std::string, Record>& targets,
                           const AttackParams& params)
    : AttackScorer(
          plan,
          [&synthetic](const Trial& t) -> Corpus {
            auto it = synthetic.find(t.trial_id);
            if (it == synthetic.end()) {
              throw ValidationError("no synthetic corpus for trial '" +
                                    t.trial_id + "'");
            }
            return it->second;
          },
          aux_corpus, targets, params) {}

double AttackScorer::synthetic_score(size_t trial_index,
                                     const std::string& target_id) const {
  return p_syn_.at(trial_index).at(target_index_.at(target_id));
}

double AttackScorer::reference_score(const std::string& target_id) const {
  return p_ref_mean_.at(target_index_.at(target_id));
}

std::vector<size_t> AttackScorer::negative_target_pool() const {
  // Negative pairs draw their outlier from the member trials' empirical
  // target multiset rather than uniformly over D_out: the two classes then
  // share the same marginal target distribution, so the only difference the
  // ROC can pick up is membership itself. Falls back to uniform when the
  // plan happens to contain no member trial.
  std::vector<size_t> pool;
  for (const Trial& trial : plan_.trials) {
    if (trial.member) pool.push_back(target_index_.at(trial.target_id));
  }
  if (pool.empty()) {
    pool.resize(target_order_.size());
    for (size_t t = 0; t < pool.size(); ++t) pool[t] = t;
  }
  return pool;
}

ScoredTrial AttackScorer::scored(size_t trial_index, size_t target) const {
  const Trial& trial = plan_.trials[trial_index];
  ScoredTrial s;
  s.trial_id = trial.trial_id;
  s.member = trial.member;
  s.target_id = target_order_[target];
  s.p_syn = p_syn_[trial_index][target];
  s.p_ref_mean = p_ref_mean_[target];
  s.delta = s.p_syn - s.p_ref_mean;
  return s;
}

std::vector<ScoredTrial> AttackScorer::score_once(uint64_t negative_seed) const {
  std::vector<size_t> pool = negative_target_pool();
  Rng rng(negative_seed);
  std::vector<ScoredTrial> out;
  out.reserve(plan_.trials.size());
  for (size_t i = 0; i < plan_.trials.size(); ++i) {
    const Trial& trial = plan_.trials[i];
    size_t t = trial.member ? target_index_.at(trial.target_id)
                            : pool[rng.bounded(pool.size())];
    out.push_back(scored(i, t));
  }
  return out;
}

std::vector<ScoredTrial> AttackScorer::score_bootstrap(uint64_t seed) const {
  std::vector<size_t> members;
  std::vector<size_t> non_members;
  for (size_t i = 0; i < plan_.trials.size(); ++i) {
    (plan_.trials[i].member ? members : non_members).push_back(i);
  }
  std::vector<size_t> pool = negative_target_pool();

  Rng rng(seed);
  std::vector<ScoredTrial> out;
  out.reserve(plan_.trials.size());
  for (size_t n = 0; n < members.size(); ++n) {
    size_t i = members[rng.bounded(members.size())];
    out.push_back(scored(i, target_index_.at(plan_.trials[i].target_id)));
  }
  for (size_t n = 0; n < non_members.size(); ++n) {
    size_t i = non_members[rng.bounded(non_members.size())];
    out.push_back(scored(i, pool[rng.bounded(pool.size())]));
  }
  return out;
}

std::vector<ScoredTrial> score_trials(
    const AuditPlan& plan, const std::map<std::string, Corpus>& synthetic,
    const Corpus& aux_corpus, const std::map<std::string, Record>& targets,
    const AttackParams& params) {
  AttackScorer scorer(plan, synthetic, aux_corpus, targets, params);
  return scorer.score_once(mix_seed(plan.seed, "negatives"));
}

RocCurve roc_auc(std::span<const std::pair<double, bool>> scores) {
  size_t n_pos = 0;
  size_t n_neg = 0;
  for (const auto& [s, member] : scores) {
    if (member) {
      ++n_pos;
    } else {
      ++n_neg;
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw DomainError("ROC requires at least one member and one non-member");
  }

  std::vector<std::pair<double, bool>> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  size_t tp = 0;
  size_t fp = 0;
  double rank_stat = 0.0;  // wins + 0.5 * ties, accumulated per tie group
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    size_t group_pos = 0;
    size_t group_neg = 0;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      if (sorted[j].second) {
        ++group_pos;
      } else {
        ++group_neg;
      }
      ++j;
    }
    // Members in this group beat every lower-scored non-member and tie the
    // group's own non-members.
    rank_stat += static_cast<double>(group_pos) *
                     (static_cast<double>(n_neg) - static_cast<double>(fp) -
                      static_cast<double>(group_neg)) +
                 0.5 * static_cast<double>(group_pos) *
                     static_cast<double>(group_neg);
    tp += group_pos;
    fp += group_neg;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  curve.auc = rank_stat / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return curve;
}

std::vector<double> interpolate_tpr(const std::vector<RocPoint>& points,
                                    std::span<const double> grid) {
  // Collapse vertical runs: for each distinct fpr keep the max tpr, then
  // interpolate the resulting monotone polyline.
  std::vector<RocPoint> poly;
  for (const RocPoint& p : points) {
    if (!poly.empty() && poly.back().fpr == p.fpr) {
      poly.back().tpr = std::max(poly.back().tpr, p.tpr);
    } else {
      poly.push_back(p);
    }
  }
  std::vector<double> out;
  out.reserve(grid.size());
  size_t seg = 0;
  for (double g : grid) {
    while (seg + 1 < poly.size() && poly[seg + 1].fpr < g) ++seg;
    if (g <= poly.front().fpr) {
      out.push_back(poly.front().tpr);
    } else if (seg + 1 >= poly.size()) {
      out.push_back(poly.back().tpr);
    } else {
      const RocPoint& a = poly[seg];
      const RocPoint& b = poly[seg + 1];
      double frac = (g - a.fpr) / (b.fpr - a.fpr);
      out.push_back(a.tpr + frac * (b.tpr - a.tpr));
    }
  }
  return out;
}

RocResult roc_with_ci(const AttackScorer& scorer, int repeats, uint64_t seed) {
  if (repeats < 2) throw DomainError("repeats must be >= 2");

  RocResult result;
  result.grid = make_grid();
  result.n_repeats = repeats;

  std::vector<std::vector<double>> tpr_per_repeat(
      repeats, std::vector<double>(result.grid.size()));
  std::vector<double> aucs(repeats);
  for (int r = 0; r < repeats; ++r) {
    std::vector<ScoredTrial> scored =
        scorer.score_bootstrap(mix_seed(seed, "repeat", static_cast<uint64_t>(r)));
    std::vector<std::pair<double, bool>> pairs;
    pairs.reserve(scored.size());
    for (const ScoredTrial& s : scored) pairs.push_back({s.delta, s.member});
    RocCurve curve = roc_auc(pairs);
    tpr_per_repeat[r] = interpolate_tpr(curve.points, result.grid);
    aucs[r] = curve.auc;
  }

  result.tpr_mean.resize(result.grid.size());
  result.tpr_lo.resize(result.grid.size());
  result.tpr_hi.resize(result.grid.size());
  std::vector<double> column(repeats);
  for (size_t g = 0; g < result.grid.size(); ++g) {
    for (int r = 0; r < repeats; ++r) column[r] = tpr_per_repeat[r][g];
    auto [min_it, max_it] = std::minmax_element(column.begin(), column.end());
    if (*min_it == *max_it) {
      // Identical repeats collapse to an exactly zero-width band.
      result.tpr_mean[g] = *min_it;
      result.tpr_lo[g] = *min_it;
      result.tpr_hi[g] = *min_it;
      continue;
    }
    double mean = mean_of(column);
    result.tpr_mean[g] = mean;
    // The percentile band is clamped around the mean so the documented
    // lo <= mean <= hi ordering holds even for extreme skew.
    result.tpr_lo[g] = std::min(percentile(column, 2.5), mean);
    result.tpr_hi[g] = std::max(percentile(column, 97.5), mean);
  }
  result.auc_mean = mean_of(aucs);
  result.auc_ci = {percentile(aucs, 2.5), percentile(aucs, 97.5)};
  return result;
}

RocResult roc_with_ci(const AuditPlan& plan,
                      const std::map<std::string, Corpus>& synthetic,
                      const Corpus& aux_corpus,
                      const std::map<std::string, Record>& targets,
                      const AttackParams& params, int repeats, uint64_t seed) {
  AttackScorer scorer(plan, synthetic, aux_corpus, targets, params);
  return roc_with_ci(scorer, repeats, seed);
}

double tpr_at_fpr(const RocResult& roc, double fpr) {
  if (!(fpr >= 0.0 && fpr <= 1.0)) throw DomainError("fpr must lie in [0, 1]");
  const auto& grid = roc.grid;
  if (fpr <= grid.front()) return roc.tpr_mean.front();
  if (fpr >= grid.back()) return roc.tpr_mean.back();
  size_t hi = static_cast<size_t>(
      std::lower_bound(grid.begin(), grid.end(), fpr) - grid.begin());
  size_t lo = hi - 1;
  double frac = (fpr - grid[lo]) / (grid[hi] - grid[lo]);
  return roc.tpr_mean[lo] + frac * (roc.tpr_mean[hi] - roc.tpr_mean[lo]);
}

void save_roc_json(const RocResult& roc, const std::string& path,
                   const std::map<std::string, std::string>& config) {
  json j;
  j["auc_ci"] = {roc.auc_ci.first, roc.auc_ci.second};
  j["auc_mean"] = roc.auc_mean;
  if (!config.empty()) j["config"] = config;
  j["format_version"] = kFormatVersion;
  j["grid"] = roc.grid;
  j["n_repeats"] = roc.n_repeats;
  j["tpr_hi"] = roc.tpr_hi;
  j["tpr_lo"] = roc.tpr_lo;
  j["tpr_mean"] = roc.tpr_mean;
  internal::write_text_file(path, j.dump(2) + "\n");
}

RocResult load_roc_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("grid")) {
    throw ValidationError("'" + path + "' is not a ROC result");
  }
  RocResult roc;
  roc.grid = j.at("grid").get<std::vector<double>>();
  roc.tpr_mean = j.at("tpr_mean").get<std::vector<double>>();
  roc.tpr_lo = j.at("tpr_lo").get<std::vector<double>>();
  roc.tpr_hi = j.at("tpr_hi").get<std::vector<double>>();
  roc.auc_mean = j.at("auc_mean").get<double>();
  auto ci = j.at("auc_ci").get<std::vector<double>>();
  if (ci.size() != 2) throw ValidationError("auc_ci must have two entries");
  roc.auc_ci = {ci[0], ci[1]};
  roc.n_repeats = j.at("n_repeats").get<int>();
  if (roc.grid.size() != roc.tpr_mean.size() ||
      roc.grid.size() != roc.tpr_lo.size() ||
      roc.grid.size() != roc.tpr_hi.size()) {
    throw ValidationError("ROC grid/band sizes are inconsistent in '" + path + "'");
  }
  return roc;
}

void save_roc_csv(const RocResult& roc, const std::string& path) {
  std::string out = "fpr,tpr_mean,tpr_lo,tpr_hi\n";
  for (size_t i = 0; i < roc.grid.size(); ++i) {
    out += internal::format_double(roc.grid[i]);
    out += ',';
    out += internal::format_double(roc.tpr_mean[i]);
    out += ',';
    out += internal::format_double(roc.tpr_lo[i]);
    out += ',';
    out += internal::format_double(roc.tpr_hi[i]);
    out += '\n';
  }
  internal::write_text_file(path, out);
}

std::map<std::string, Record> collect_targets(const AuditPlan& plan,
                                              const Corpus& corpus) {
  std::map<std::string, Record> out;
  std::vector<std::string> missing;
  std::unordered_map<std::string, const Record*> by_id;
  for (const Record& r : corpus.records) by_id[r.id] = &r;
  for (const std::string& t : plan.targets) {
    auto it = by_id.find(t);
    if (it == by_id.end()) {
      missing.push_back(t);
    } else {
      out.emplace(t, *it->second);
    }
  }
  if (!missing.empty()) {
    std::string msg = "corpus is missing " + std::to_string(missing.size()) +
                      " target record(s):";
    size_t shown = std::min<size_t>(missing.size(), 10);
    for (size_t i = 0; i < shown; ++i) msg += " '" + missing[i] + "'";
    if (missing.size() > shown) msg += " ...";
    throw ValidationError(msg);
  }
  return out;
}

}  // namespace dpaudit
