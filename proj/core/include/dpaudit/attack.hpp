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

#ifndef DPAUDIT_ATTACK_HPP_
#define DPAUDIT_ATTACK_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/corpus.hpp"
#include "dpaudit/plan.hpp"

namespace dpaudit {

// Per-trial attack signal: delta = p_syn - p_ref_mean, the synthetic-model
// score of the scored target minus the mean reference-model score.
struct ScoredTrial {
  std::string trial_id;
  std::string target_id;  // the scored target (resampled for non-members)
  bool member = false;
  double p_syn = 0.0;
  double p_ref_mean = 0.0;
  double delta = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;  // rank (Mann-Whitney) statistic, ties counted half
};

// ROC aggregated over repeated evaluations on a fixed 101-point FPR grid
// with a 95% percentile band.
struct RocResult {
  std::vector<double> grid;
  std::vector<double> tpr_mean;
  std::vector<double> tpr_lo;
  std::vector<double> tpr_hi;
  double auc_mean = 0.0;
  std::pair<double, double> auc_ci{0.0, 0.0};
  int n_repeats = 0;
};

struct AttackParams {
  int ngram_order = 2;
  double alpha = 1.0;
  bool length_normalized = true;  // false restores the raw log-prob sum
};

// Trains the synthetic and reference n-gram models once and caches every
// (trial, target) score so that repeated evaluations only redo the cheap
// negative-pair resampling. Synthetic corpora are pulled through the
// provider one at a time, so callers can stream thousands of trials without
// holding them all in memory. The plan must outlive the scorer.
class AttackScorer {
 public:
  using SyntheticProvider = std::function<Corpus(const Trial&)>;

  AttackScorer(const AuditPlan& plan, SyntheticProvider provider,
               const Corpus& aux_corpus,
               const std::map<std::string, Record>& targets,
               const AttackParams& params = {});

  AttackScorer(const AuditPlan& plan,
               const std::map<std::string, Corpus>& synthetic,
               const Corpus& aux_corpus,
               const std::map<std::string, Record>& targets,
               const AttackParams& params = {});

  // One full evaluation: members score their own target, non-members a
  // target resampled from D_out under the given seed.
  std::vector<ScoredTrial> score_once(uint64_t negative_seed) const;

  // One bootstrap evaluation for the confidence band: trials are resampled
  // with replacement within each class (class sizes preserved) and
  // non-members draw fresh targets, so the band covers both the trial-
  // sampling and the negative-assignment uncertainty.
  std::vector<ScoredTrial> score_bootstrap(uint64_t seed) const;

  double synthetic_score(size_t trial_index, const std::string& target_id) const;
  double reference_score(const std::string& target_id) const;

 private:
  std::vector<size_t> negative_target_pool() const;
  ScoredTrial scored(size_t trial_index, size_t target) const;

  const AuditPlan& plan_;
  std::vector<std::string> target_order_;
  std::map<std::string, size_t> target_index_;
  std::vector<double> p_ref_mean_;          // per target
  std::vector<std::vector<double>> p_syn_;  // [trial][target]
};

// Single evaluation under the plan seed.
std::vector<ScoredTrial> score_trials(
    const AuditPlan& plan, const std::map<std::string, Corpus>& synthetic,
    const Corpus& aux_corpus, const std::map<std::string, Record>& targets,
    const AttackParams& params = {});

// Threshold sweep over distinct scores. Ties follow the rank convention:
// auc = (wins + 0.5 * ties) / (n1 * n0); the trapezoid area over the
// returned points equals that statistic. Requires both classes present.
RocCurve roc_auc(std::span<const std::pair<double, bool>> scores);

// Repeats the evaluation with freshly resampled negative pairs, interpolates
// each repeat onto the fixed grid, and reports mean and 2.5/97.5 percentile
// bands for TPR and AUC.
RocResult roc_with_ci(const AttackScorer& scorer, int repeats, uint64_t seed);
RocResult roc_with_ci(const AuditPlan& plan,
                      const std::map<std::string, Corpus>& synthetic,
                      const Corpus& aux_corpus,
                      const std::map<std::string, Record>& targets,
                      const AttackParams& params, int repeats, uint64_t seed);

// Linear interpolation of tpr_mean at the given fpr.
double tpr_at_fpr(const RocResult& roc, double fpr);

// Interpolates a single ROC polyline onto an arbitrary fpr grid.
std::vector<double> interpolate_tpr(const std::vector<RocPoint>& points,
                                    std::span<const double> grid);

void save_roc_json(const RocResult& roc, const std::string& path,
                   const std::map<std::string, std::string>& config = {});
RocResult load_roc_json(const std::string& path);
void save_roc_csv(const RocResult& roc, const std::string& path);

// Extracts the records for the plan's target ids (and validates coverage).
std::map<std::string, Record> collect_targets(const AuditPlan& plan,
                                              const Corpus& corpus);

}  // namespace dpaudit

#endif  // DPAUDIT_ATTACK_HPP_
