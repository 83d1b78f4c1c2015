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

#ifndef DPAUDIT_PLAN_HPP_
#define DPAUDIT_PLAN_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpaudit/bounds.hpp"
#include "dpaudit/corpus.hpp"
#include "dpaudit/outlier.hpp"

namespace dpaudit {

// One membership experiment. subset_ids never contains the target; when
// member is true the target id is appended to the generation-input list at
// export time.
struct Trial {
  std::string trial_id;
  std::vector<std::string> subset_ids;
  std::string target_id;
  bool member = false;

  std::vector<std::string> generation_input_ids() const;

  friend bool operator==(const Trial&, const Trial&) = default;
};

// Reference auxiliary set: all of aux plus the listed targets. Across the M
// reference sets each target is included in exactly M/2.
struct ReferenceSet {
  std::string ref_id;
  std::vector<std::string> included_targets;

  friend bool operator==(const ReferenceSet&, const ReferenceSet&) = default;
};

struct PlanParams {
  int n_trials = 100;
  double subset_fraction = 0.5;
  int m_refs = 4;

  friend bool operator==(const PlanParams&, const PlanParams&) = default;
};

struct AuditPlan {
  uint64_t seed = 0;
  std::vector<std::string> prv_ids;
  std::vector<std::string> aux_ids;
  std::vector<std::string> targets;
  std::vector<Trial> trials;
  std::vector<ReferenceSet> references;
  std::optional<DpBudget> claimed_budget;
  PlanParams params;

  friend bool operator==(const AuditPlan&, const AuditPlan&) = default;
};

// Removes the attack targets, splits the remainder 1:2 (prv:aux) with a
// label-stratified seeded shuffle, then builds the trials (fair-coin
// membership, uniform target) and the balanced reference sets. Fully
// deterministic given (corpus, outliers, params, seed).
AuditPlan build_plan(const Corpus& corpus, const OutlierReport& outliers,
                     const PlanParams& params, uint64_t seed,
                     std::optional<DpBudget> claimed_budget = std::nullopt);

// Writes plan.json, trials.jsonl, references.jsonl and key.jsonl under dir.
// trials.jsonl carries only {trial_id, input_ids}; the membership bit and
// target assignment live exclusively in key.jsonl.
void export_manifests(const AuditPlan& plan, const std::string& dir);

// Inverse of export_manifests.
AuditPlan import_plan(const std::string& dir);

// Loads dir/synthetic/<trial_id>.jsonl for every trial. Missing trial files
// are a coverage error listing the ids; empty synthetic corpora are invalid;
// unknown extra files are skipped with a warning.
std::map<std::string, Corpus> import_synthetic(
    const AuditPlan& plan, const std::string& dir,
    std::vector<std::string>* warnings = nullptr);

}  // namespace dpaudit

#endif  // DPAUDIT_PLAN_HPP_
