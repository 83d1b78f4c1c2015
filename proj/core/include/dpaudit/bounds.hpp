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

#ifndef DPAUDIT_BOUNDS_HPP_
#define DPAUDIT_BOUNDS_HPP_

#include <string>
#include <vector>

namespace dpaudit {

struct RocResult;  // attack.hpp

struct DpBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  // epsilon >= 0, delta in [0, 1).
  void validate() const;

  friend bool operator==(const DpBudget&, const DpBudget&) = default;
};

// Maximum TPR any attack against an (epsilon, delta)-DP mechanism can reach
// at the given FPR: min(1, delta + e^eps * fpr, 1 - e^-eps * (1 - delta -
// fpr)), clamped to [0, 1]. Non-decreasing in fpr, epsilon and delta.
double tpr_bound(const DpBudget& budget, double fpr);

// Smallest epsilon consistent with an observed (fpr, tpr) point:
// max(ln((tpr - delta)/fpr), ln((1 - delta - fpr)/(1 - tpr)), 0).
// Non-positive or undefined ratio arguments contribute 0; tpr == 1 makes the
// second constraint unbounded and returns +infinity (serialized as the
// string "unbounded").
double empirical_epsilon(double fpr, double tpr, double delta);

enum class ViolationStatistic { kLowerCi, kMean };

std::string violation_statistic_name(ViolationStatistic s);
ViolationStatistic parse_violation_statistic(const std::string& name);

struct ViolationPoint {
  double fpr = 0.0;
  double tpr_observed = 0.0;
  double tpr_bound = 0.0;
  double empirical_epsilon = 0.0;
};

struct ViolationReport {
  DpBudget budget;
  bool violated = false;
  std::vector<ViolationPoint> points;
  double worst_gap = 0.0;
  ViolationStatistic statistic = ViolationStatistic::kLowerCi;
};

// Compares the chosen ROC statistic against tpr_bound at every grid point.
// violated iff some point strictly exceeds the bound; equality on the
// boundary is not a violation.
ViolationReport check_violation(
    const RocResult& roc, const DpBudget& budget,
    ViolationStatistic statistic = ViolationStatistic::kLowerCi);

}  // namespace dpaudit

#endif  // DPAUDIT_BOUNDS_HPP_
