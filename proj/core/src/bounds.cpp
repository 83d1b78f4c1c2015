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

#include "dpaudit/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpaudit/attack.hpp"
#include "dpaudit/errors.hpp"

namespace dpaudit {

void DpBudget::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be finite and >= 0");
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in [0, 1)");
  }
}

double tpr_bound(const DpBudget& budget, double fpr) {
  budget.validate();
  fpr = std::clamp(fpr, 0.0, 1.0);
  double up = budget.delta + std::exp(budget.epsilon) * fpr;
  // 1 - e^-eps * (1 - delta - fpr), expanded through expm1 so the epsilon=0
  // budget yields exactly delta + fpr with no cancellation.
  double low = -std::expm1(-budget.epsilon) +
               std::exp(-budget.epsilon) * (budget.delta + fpr);
  double bound = std::min({1.0, up, low});
  return std::clamp(bound, 0.0, 1.0);
}

double empirical_epsilon(double fpr, double tpr, double delta) {
  constexpr double kUnbounded = std::numeric_limits<double>::infinity();
  tpr = std::clamp(tpr, 0.0, 1.0);
  // Boundary conventions: fpr == 0 pins the first constraint (unbounded as
  // soon as tpr exceeds delta); fpr == 1 pins nothing.
  if (fpr <= 0.0) return tpr > delta ? kUnbounded : 0.0;
  if (fpr >= 1.0) return 0.0;

  double eps = 0.0;
  double num1 = tpr - delta;
  if (num1 > 0.0) eps = std::max(eps, std::log(num1 / fpr));
  double num2 = 1.0 - delta - fpr;
  double den2 = 1.0 - tpr;
  if (num2 > 0.0) {
    if (den2 <= 0.0) return kUnbounded;
    eps = std::max(eps, std::log(num2 / den2));
  }
  return eps;
}

std::string violation_statistic_name(ViolationStatistic s) {
  return s == ViolationStatistic::kLowerCi ? "lower_ci" : "mean";
}

ViolationStatistic parse_violation_statistic(const std::string& name) {
  if (name == "lower_ci") return ViolationStatistic::kLowerCi;
  if (name == "mean") return ViolationStatistic::kMean;
  throw ValidationError("unknown violation statistic '" + name + "'");
}

ViolationReport check_violation(const RocResult& roc, const DpBudget& budget,
                                ViolationStatistic statistic) {
  budget.validate();
  if (roc.grid.empty() || roc.grid.size() != roc.tpr_mean.size() ||
      roc.grid.size() != roc.tpr_lo.size()) {
    throw ValidationError("ROC result grid/band sizes are inconsistent");
  }

  ViolationReport report;
  report.budget = budget;
  report.statistic = statistic;
  report.worst_gap = -std::numeric_limits<double>::infinity();
  report.points.reserve(roc.grid.size());
  for (size_t i = 0; i < roc.grid.size(); ++i) {
    double fpr = roc.grid[i];
    double observed = statistic == ViolationStatistic::kLowerCi
                          ? roc.tpr_lo[i]
                          : roc.tpr_mean[i];
    double bound = tpr_bound(budget, fpr);
    double gap = observed - bound;
    report.worst_gap = std::max(report.worst_gap, gap);
    if (gap > 0.0) report.violated = true;
    report.points.push_back(
        {fpr, observed, bound, empirical_epsilon(fpr, observed, budget.delta)});
  }
  return report;
}

}  // namespace dpaudit
