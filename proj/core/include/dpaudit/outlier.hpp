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

#ifndef DPAUDIT_OUTLIER_HPP_
#define DPAUDIT_OUTLIER_HPP_

#include <map>
#include <string>
#include <vector>

#include "dpaudit/embedding.hpp"

namespace dpaudit {

struct OutlierScore {
  double centroid_distance = 0.0;
  double lof = 0.0;
};

struct OutlierParams {
  double top_fraction = 0.01;
  int k = 20;
  double lof_threshold = 1.5;
};

// Attack-target selection result. target_ids is the union of the two
// criteria (flagged in `combination`), sorted lexicographically; scores cover
// every row of the input matrix.
struct OutlierReport {
  std::vector<std::string> target_ids;
  std::map<std::string, OutlierScore> scores;
  OutlierParams params;
  std::string metric;
  std::string combination = "union";
};

// Ids of the ceil(top_fraction * N) rows farthest from the centroid, ties
// broken by id. Requires N >= 2.
std::vector<std::string> centroid_farthest(const EmbeddingMatrix& m,
                                           double top_fraction);

// Exact Local Outlier Factor per row: k-distance, reachability distance,
// local reachability density, LOF ratio. Requires 1 <= k < N. Reachability
// distances are floored at 1e-12 so exact duplicate points stay finite.
std::map<std::string, double> lof_scores(const EmbeddingMatrix& m, int k);

OutlierReport detect_outliers(const EmbeddingMatrix& m,
                              const OutlierParams& params = {});

void save_outlier_report(
    const OutlierReport& report, const std::string& path,
    const std::map<std::string, std::string>& config = {});
OutlierReport load_outlier_report(const std::string& path);

}  // namespace dpaudit

#endif  // DPAUDIT_OUTLIER_HPP_
