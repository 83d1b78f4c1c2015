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

#include "dpaudit/outlier.hpp"

#include <algorithm>
#include <cmath>

#include "dpaudit/errors.hpp"
#include "dpaudit/version.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

using internal::json;

// Reachability floor keeping lrd finite when a point has >= k exact
// duplicates (k-distance 0).
constexpr double kReachFloor = 1e-12;

size_t farthest_count(double top_fraction, size_t n) {
  // ceil with a tolerance so exact products like 0.01 * 200 do not round up
  // through floating error.
  double raw = top_fraction * static_cast<double>(n);
  auto count = static_cast<size_t>(std::ceil(raw - 1e-9));
  if (count < 1) count = 1;
  if (count > n) count = n;
  return count;
}

}  // namespace

std::vector<std::string> centroid_farthest(const EmbeddingMatrix& m,
                                           double top_fraction) {
  if (m.rows() < 2) throw DomainError("centroid_farthest requires N >= 2");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw DomainError("top_fraction must lie in (0, 1]");
  }
  std::vector<double> c = centroid(m);
  std::vector<std::pair<double, std::string>> ranked(m.rows());
  for (size_t i = 0; i < m.rows(); ++i) {
    ranked[i] = {distance_to_point(m, i, c), m.ids()[i]};
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  size_t count = farthest_count(top_fraction, m.rows());
  std::vector<std::string> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(ranked[i].second);
  return out;
}

std::map<std::string, double> lof_scores(const EmbeddingMatrix& m, int k) {
  const size_t n = m.rows();
  if (k < 1) throw DomainError("lof_scores requires k >= 1");
  if (static_cast<size_t>(k) >= n) {
    throw DomainError("lof_scores requires k < N (k=" + std::to_string(k) +
                      ", N=" + std::to_string(n) + ")");
  }

  // k-distance and the (possibly tie-extended) neighborhood of each point,
  // with the neighbor distances kept alongside. Rows are streamed rather
  // than stored, so memory stays O(N * k) instead of O(N^2).
  struct Neighbor {
    size_t index;
    double distance;
  };
  std::vector<double> kdist(n);
  std::vector<std::vector<Neighbor>> neighbors(n);
  internal::parallel_for(n, [&](size_t a) {
    std::vector<double> row(n);
    for (size_t b = 0; b < n; ++b) {
      row[b] = b == a ? 0.0 : pairwise_distance(m, a, b);
    }
    std::vector<double> ds;
    ds.reserve(n - 1);
    for (size_t b = 0; b < n; ++b) {
      if (b != a) ds.push_back(row[b]);
    }
    std::nth_element(ds.begin(), ds.begin() + (k - 1), ds.end());
    kdist[a] = ds[k - 1];
    for (size_t b = 0; b < n; ++b) {
      if (b != a && row[b] <= kdist[a]) neighbors[a].push_back({b, row[b]});
    }
  });

  std::vector<double> lrd(n);
  internal::parallel_for(n, [&](size_t a) {
    double sum = 0.0;
    for (const Neighbor& nb : neighbors[a]) {
      double reach = std::max(kdist[nb.index], nb.distance);
      sum += std::max(reach, kReachFloor);
    }
    lrd[a] = static_cast<double>(neighbors[a].size()) / sum;
  });

  std::map<std::string, double> out;
  for (size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    for (const Neighbor& nb : neighbors[a]) sum += lrd[nb.index] / lrd[a];
    out[m.ids()[a]] = sum / static_cast<double>(neighbors[a].size());
  }
  return out;
}

OutlierReport detect_outliers(const EmbeddingMatrix& m,
                              const OutlierParams& params) {
  OutlierReport report;
  report.params = params;
  report.metric = metric_name(m.metric());

  std::vector<std::string> far = centroid_farthest(m, params.top_fraction);
  std::map<std::string, double> lof = lof_scores(m, params.k);

  std::vector<double> c = centroid(m);
  for (size_t i = 0; i < m.rows(); ++i) {
    const std::string& id = m.ids()[i];
    report.scores[id] = {distance_to_point(m, i, c), lof.at(id)};
  }

  std::set<std::string> targets(far.begin(), far.end());
  for (const auto& [id, score] : lof) {
    if (score > params.lof_threshold) targets.insert(id);
  }
  report.target_ids.assign(targets.begin(), targets.end());
  return report;
}

void save_outlier_report(const OutlierReport& report, const std::string& path,
                         const std::map<std::string, std::string>& config) {
  json j;
  if (!config.empty()) j["config"] = config;
  j["format_version"] = kFormatVersion;
  j["targets"] = report.target_ids;
  json scores = json::object();
  for (const auto& [id, s] : report.scores) {
    scores[id] = {{"centroid_distance", s.centroid_distance}, {"lof", s.lof}};
  }
  j["scores"] = std::move(scores);
  j["params"] = {{"top_fraction", report.params.top_fraction},
                 {"k", report.params.k},
                 {"lof_threshold", report.params.lof_threshold},
                 {"metric", report.metric},
                 {"combination", report.combination}};
  internal::write_text_file(path, j.dump(2) + "\n");
}

OutlierReport load_outlier_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("targets") ||
      !j.contains("scores") || !j.contains("params")) {
    throw ValidationError("'" + path + "' is not an outlier report");
  }
  OutlierReport report;
  for (const auto& t : j["targets"]) {
    report.target_ids.push_back(t.get<std::string>());
  }
  for (const auto& [id, s] : j["scores"].items()) {
    report.scores[id] = {s["centroid_distance"].get<double>(),
                         s["lof"].get<double>()};
  }
  const json& p = j["params"];
  report.params.top_fraction = p["top_fraction"].get<double>();
  report.params.k = p["k"].get<int>();
  report.params.lof_threshold = p["lof_threshold"].get<double>();
  report.metric = p.value("metric", "cosine");
  report.combination = p.value("combination", "union");
  return report;
}

}  // namespace dpaudit
