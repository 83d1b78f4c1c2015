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

#ifndef DPAUDIT_QUALITY_HPP_
#define DPAUDIT_QUALITY_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/corpus.hpp"

namespace dpaudit {

// |unique token n-grams| / |total token n-grams| pooled over the corpus.
double distinct_n(const Corpus& corpus, int n);

// Mean BLEU-4 of each record against up to max_refs sampled other records
// (add-1 smoothed modified precisions, standard brevity penalty). Reference
// sampling is keyed by record id, so the value is invariant to corpus order
// for a fixed seed.
double self_bleu(const Corpus& corpus, int max_refs = 100, uint64_t seed = 42);

// Least-squares fit of ln(frequency) against ln(rank) over the top_k most
// frequent tokens. Returns (slope, r^2); a flat frequency profile reports
// (0, 0). Requires >= 10 distinct tokens.
std::pair<double, double> zipf_fit(const Corpus& corpus, int top_k = 5000);

// Token-count mean and population standard deviation.
std::pair<double, double> length_stats(const Corpus& corpus);

struct ScoreAggregate {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  uint64_t count = 0;
};

// Aggregates an external per-sample score file ({"id": str, "score": float}
// per line). Ids absent from the corpus are reported through `warnings`.
ScoreAggregate ingest_scores(const std::string& path, const Corpus& corpus,
                             std::vector<std::string>* warnings = nullptr);

// Raw id -> score map from the same file format, for filter_by_score.
std::map<std::string, double> load_score_map(const std::string& path);

struct FilterMode {
  enum Kind { kThreshold, kTopFraction };
  Kind kind = kThreshold;
  double value = 0.0;

  static FilterMode threshold(double t) { return {kThreshold, t}; }
  static FilterMode top_fraction(double f) { return {kTopFraction, f}; }
};

// Keeps records with score >= t, or the ceil(f*N) best by score (ties by
// id). Corpus order is preserved; every record must be scored.
Corpus filter_by_score(const Corpus& corpus,
                       const std::map<std::string, double>& scores,
                       const FilterMode& mode);

struct UtilityTriple {
  double f1_syn = 0.0;
  double f1_real = 0.0;
  double f1_random = 0.0;
  double f1_majority = 0.0;
};

// (f1_syn - b) / (f1_real - b) with b = max(random, majority); negative when
// synthetic data lands below the naive baselines. Requires f1_real > b.
double relative_improvement(const UtilityTriple& u);

}  // namespace dpaudit

#endif  // DPAUDIT_QUALITY_HPP_
