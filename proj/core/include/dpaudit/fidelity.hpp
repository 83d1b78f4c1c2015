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

#ifndef DPAUDIT_FIDELITY_HPP_
#define DPAUDIT_FIDELITY_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/corpus.hpp"
#include "dpaudit/embedding.hpp"

namespace dpaudit {

struct CategoricalDist {
  std::vector<std::string> categories;
  std::vector<double> probs;  // non-negative, sums to 1

  void validate() const;
};

enum class DivergenceKind { kKl, kJs };

// KL(p || q) over aligned supports; 0 log 0 contributes nothing, p > 0 with
// q == 0 is +infinity.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Jensen-Shannon divergence (natural log base).
double js_divergence(std::span<const double> p, std::span<const double> q);

// k-means++ / Lloyd quantization of the pooled real+synthetic rows; returns
// the two cluster-assignment histograms with add-1/k smoothing. Deterministic
// given the seed; the Lloyd objective is checked to be non-increasing.
std::pair<CategoricalDist, CategoricalDist> kmeans_quantize(
    const EmbeddingMatrix& real_emb, const EmbeddingMatrix& syn_emb, int k,
    uint64_t seed, int max_iters = 300, double tol = 1e-6);

// Area under the divergence frontier: for each interior lambda, the mixture
// r = lambda*p + (1-lambda)*q contributes the point
// (exp(-c*KL(q||r)), exp(-c*KL(p||r))); endpoints (0,1) and (1,0) are
// appended and the monotone-sorted curve is integrated by trapezoid.
// 1.0 iff p == q; symmetric in (p, q).
double mauve(const CategoricalDist& p, const CategoricalDist& q, double c = 5.0,
             int lambdas = 99);

// Per-record entity-type multisets, as ingested from entities.jsonl
// ({"id": str, "entities": [{"type": str}]}).
using EntityCounts = std::map<std::string, std::map<std::string, uint64_t>>;

EntityCounts load_entities(const std::string& path);

// KL(real || synthetic) between pooled entity-type distributions with
// add-alpha smoothing over the union of types.
double entity_divergence(const EntityCounts& real_entities,
                         const EntityCounts& syn_entities, double alpha = 0.5,
                         DivergenceKind kind = DivergenceKind::kKl);

// KL(real || synthetic) between token-length histograms over equal-width
// bins spanning the pooled range, add-0.5 smoothing.
double length_divergence(const Corpus& real, const Corpus& syn, int bins = 20,
                         DivergenceKind kind = DivergenceKind::kKl);

// Default cluster count for MAUVE quantization: min(500, (N_real+N_syn)/10),
// clamped to at least 2.
int default_mauve_clusters(size_t n_real, size_t n_syn);

}  // namespace dpaudit

#endif  // DPAUDIT_FIDELITY_HPP_
