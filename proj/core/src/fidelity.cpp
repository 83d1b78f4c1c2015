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

#include "dpaudit/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dpaudit/errors.hpp"
#include "dpaudit/rng.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

using internal::json;

double sq_euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// Pooled row view over the two matrices (real rows first).
struct Pooled {
  const EmbeddingMatrix* real;
  const EmbeddingMatrix* syn;

  size_t rows() const { return real->rows() + syn->rows(); }
  size_t cols() const { return real->cols(); }
  std::span<const double> row(size_t i) const {
    return i < real->rows() ? real->row(i) : syn->row(i - real->rows());
  }
};

std::vector<double> smoothed_histogram(const std::vector<uint64_t>& counts,
                                       double add) {
  double total = 0.0;
  for (uint64_t c : counts) total += static_cast<double>(c);
  double denom = total + add * static_cast<double>(counts.size());
  std::vector<double> probs(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    probs[i] = (static_cast<double>(counts[i]) + add) / denom;
  }
  return probs;
}

double divergence(std::span<const double> p, std::span<const double> q,
                  DivergenceKind kind) {
  return kind == DivergenceKind::kKl ? kl_divergence(p, q) : js_divergence(p, q);
}

}  // namespace

void CategoricalDist::validate() const {
  if (categories.size() != probs.size()) {
    throw ValidationError("categorical distribution categories/probs mismatch");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ValidationError("negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("probabilities sum to " + internal::format_double(sum) +
                          ", expected 1");
  }
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("KL divergence requires aligned supports");
  }
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // KL is non-negative; any negative accumulation is rounding noise.
  return kl < 0.0 ? 0.0 : kl;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("JS divergence requires aligned supports");
  }
  std::vector<double> m(p.size());
  for (size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m);
}

std::pair<CategoricalDist, CategoricalDist> kmeans_quantize(
    const EmbeddingMatrix& real_emb, const EmbeddingMatrix& syn_emb, int k,
    uint64_t seed, int max_iters, double tol) {
  if (real_emb.rows() == 0 || syn_emb.rows() == 0) {
    throw DomainError("kmeans_quantize requires non-empty matrices");
  }
  if (real_emb.cols() != syn_emb.cols()) {
    throw ValidationError("real/synthetic embedding dimensions differ");
  }
  Pooled pool{&real_emb, &syn_emb};
  const size_t n = pool.rows();
  const size_t d = pool.cols();
  if (k < 2) throw DomainError("kmeans_quantize requires k >= 2");
  if (static_cast<size_t>(k) > n) {
    throw DomainError("kmeans_quantize requires k <= N_real + N_syn");
  }

  // k-means++ seeding.
  Rng rng(mix_seed(seed, "kmeans"));
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  {
    size_t first = static_cast<size_t>(rng.bounded(n));
    centers.emplace_back(pool.row(first).begin(), pool.row(first).end());
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& center : centers) {
          best = std::min(best, sq_euclidean(pool.row(i), center));
        }
        d2[i] = best;
        total += best;
      }
      size_t pick = 0;
      if (total > 0.0) {
        double u = rng.next_double() * total;
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc >= u) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<size_t>(rng.bounded(n));
      }
      centers.emplace_back(pool.row(pick).begin(), pool.row(pick).end());
    }
  }

  std::vector<int> assignment(n, -1);
  std::vector<double> dist_to_center(n, 0.0);
  double prev_objective = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        double dd = sq_euclidean(pool.row(i), centers[c]);
        if (dd < best) {
          best = dd;
          best_c = c;
        }
      }
      if (assignment[i] != best_c) {
        assignment[i] = best_c;
        changed = true;
      }
      dist_to_center[i] = best;
      objective += best;
    }
    if (objective > prev_objective * (1.0 + 1e-12) + 1e-12) {
      throw std::logic_error("k-means objective increased across iterations");
    }
    bool converged = !changed || (prev_objective - objective) <=
                                     tol * std::max(prev_objective, 1e-300);
    prev_objective = objective;
    if (converged) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      std::span<const double> row = pool.row(i);
      int c = assignment[i];
      ++counts[c];
      for (size_t kk = 0; kk < d; ++kk) sums[c][kk] += row[kk];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its center.
        size_t far = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
          if (dist_to_center[i] > far_d) {
            far_d = dist_to_center[i];
            far = i;
          }
        }
        centers[c].assign(pool.row(far).begin(), pool.row(far).end());
        dist_to_center[far] = 0.0;
        continue;
      }
      for (size_t kk = 0; kk < d; ++kk) {
        centers[c][kk] = sums[c][kk] / static_cast<double>(counts[c]);
      }
    }
  }

  std::vector<uint64_t> real_counts(k, 0);
  std::vector<uint64_t> syn_counts(k, 0);
  for (size_t i = 0; i < n; ++i) {
    if (i < real_emb.rows()) {
      ++real_counts[assignment[i]];
    } else {
      ++syn_counts[assignment[i]];
    }
  }

  CategoricalDist p;
  CategoricalDist q;
  for (int c = 0; c < k; ++c) p.categories.push_back(std::to_string(c));
  q.categories = p.categories;
  double add = 1.0 / static_cast<double>(k);
  p.probs = smoothed_histogram(real_counts, add);
  q.probs = smoothed_histogram(syn_counts, add);
  return {std::move(p), std::move(q)};
}

double mauve(const CategoricalDist& p, const CategoricalDist& q, double c,
             int lambdas) {
  p.validate();
  q.validate();
  if (p.categories != q.categories) {
    throw ValidationError("MAUVE requires aligned categories");
  }
  if (!(c > 0.0)) throw DomainError("MAUVE scaling constant must be > 0");
  if (lambdas < 1) throw DomainError("MAUVE requires at least one lambda");

  struct Pt {
    double x, y;
  };
  std::vector<Pt> pts;
  pts.reserve(static_cast<size_t>(lambdas) + 2);
  pts.push_back({0.0, 1.0});
  pts.push_back({1.0, 0.0});
  std::vector<double> r(p.probs.size());
  for (int i = 1; i <= lambdas; ++i) {
    double lambda = static_cast<double>(i) / (lambdas + 1);
    for (size_t j = 0; j < r.size(); ++j) {
      r[j] = lambda * p.probs[j] + (1.0 - lambda) * q.probs[j];
    }
    double klq = kl_divergence(q.probs, r);
    double klp = kl_divergence(p.probs, r);
    pts.push_back({std::exp(-c * klq), std::exp(-c * klp)});
  }
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y > b.y;
  });
  double area = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    area += (pts[i + 1].x - pts[i].x) * (pts[i].y + pts[i + 1].y) * 0.5;
  }
  return std::clamp(area, 0.0, 1.0);
}

EntityCounts load_entities(const std::string& path) {
  EntityCounts out;
  internal::for_each_jsonl_line(path, [&](size_t line_no, const json& j) {
    const auto line_error = [&](const std::string& what) {
      throw ValidationError(what + " (line " + std::to_string(line_no) + " of '" +
                            path + "')");
    };
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("entities") || !j["entities"].is_array()) {
      line_error("expected {\"id\": str, \"entities\": [{\"type\": str}]}");
    }
    std::string id = j["id"].get<std::string>();
    auto& counts = out[id];
    for (const auto& e : j["entities"]) {
      if (!e.is_object() || !e.contains("type") || !e["type"].is_string()) {
        line_error("entity entries must be objects with a string 'type'");
      }
      ++counts[e["type"].get<std::string>()];
    }
  });
  if (out.empty()) throw DomainError("entity file '" + path + "' is empty");
  return out;
}

double entity_divergence(const EntityCounts& real_entities,
                         const EntityCounts& syn_entities, double alpha,
                         DivergenceKind kind) {
  if (real_entities.empty() || syn_entities.empty()) {
    throw DomainError("entity_divergence requires non-empty tag maps");
  }
  std::set<std::string> types;
  std::map<std::string, uint64_t> real_pooled;
  std::map<std::string, uint64_t> syn_pooled;
  for (const auto& [id, counts] : real_entities) {
    for (const auto& [type, c] : counts) {
      types.insert(type);
      real_pooled[type] += c;
    }
  }
  for (const auto& [id, counts] : syn_entities) {
    for (const auto& [type, c] : counts) {
      types.insert(type);
      syn_pooled[type] += c;
    }
  }
  if (types.empty()) {
    throw DomainError("no entities on either side; nothing to compare");
  }

  std::vector<uint64_t> real_counts;
  std::vector<uint64_t> syn_counts;
  real_counts.reserve(types.size());
  syn_counts.reserve(types.size());
  for (const std::string& t : types) {
    auto rit = real_pooled.find(t);
    auto sit = syn_pooled.find(t);
    real_counts.push_back(rit == real_pooled.end() ? 0 : rit->second);
    syn_counts.push_back(sit == syn_pooled.end() ? 0 : sit->second);
  }
  std::vector<double> p = smoothed_histogram(real_counts, alpha);
  std::vector<double> q = smoothed_histogram(syn_counts, alpha);
  return divergence(p, q, kind);
}

double length_divergence(const Corpus& real, const Corpus& syn, int bins,
                         DivergenceKind kind) {
  if (real.empty() || syn.empty()) {
    throw DomainError("length_divergence requires non-empty corpora");
  }
  if (bins < 1) throw DomainError("bins must be >= 1");

  const auto lengths = [](const Corpus& c) {
    std::vector<double> out;
    out.reserve(c.size());
    for (const Record& r : c.records) {
      out.push_back(static_cast<double>(tokenize(r.text).size()));
    }
    return out;
  };
  std::vector<double> rl = lengths(real);
  std::vector<double> sl = lengths(syn);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : rl) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : sl) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  const auto histogram = [&](const std::vector<double>& values) {
    std::vector<uint64_t> counts(bins, 0);
    double width = (hi - lo) / bins;
    for (double v : values) {
      int b = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
      b = std::clamp(b, 0, bins - 1);
      ++counts[b];
    }
    return counts;
  };
  std::vector<double> p = smoothed_histogram(histogram(rl), 0.5);
  std::vector<double> q = smoothed_histogram(histogram(sl), 0.5);
  return divergence(p, q, kind);
}

int default_mauve_clusters(size_t n_real, size_t n_syn) {
  auto k = static_cast<int>((n_real + n_syn) / 10);
  return std::clamp(k, 2, 500);
}

}  // namespace dpaudit
