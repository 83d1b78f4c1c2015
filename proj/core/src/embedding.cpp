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

#include "dpaudit/embedding.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "dpaudit/errors.hpp"
#include "dpaudit/rng.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

using internal::json;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw DomainError("cosine distance undefined for zero-norm vector");
  }
  double d = 1.0 - dot(a, b) / (na * nb);
  return d < 0.0 ? 0.0 : d;
}

}  // namespace

std::string metric_name(Metric m) {
  return m == Metric::kCosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids,
                                 std::vector<double> data, size_t cols,
                                 Metric metric)
    : ids_(std::move(ids)), data_(std::move(data)), cols_(cols), metric_(metric) {
  if (cols_ < 1) throw ValidationError("embedding dimension must be >= 1");
  if (data_.size() != ids_.size() * cols_) {
    throw ValidationError("embedding data size does not match ids x dim");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw ValidationError("embedding contains NaN or Inf");
    }
  }
}

EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus,
                                Metric metric,
                                std::vector<std::string>* warnings) {
  std::unordered_map<std::string, std::vector<double>> by_id;
  size_t dim = 0;
  internal::for_each_jsonl_line(path, [&](size_t line_no, const json& j) {
    const auto line_error = [&](const std::string& what) {
      throw ValidationError(what + " (line " + std::to_string(line_no) + " of '" +
                            path + "')");
    };
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("vector") || !j["vector"].is_array()) {
      line_error("expected {\"id\": str, \"vector\": [float]}");
    }
    std::string id = j["id"].get<std::string>();
    std::vector<double> vec;
    vec.reserve(j["vector"].size());
    for (const auto& v : j["vector"]) {
      if (!v.is_number()) line_error("non-numeric vector entry for id '" + id + "'");
      double x = v.get<double>();
      if (!std::isfinite(x)) {
        line_error("NaN or Inf vector entry for id '" + id + "'");
      }
      vec.push_back(x);
    }
    if (vec.empty()) line_error("empty vector for id '" + id + "'");
    if (dim == 0) {
      dim = vec.size();
    } else if (vec.size() != dim) {
      line_error("vector for id '" + id + "' has dimension " +
                 std::to_string(vec.size()) + ", expected " + std::to_string(dim));
    }
    if (!corpus.contains(id)) {
      if (warnings) warnings->push_back("embedding for unknown id '" + id + "' skipped");
      return;
    }
    if (!by_id.emplace(std::move(id), std::move(vec)).second) {
      line_error("duplicate embedding for an id");
    }
  });

  std::vector<std::string> missing;
  for (const Record& r : corpus.records) {
    if (!by_id.count(r.id)) missing.push_back(r.id);
  }
  if (!missing.empty()) {
    std::string msg = "embeddings missing for " + std::to_string(missing.size()) +
                      " corpus id(s):";
    size_t shown = std::min<size_t>(missing.size(), 10);
    for (size_t i = 0; i < shown; ++i) msg += " '" + missing[i] + "'";
    if (missing.size() > shown) msg += " ...";
    throw ValidationError(msg);
  }

  std::vector<std::string> ids;
  std::vector<double> data;
  ids.reserve(corpus.size());
  data.reserve(corpus.size() * dim);
  for (const Record& r : corpus.records) {
    ids.push_back(r.id);
    const auto& vec = by_id.at(r.id);
    data.insert(data.end(), vec.begin(), vec.end());
  }
  return EmbeddingMatrix(std::move(ids), std::move(data), dim, metric);
}

EmbeddingMatrix hash_embed(const Corpus& corpus, size_t dim, int ngram_lo,
                           int ngram_hi, Metric metric) {
  if (dim < 8) throw DomainError("hash_embed requires dim >= 8");
  if (ngram_lo < 1 || ngram_lo > ngram_hi || ngram_hi > 3) {
    throw DomainError("hash_embed requires 1 <= lo <= hi <= 3");
  }

  // First pass: document frequencies per n-gram string.
  std::vector<TokenSeq> token_cache(corpus.size());
  std::unordered_map<std::string, uint64_t> doc_freq;
  const auto for_each_ngram = [&](const TokenSeq& toks,
                                  const std::function<void(const std::string&)>& fn) {
    for (int n = ngram_lo; n <= ngram_hi; ++n) {
      if (toks.size() < static_cast<size_t>(n)) continue;
      for (size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key = std::to_string(n);
        for (int k = 0; k < n; ++k) {
          key += '\x1f';
          key += toks[i + k];
        }
        fn(key);
      }
    }
  };

  for (size_t r = 0; r < corpus.size(); ++r) {
    token_cache[r] = tokenize(corpus.records[r].text);
    if (token_cache[r].empty()) {
      throw DomainError("record '" + corpus.records[r].id +
                        "' tokenizes to nothing; cannot embed");
    }
    std::unordered_set<std::string> seen;
    for_each_ngram(token_cache[r],
                   [&](const std::string& key) { seen.insert(key); });
    for (const auto& key : seen) ++doc_freq[key];
  }

  const double n_docs = static_cast<double>(corpus.size());
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  std::vector<double> data(corpus.size() * dim, 0.0);
  for (size_t r = 0; r < corpus.size(); ++r) {
    ids.push_back(corpus.records[r].id);
    std::unordered_map<std::string, uint64_t> tf;
    for_each_ngram(token_cache[r], [&](const std::string& key) { ++tf[key]; });
    double* row = data.data() + r * dim;
    for (const auto& [key, count] : tf) {
      uint64_t h = fnv1a64(key);
      size_t index = static_cast<size_t>(h % dim);
      double sign = (h >> 63) ? 1.0 : -1.0;
      double idf =
          std::log((1.0 + n_docs) / (1.0 + static_cast<double>(doc_freq.at(key)))) +
          1.0;
      row[index] += sign * static_cast<double>(count) * idf;
    }
    double n = norm({row, dim});
    if (n == 0.0) {
      throw DomainError("record '" + corpus.records[r].id +
                        "' hashed to a zero vector");
    }
    for (size_t k = 0; k < dim; ++k) row[k] /= n;
  }
  return EmbeddingMatrix(std::move(ids), std::move(data), dim, metric);
}

double pairwise_distance(const EmbeddingMatrix& m, size_t i, size_t j) {
  if (i >= m.rows() || j >= m.rows()) {
    throw DomainError("row index out of range");
  }
  if (i == j) return 0.0;
  std::span<const double> a = m.row(i);
  std::span<const double> b = m.row(j);
  if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0) {
    return 0.0;
  }
  return m.metric() == Metric::kCosine ? cosine_distance(a, b) : euclidean(a, b);
}

double distance_to_point(const EmbeddingMatrix& m, size_t i,
                         std::span<const double> point) {
  if (i >= m.rows()) throw DomainError("row index out of range");
  if (point.size() != m.cols()) throw DomainError("point dimension mismatch");
  return m.metric() == Metric::kCosine ? cosine_distance(m.row(i), point)
                                       : euclidean(m.row(i), point);
}

std::vector<double> centroid(const EmbeddingMatrix& m) {
  if (m.rows() == 0) throw DomainError("centroid of an empty matrix");
  std::vector<double> c(m.cols(), 0.0);
  for (size_t i = 0; i < m.rows(); ++i) {
    std::span<const double> r = m.row(i);
    for (size_t k = 0; k < m.cols(); ++k) c[k] += r[k];
  }
  for (double& v : c) v /= static_cast<double>(m.rows());
  return c;
}

}  // namespace dpaudit
