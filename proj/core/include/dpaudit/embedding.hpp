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

#ifndef DPAUDIT_EMBEDDING_HPP_
#define DPAUDIT_EMBEDDING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpaudit/corpus.hpp"

namespace dpaudit {

enum class Metric { kCosine, kEuclidean };

std::string metric_name(Metric m);
Metric parse_metric(std::string_view name);

// Row-major N x d matrix of per-record vectors, aligned to the corpus the
// ids came from. Immutable after construction; rows contain no NaN/Inf.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::vector<std::string> ids, std::vector<double> data,
                  size_t cols, Metric metric);

  size_t rows() const { return ids_.size(); }
  size_t cols() const { return cols_; }
  Metric metric() const { return metric_; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::span<const double> row(size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> data_;
  size_t cols_;
  Metric metric_;
};

// Ingests {"id": str, "vector": [float]} lines produced by an external
// encoder, aligned to corpus order. Every corpus id must appear exactly once;
// unknown ids are skipped with a warning.
EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus,
                                Metric metric = Metric::kCosine,
                                std::vector<std::string>* warnings = nullptr);

// Deterministic fallback embedder: hashed token-n-gram TF-IDF with signed
// feature hashing, L2-normalized rows. Byte-identical output for fixed
// (corpus, dim, ngram range) on any platform.
EmbeddingMatrix hash_embed(const Corpus& corpus, size_t dim = 256,
                           int ngram_lo = 1, int ngram_hi = 2,
                           Metric metric = Metric::kCosine);

// Cosine distance 1 - cos(v_i, v_j) or euclidean distance, per the matrix
// metric. Exactly symmetric; distance(i, i) == 0.
double pairwise_distance(const EmbeddingMatrix& m, size_t i, size_t j);

// Distance from row i to an arbitrary point under the matrix metric.
double distance_to_point(const EmbeddingMatrix& m, size_t i,
                         std::span<const double> point);

// Arithmetic mean of rows.
std::vector<double> centroid(const EmbeddingMatrix& m);

}  // namespace dpaudit

#endif  // DPAUDIT_EMBEDDING_HPP_
