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

#include "dpaudit/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "dpaudit/errors.hpp"

namespace dpaudit {
namespace {

// OOV query tokens get id 0; reference tokens start at 1 and document
// sentinels are negative, so an OOV token can never match anything.
constexpr int32_t kOovId = 0;

// Average ranks with ties shared.
std::vector<double> average_ranks(std::span<const double> v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

void MatchIndex::build_suffix_array() {
  const size_t n = stream_.size();
  suffix_.resize(n);
  std::iota(suffix_.begin(), suffix_.end(), 0);
  if (n == 0) return;

  // Dense initial ranks via sorted unique values.
  std::vector<int32_t> sorted_vals(stream_);
  std::sort(sorted_vals.begin(), sorted_vals.end());
  sorted_vals.erase(std::unique(sorted_vals.begin(), sorted_vals.end()),
                    sorted_vals.end());
  std::vector<int32_t> rank(n);
  for (size_t i = 0; i < n; ++i) {
    rank[i] = static_cast<int32_t>(
        std::lower_bound(sorted_vals.begin(), sorted_vals.end(), stream_[i]) -
        sorted_vals.begin());
  }

  // Prefix doubling with two counting-sort passes per round: O(T log T).
  std::vector<int32_t> tmp(n);
  std::vector<int32_t> sa2(n);
  std::vector<size_t> bucket;
  for (size_t h = 1;; h *= 2) {
    const auto second_rank = [&](int32_t pos) -> int32_t {
      size_t p = static_cast<size_t>(pos) + h;
      return p < n ? rank[p] + 1 : 0;  // shorter suffix sorts first
    };
    int32_t max_rank = 0;
    for (size_t i = 0; i < n; ++i) max_rank = std::max(max_rank, rank[i]);
    size_t buckets = static_cast<size_t>(max_rank) + 2;

    // Sort by second key.
    bucket.assign(buckets, 0);
    for (size_t i = 0; i < n; ++i) {
      ++bucket[static_cast<size_t>(second_rank(static_cast<int32_t>(i)))];
    }
    for (size_t i = 1; i < buckets; ++i) bucket[i] += bucket[i - 1];
    for (size_t i = n; i-- > 0;) {
      int32_t pos = suffix_[i];
      sa2[--bucket[static_cast<size_t>(second_rank(pos))]] = pos;
    }
    // Stable sort by first key.
    bucket.assign(buckets, 0);
    for (size_t i = 0; i < n; ++i) ++bucket[static_cast<size_t>(rank[i]) + 1];
    for (size_t i = 1; i < buckets; ++i) bucket[i] += bucket[i - 1];
    for (size_t i = 0; i < n; ++i) {
      int32_t pos = sa2[i];
      suffix_[bucket[static_cast<size_t>(rank[static_cast<size_t>(pos)])]++] = pos;
    }

    // Re-rank.
    tmp[static_cast<size_t>(suffix_[0])] = 0;
    bool all_distinct = true;
    for (size_t i = 1; i < n; ++i) {
      size_t a = static_cast<size_t>(suffix_[i]);
      size_t b = static_cast<size_t>(suffix_[i - 1]);
      bool same = rank[a] == rank[b] && second_rank(suffix_[i]) ==
                                            second_rank(suffix_[i - 1]);
      tmp[a] = tmp[b] + (same ? 0 : 1);
      if (same) all_distinct = false;
    }
    rank.swap(tmp);
    if (all_distinct || h >= n) break;
  }
}

MatchIndex MatchIndex::build(const Corpus& reference) {
  if (reference.empty()) {
    throw DomainError("cannot index an empty reference corpus");
  }
  MatchIndex idx;
  int32_t next_sentinel = -1;
  for (const Record& r : reference.records) {
    for (const std::string& tok : tokenize(r.text)) {
      auto [it, inserted] = idx.vocab_.emplace(
          tok, static_cast<int32_t>(idx.vocab_.size()) + 1);
      idx.stream_.push_back(it->second);
    }
    idx.stream_.push_back(next_sentinel--);
  }
  idx.build_suffix_array();
  return idx;
}

MatchIndex MatchIndex::build_bytes(const Corpus& reference) {
  if (reference.empty()) {
    throw DomainError("cannot index an empty reference corpus");
  }
  MatchIndex idx;
  idx.byte_mode_ = true;
  int32_t next_sentinel = -1;
  for (const Record& r : reference.records) {
    for (unsigned char c : r.text) {
      idx.stream_.push_back(static_cast<int32_t>(c) + 1);
    }
    idx.stream_.push_back(next_sentinel--);
  }
  idx.build_suffix_array();
  return idx;
}

int MatchIndex::longest_match_ids(const std::vector<int32_t>& query) const {
  const size_t n = stream_.size();
  const auto lcp_at = [&](int32_t sa_pos, size_t q_start) {
    size_t s = static_cast<size_t>(sa_pos);
    size_t len = 0;
    while (s + len < n && q_start + len < query.size() &&
           stream_[s + len] == query[q_start + len]) {
      ++len;
    }
    return static_cast<int>(len);
  };

  int best = 0;
  for (size_t q = 0; q < query.size(); ++q) {
    if (query[q] == kOovId) continue;
    if (static_cast<int>(query.size() - q) <= best) break;
    // Lexicographic insertion point of the query suffix among reference
    // suffixes; the max-LCP suffix is one of its two neighbours.
    size_t lo = 0;
    size_t hi = n;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      size_t s = static_cast<size_t>(suffix_[mid]);
      bool less = false;
      for (size_t k = 0;; ++k) {
        if (q + k >= query.size()) {
          less = false;  // query suffix is a prefix: suffix >= query
          break;
        }
        if (s + k >= n) {
          less = true;  // reference suffix exhausted first
          break;
        }
        if (stream_[s + k] != query[q + k]) {
          less = stream_[s + k] < query[q + k];
          break;
        }
      }
      if (less) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo < n) best = std::max(best, lcp_at(suffix_[lo], q));
    if (lo > 0) best = std::max(best, lcp_at(suffix_[lo - 1], q));
  }
  return best;
}

int MatchIndex::longest_match(const TokenSeq& tokens) const {
  if (byte_mode_) {
    throw DomainError("token query against a byte-mode index");
  }
  std::vector<int32_t> query;
  query.reserve(tokens.size());
  for (const std::string& t : tokens) {
    auto it = vocab_.find(t);
    query.push_back(it == vocab_.end() ? kOovId : it->second);
  }
  return longest_match_ids(query);
}

int MatchIndex::longest_match(const Record& record) const {
  if (byte_mode_) {
    std::vector<int32_t> query;
    query.reserve(record.text.size());
    for (unsigned char c : record.text) {
      query.push_back(static_cast<int32_t>(c) + 1);
    }
    return longest_match_ids(query);
  }
  return longest_match(tokenize(record.text));
}

LeakageReport leakage_rate(const MatchIndex& index, const Corpus& corpus,
                           int threshold_tokens, bool token_weighted) {
  if (threshold_tokens < 1) throw DomainError("threshold must be >= 1");
  LeakageReport report;
  report.threshold_tokens = threshold_tokens;
  report.token_weighted = token_weighted;
  if (corpus.empty()) return report;

  uint64_t leaked_units = 0;
  uint64_t total_units = 0;
  for (const Record& r : corpus.records) {
    int match = index.longest_match(r);
    report.per_record[r.id] = match;
    uint64_t weight =
        token_weighted
            ? (index.byte_mode() ? r.text.size() : tokenize(r.text).size())
            : 1;
    total_units += weight;
    if (match >= threshold_tokens) leaked_units += weight;
  }
  report.leaked_fraction = total_units == 0
                               ? 0.0
                               : static_cast<double>(leaked_units) /
                                     static_cast<double>(total_units);
  return report;
}

std::pair<double, double> spearman(std::span<const double> x,
                                   std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("spearman requires |x| == |y|");
  const size_t n = x.size();
  if (n < 3) throw DomainError("spearman requires >= 3 observations");

  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = rx[i] - mx;
    double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DomainError("spearman undefined for a constant input vector");
  }
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);

  // Two-sided p via the t-approximation.
  double p;
  if (std::abs(rho) >= 1.0) {
    p = 0.0;
  } else {
    double t = rho * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - rho * rho));
    boost::math::students_t_distribution<double> dist(static_cast<double>(n) - 2.0);
    p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return {rho, p};
}

}  // namespace dpaudit
