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

#include "dpaudit/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "dpaudit/errors.hpp"
#include "dpaudit/rng.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

using internal::json;

std::string ngram_key(const TokenSeq& toks, size_t start, int n) {
  std::string key = toks[start];
  for (int k = 1; k < n; ++k) {
    key += '\x1f';
    key += toks[start + k];
  }
  return key;
}

// BLEU-4 with add-1 smoothed modified precisions and the standard brevity
// penalty (closest reference length, ties toward the shorter).
double bleu4(const TokenSeq& candidate, const std::vector<const TokenSeq*>& refs) {
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    std::unordered_map<std::string, uint64_t> cand_counts;
    uint64_t total = 0;
    if (candidate.size() >= static_cast<size_t>(n)) {
      for (size_t i = 0; i + n <= candidate.size(); ++i) {
        ++cand_counts[ngram_key(candidate, i, n)];
        ++total;
      }
    }
    std::unordered_map<std::string, uint64_t> max_ref_counts;
    for (const TokenSeq* ref : refs) {
      if (ref->size() < static_cast<size_t>(n)) continue;
      std::unordered_map<std::string, uint64_t> counts;
      for (size_t i = 0; i + n <= ref->size(); ++i) {
        ++counts[ngram_key(*ref, i, n)];
      }
      for (const auto& [key, c] : counts) {
        max_ref_counts[key] = std::max(max_ref_counts[key], c);
      }
    }
    uint64_t matched = 0;
    for (const auto& [key, c] : cand_counts) {
      auto it = max_ref_counts.find(key);
      if (it != max_ref_counts.end()) matched += std::min(c, it->second);
    }
    double precision = (static_cast<double>(matched) + 1.0) /
                       (static_cast<double>(total) + 1.0);
    log_sum += 0.25 * std::log(precision);
  }

  size_t c = candidate.size();
  size_t r = 0;
  long best = std::numeric_limits<long>::max();
  for (const TokenSeq* ref : refs) {
    long diff = std::labs(static_cast<long>(ref->size()) - static_cast<long>(c));
    if (diff < best || (diff == best && ref->size() < r)) {
      best = diff;
      r = ref->size();
    }
  }
  double bp = (c >= r || c == 0)
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

}  // namespace

double distinct_n(const Corpus& corpus, int n) {
  if (n < 1) throw DomainError("distinct_n requires n >= 1");
  std::unordered_set<std::string> unique;
  uint64_t total = 0;
  for (const Record& r : corpus.records) {
    TokenSeq toks = tokenize(r.text);
    if (toks.size() < static_cast<size_t>(n)) continue;
    for (size_t i = 0; i + n <= toks.size(); ++i) {
      unique.insert(ngram_key(toks, i, n));
      ++total;
    }
  }
  if (total == 0) {
    throw DomainError("no " + std::to_string(n) +
                      "-grams: every record is shorter than n tokens");
  }
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

double self_bleu(const Corpus& corpus, int max_refs, uint64_t seed) {
  if (corpus.size() < 2) throw DomainError("self_bleu requires >= 2 records");
  if (max_refs < 1) throw DomainError("max_refs must be >= 1");

  std::vector<const Record*> by_id;
  by_id.reserve(corpus.size());
  for (const Record& r : corpus.records) by_id.push_back(&r);
  std::sort(by_id.begin(), by_id.end(),
            [](const Record* a, const Record* b) { return a->id < b->id; });

  std::vector<TokenSeq> tokens(by_id.size());
  for (size_t i = 0; i < by_id.size(); ++i) tokens[i] = tokenize(by_id[i]->text);

  double sum = 0.0;
  for (size_t i = 0; i < by_id.size(); ++i) {
    // Reference sampling is keyed by the record id, not its position, so the
    // metric is invariant to corpus order.
    Rng rng(mix_seed(seed, by_id[i]->id));
    std::vector<size_t> others;
    others.reserve(by_id.size() - 1);
    for (size_t j = 0; j < by_id.size(); ++j) {
      if (j != i) others.push_back(j);
    }
    std::vector<size_t> chosen =
        rng.sample(others, static_cast<size_t>(max_refs));
    std::vector<const TokenSeq*> refs;
    refs.reserve(chosen.size());
    for (size_t j : chosen) refs.push_back(&tokens[j]);
    sum += bleu4(tokens[i], refs);
  }
  return sum / static_cast<double>(by_id.size());
}

std::pair<double, double> zipf_fit(const Corpus& corpus, int top_k) {
  if (top_k < 1) throw DomainError("top_k must be >= 1");
  std::unordered_map<std::string, uint64_t> freq;
  for (const Record& r : corpus.records) {
    for (const std::string& t : tokenize(r.text)) ++freq[t];
  }
  if (freq.size() < 10) {
    throw DomainError("zipf_fit requires >= 10 distinct tokens, got " +
                      std::to_string(freq.size()));
  }
  std::vector<std::pair<std::string, uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  size_t use = std::min<size_t>(ranked.size(), static_cast<size_t>(top_k));

  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < use; ++i) {
    sx += std::log(static_cast<double>(i + 1));
    sy += std::log(static_cast<double>(ranked[i].second));
  }
  double mx = sx / static_cast<double>(use);
  double my = sy / static_cast<double>(use);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < use; ++i) {
    double dx = std::log(static_cast<double>(i + 1)) - mx;
    double dy = std::log(static_cast<double>(ranked[i].second)) - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, 0.0};  // flat profile
  double slope = sxy / sxx;
  double r2 = (sxy * sxy) / (sxx * syy);
  return {slope, r2};
}

std::pair<double, double> length_stats(const Corpus& corpus) {
  if (corpus.empty()) throw DomainError("length_stats of an empty corpus");
  std::vector<double> lens;
  lens.reserve(corpus.size());
  for (const Record& r : corpus.records) {
    lens.push_back(static_cast<double>(tokenize(r.text).size()));
  }
  double mean = 0.0;
  for (double v : lens) mean += v;
  mean /= static_cast<double>(lens.size());
  double var = 0.0;
  for (double v : lens) var += (v - mean) * (v - mean);
  var /= static_cast<double>(lens.size());
  return {mean, std::sqrt(var)};
}

ScoreAggregate ingest_scores(const std::string& path, const Corpus& corpus,
                             std::vector<std::string>* warnings) {
  ScoreAggregate agg;
  agg.min = std::numeric_limits<double>::infinity();
  agg.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double sum_sq = 0.0;
  std::unordered_set<std::string> seen;
  internal::for_each_jsonl_line(path, [&](size_t line_no, const json& j) {
    const auto line_error = [&](const std::string& what) {
      throw ValidationError(what + " (line " + std::to_string(line_no) + " of '" +
                            path + "')");
    };
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("score") || !j["score"].is_number()) {
      line_error("expected {\"id\": str, \"score\": float}");
    }
    std::string id = j["id"].get<std::string>();
    if (!seen.insert(id).second) line_error("duplicate score for id '" + id + "'");
    if (!corpus.contains(id) && warnings) {
      warnings->push_back("score for unknown id '" + id + "' in '" + path + "'");
    }
    double score = j["score"].get<double>();
    if (!std::isfinite(score)) line_error("non-finite score for id '" + id + "'");
    sum += score;
    sum_sq += score * score;
    agg.min = std::min(agg.min, score);
    agg.max = std::max(agg.max, score);
    ++agg.count;
  });
  if (agg.count == 0) throw ValidationError("score file '" + path + "' is empty");
  agg.mean = sum / static_cast<double>(agg.count);
  double var = sum_sq / static_cast<double>(agg.count) - agg.mean * agg.mean;
  agg.sd = std::sqrt(std::max(var, 0.0));
  return agg;
}

std::map<std::string, double> load_score_map(const std::string& path) {
  std::map<std::string, double> out;
  internal::for_each_jsonl_line(path, [&](size_t line_no, const json& j) {
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("score") || !j["score"].is_number()) {
      throw ValidationError("expected {\"id\": str, \"score\": float} (line " +
                            std::to_string(line_no) + " of '" + path + "')");
    }
    std::string id = j["id"].get<std::string>();
    if (!out.emplace(id, j["score"].get<double>()).second) {
      throw ValidationError("duplicate score for id '" + id + "' (line " +
                            std::to_string(line_no) + " of '" + path + "')");
    }
  });
  return out;
}

Corpus filter_by_score(const Corpus& corpus,
                       const std::map<std::string, double>& scores,
                       const FilterMode& mode) {
  std::vector<std::string> unscored;
  for (const Record& r : corpus.records) {
    if (!scores.count(r.id)) unscored.push_back(r.id);
  }
  if (!unscored.empty()) {
    std::string msg =
        "no score for " + std::to_string(unscored.size()) + " record(s):";
    size_t shown = std::min<size_t>(unscored.size(), 10);
    for (size_t i = 0; i < shown; ++i) msg += " '" + unscored[i] + "'";
    if (unscored.size() > shown) msg += " ...";
    throw ValidationError(msg);
  }

  std::unordered_set<std::string> keep;
  if (mode.kind == FilterMode::kThreshold) {
    for (const Record& r : corpus.records) {
      if (scores.at(r.id) >= mode.value) keep.insert(r.id);
    }
  } else {
    if (!(mode.value > 0.0 && mode.value <= 1.0)) {
      throw DomainError("top_fraction must lie in (0, 1]");
    }
    auto want = static_cast<size_t>(
        std::ceil(mode.value * static_cast<double>(corpus.size()) - 1e-9));
    want = std::clamp<size_t>(want, 1, corpus.size());
    std::vector<std::pair<double, std::string>> ranked;
    ranked.reserve(corpus.size());
    for (const Record& r : corpus.records) ranked.push_back({scores.at(r.id), r.id});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (size_t i = 0; i < want; ++i) keep.insert(ranked[i].second);
  }

  Corpus out;
  out.name = corpus.name;
  for (const Record& r : corpus.records) {
    if (keep.count(r.id)) out.records.push_back(r);
  }
  return out;
}

double relative_improvement(const UtilityTriple& u) {
  double baseline = std::max(u.f1_random, u.f1_majority);
  if (!(u.f1_real > baseline)) {
    throw DomainError(
        "relative_improvement undefined: real F1 does not exceed the baseline");
  }
  return (u.f1_syn - baseline) / (u.f1_real - baseline);
}

}  // namespace dpaudit
