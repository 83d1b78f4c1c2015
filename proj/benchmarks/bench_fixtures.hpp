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

#ifndef DPAUDIT_BENCHMARKS_BENCH_FIXTURES_HPP_
#define DPAUDIT_BENCHMARKS_BENCH_FIXTURES_HPP_

#include <string>

#include "dpaudit/corpus.hpp"
#include "dpaudit/rng.hpp"

namespace dpaudit::bench {

// Zipf-flavoured word soup; cheap to generate, stable across runs.
inline Corpus fixture_corpus(size_t n_records, uint64_t seed,
                             size_t min_tokens = 10, size_t max_tokens = 30) {
  static const char* kWords[] = {
      "the",    "of",     "patient", "report", "daily", "dose",   "blood",
      "stable", "course", "history", "market", "order", "claim",  "section",
      "left",   "right",  "acute",   "fever",  "chest", "normal", "filed",
      "price",  "growth", "revenue", "state",  "court", "annual", "board",
  };
  constexpr size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);
  Corpus corpus;
  corpus.name = "bench";
  corpus.records.reserve(n_records);
  Rng rng(seed);
  for (size_t i = 0; i < n_records; ++i) {
    size_t len = min_tokens + rng.bounded(max_tokens - min_tokens + 1);
    std::string text;
    for (size_t t = 0; t < len; ++t) {
      if (!text.empty()) text += ' ';
      if (rng.bounded(5) == 0) {
        text += "w" + std::to_string(rng.bounded(20000));
      } else {
        text += kWords[rng.bounded(kWordCount)];
      }
    }
    corpus.records.push_back({"r" + std::to_string(i), std::move(text), {}, {}});
  }
  return corpus;
}

}  // namespace dpaudit::bench

#endif  // DPAUDIT_BENCHMARKS_BENCH_FIXTURES_HPP_
