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

#ifndef DPAUDIT_LEAKAGE_HPP_
#define DPAUDIT_LEAKAGE_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/corpus.hpp"

namespace dpaudit {

// Suffix-array index over a tokenized reference corpus. Document boundaries
// carry unique sentinels, so no reported match ever spans two reference
// documents. Immutable after build; queries are thread-safe.
class MatchIndex {
 public:
  // Token mode: matching operates on the shared tokenize() output.
  static MatchIndex build(const Corpus& reference);
  // Byte mode: bit-exact matching on the raw text bytes.
  static MatchIndex build_bytes(const Corpus& reference);

  // Maximum L such that some length-L window of the record occurs verbatim
  // in one reference document. Empty records score 0.
  int longest_match(const Record& record) const;
  int longest_match(const TokenSeq& tokens) const;

  size_t stream_size() const { return stream_.size(); }
  bool byte_mode() const { return byte_mode_; }

 private:
  MatchIndex() = default;
  void build_suffix_array();
  int longest_match_ids(const std::vector<int32_t>& query) const;

  std::vector<int32_t> stream_;   // token ids >= 1; sentinels < 0 at doc ends
  std::vector<int32_t> suffix_;   // suffix array over stream_
  std::map<std::string, int32_t> vocab_;
  bool byte_mode_ = false;
};

struct LeakageReport {
  std::map<std::string, int> per_record;  // id -> longest match length
  double leaked_fraction = 0.0;
  int threshold_tokens = 8;
  bool token_weighted = false;
};

// Fraction of records (or, token_weighted, of tokens) whose longest verbatim
// match reaches the threshold.
LeakageReport leakage_rate(const MatchIndex& index, const Corpus& corpus,
                           int threshold_tokens, bool token_weighted = false);

// Tie-aware Spearman rank correlation with the t-approximation p-value.
// Requires equal lengths >= 3 and non-constant inputs.
std::pair<double, double> spearman(std::span<const double> x,
                                   std::span<const double> y);

}  // namespace dpaudit

#endif  // DPAUDIT_LEAKAGE_HPP_
