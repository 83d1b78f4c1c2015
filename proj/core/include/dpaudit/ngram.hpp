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

#ifndef DPAUDIT_NGRAM_HPP_
#define DPAUDIT_NGRAM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpaudit/corpus.hpp"

namespace dpaudit {

// Order-n token language model with additive (add-alpha) smoothing.
// Immutable after training; scoring is pure and thread-safe.
class NgramModel {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<bos>";
  static constexpr const char* kEos = "<eos>";

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  size_t vocab_size() const { return vocab_.size(); }

  // log[(count(ctx, tok) + alpha) / (count(ctx) + alpha * |vocab|)], natural
  // log. Only the last order-1 context tokens are used; OOV tokens map to
  // <unk>; an unseen context falls back to the uniform -log|vocab|.
  double token_logprob(std::span<const std::string> context,
                       const std::string& token) const;

  // Mean (default) or summed log-probability of the record's padded token
  // stream: n-1 <bos> + tokens + <eos>. Records that tokenize to nothing are
  // a domain error.
  double record_score(const Record& record, bool length_normalized = true) const;
  double sequence_score(const TokenSeq& tokens, bool length_normalized = true) const;

  // Count accessors for tests and the debug dump.
  uint64_t joint_count(std::span<const std::string> context,
                       const std::string& token) const;
  uint64_t context_count(std::span<const std::string> context) const;

  // Token strings of the trained vocabulary, reserved symbols included.
  std::vector<std::string> vocabulary() const;

  // Counts map as a JSON string, for debugging small models.
  std::string debug_dump() const;

 private:
  friend NgramModel train_ngram(const Corpus&, int, double);

  struct VecHash {
    size_t operator()(const std::vector<int32_t>& v) const;
  };
  struct ContextEntry {
    uint64_t total = 0;
    std::unordered_map<int32_t, uint64_t> by_token;
  };

  int32_t token_id(const std::string& token) const;
  std::vector<int32_t> context_key(std::span<const std::string> context) const;
  double logprob_ids(const std::vector<int32_t>& ctx, int32_t tok) const;

  int order_ = 2;
  double alpha_ = 1.0;
  std::unordered_map<std::string, int32_t> vocab_;
  std::unordered_map<std::vector<int32_t>, ContextEntry, VecHash> contexts_;
};

// Trains on every record of the corpus, padding each with n-1 <bos> and one
// <eos>. Requires a non-empty corpus, n in [1, 5], alpha > 0.
NgramModel train_ngram(const Corpus& corpus, int n, double alpha);

}  // namespace dpaudit

#endif  // DPAUDIT_NGRAM_HPP_
