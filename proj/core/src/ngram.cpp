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

#include "dpaudit/ngram.hpp"

#include <algorithm>
#include <cmath>

#include "dpaudit/errors.hpp"
#include "internal.hpp"

namespace dpaudit {

namespace {
constexpr int32_t kUnkId = 0;
constexpr int32_t kBosId = 1;
constexpr int32_t kEosId = 2;
}  // namespace

size_t NgramModel::VecHash::operator()(const std::vector<int32_t>& v) const {
  uint64_t h = 14695981039346656037ULL;
  for (int32_t x : v) {
    h ^= static_cast<uint64_t>(static_cast<uint32_t>(x));
    h *= 1099511628211ULL;
  }
  return static_cast<size_t>(h);
}

int32_t NgramModel::token_id(const std::string& token) const {
  auto it = vocab_.find(token);
  return it == vocab_.end() ? kUnkId : it->second;
}

std::vector<int32_t> NgramModel::context_key(
    std::span<const std::string> context) const {
  const size_t want = static_cast<size_t>(order_ - 1);
  std::vector<int32_t> key;
  key.reserve(want);
  size_t start = context.size() > want ? context.size() - want : 0;
  // Short contexts are front-padded with <bos>, mirroring training.
  for (size_t i = context.size() - start; i < want; ++i) key.push_back(kBosId);
  for (size_t i = start; i < context.size(); ++i) {
    key.push_back(token_id(context[i]));
  }
  return key;
}

double NgramModel::logprob_ids(const std::vector<int32_t>& ctx,
                               int32_t tok) const {
  const double v = static_cast<double>(vocab_.size());
  auto it = contexts_.find(ctx);
  if (it == contexts_.end()) {
    return std::log(alpha_ / (alpha_ * v));  // == -log |vocab|
  }
  const ContextEntry& entry = it->second;
  auto jt = entry.by_token.find(tok);
  double joint = jt == entry.by_token.end()
                     ? 0.0
                     : static_cast<double>(jt->second);
  return std::log((joint + alpha_) /
                  (static_cast<double>(entry.total) + alpha_ * v));
}

double NgramModel::token_logprob(std::span<const std::string> context,
                                 const std::string& token) const {
  return logprob_ids(context_key(context), token_id(token));
}

double NgramModel::sequence_score(const TokenSeq& tokens,
                                  bool length_normalized) const {
  if (tokens.empty()) {
    throw DomainError("cannot score an empty token sequence");
  }
  std::vector<int32_t> stream;
  stream.reserve(tokens.size() + order_);
  for (int i = 0; i < order_ - 1; ++i) stream.push_back(kBosId);
  for (const std::string& t : tokens) stream.push_back(token_id(t));
  stream.push_back(kEosId);

  double sum = 0.0;
  size_t scored = 0;
  std::vector<int32_t> ctx(static_cast<size_t>(order_ - 1));
  for (size_t pos = static_cast<size_t>(order_ - 1); pos < stream.size(); ++pos) {
    for (size_t k = 0; k < ctx.size(); ++k) {
      ctx[k] = stream[pos - ctx.size() + k];
    }
    sum += logprob_ids(ctx, stream[pos]);
    ++scored;
  }
  return length_normalized ? sum / static_cast<double>(scored) : sum;
}

double NgramModel::record_score(const Record& record,
                                bool length_normalized) const {
  TokenSeq tokens = tokenize(record.text);
  if (tokens.empty()) {
    throw DomainError("record '" + record.id + "' tokenizes to nothing");
  }
  return sequence_score(tokens, length_normalized);
}

uint64_t NgramModel::joint_count(std::span<const std::string> context,
                                 const std::string& token) const {
  auto it = contexts_.find(context_key(context));
  if (it == contexts_.end()) return 0;
  auto jt = it->second.by_token.find(token_id(token));
  return jt == it->second.by_token.end() ? 0 : jt->second;
}

uint64_t NgramModel::context_count(std::span<const std::string> context) const {
  auto it = contexts_.find(context_key(context));
  return it == contexts_.end() ? 0 : it->second.total;
}

std::vector<std::string> NgramModel::vocabulary() const {
  std::vector<std::string> out(vocab_.size());
  for (const auto& [token, id] : vocab_) out[static_cast<size_t>(id)] = token;
  return out;
}

std::string NgramModel::debug_dump() const {
  std::vector<std::string> tokens = vocabulary();
  internal::json contexts = internal::json::object();
  for (const auto& [ctx, entry] : contexts_) {
    std::string key;
    for (int32_t id : ctx) {
      if (!key.empty()) key += ' ';
      key += tokens[static_cast<size_t>(id)];
    }
    internal::json by_token = internal::json::object();
    for (const auto& [tok, count] : entry.by_token) {
      by_token[tokens[static_cast<size_t>(tok)]] = count;
    }
    contexts[key] = {{"by_token", std::move(by_token)}, {"total", entry.total}};
  }
  internal::json j;
  j["alpha"] = alpha_;
  j["contexts"] = std::move(contexts);
  j["order"] = order_;
  j["vocab_size"] = vocab_.size();
  return j.dump(2);
}

NgramModel train_ngram(const Corpus& corpus, int n, double alpha) {
  if (corpus.empty()) throw DomainError("cannot train on an empty corpus");
  if (n < 1 || n > 5) throw DomainError("n-gram order must lie in [1, 5]");
  if (!(alpha > 0.0)) throw DomainError("smoothing alpha must be > 0");

  NgramModel m;
  m.order_ = n;
  m.alpha_ = alpha;
  m.vocab_ = {{NgramModel::kUnk, kUnkId},
              {NgramModel::kBos, kBosId},
              {NgramModel::kEos, kEosId}};

  std::vector<TokenSeq> token_cache;
  token_cache.reserve(corpus.size());
  for (const Record& r : corpus.records) {
    TokenSeq toks = tokenize(r.text);
    for (const std::string& t : toks) {
      m.vocab_.emplace(t, static_cast<int32_t>(m.vocab_.size()));
    }
    token_cache.push_back(std::move(toks));
  }

  std::vector<int32_t> stream;
  for (const TokenSeq& toks : token_cache) {
    if (toks.empty()) continue;  // blank records contribute no counts
    stream.clear();
    stream.reserve(toks.size() + static_cast<size_t>(n));
    for (int i = 0; i < n - 1; ++i) stream.push_back(kBosId);
    for (const std::string& t : toks) stream.push_back(m.vocab_.at(t));
    stream.push_back(kEosId);
    std::vector<int32_t> ctx(static_cast<size_t>(n - 1));
    for (size_t pos = static_cast<size_t>(n - 1); pos < stream.size(); ++pos) {
      for (size_t k = 0; k < ctx.size(); ++k) {
        ctx[k] = stream[pos - ctx.size() + k];
      }
      NgramModel::ContextEntry& entry = m.contexts_[ctx];
      ++entry.total;
      ++entry.by_token[stream[pos]];
    }
  }
  return m;
}

}  // namespace dpaudit
