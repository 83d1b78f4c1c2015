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

#ifndef DPAUDIT_RNG_HPP_
#define DPAUDIT_RNG_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

namespace dpaudit {

// SplitMix64 generator. std::uniform_int_distribution and friends are
// implementation-defined, so every sampling helper here is hand-rolled to
// keep outputs byte-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() >> 63) != 0; }

  // Uniform in [0, n) without modulo bias.
  uint64_t bounded(uint64_t n);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct elements drawn without replacement, in draw order.
  template <typename T>
  std::vector<T> sample(const std::vector<T>& pool, size_t k) {
    std::vector<T> scratch = pool;
    if (k > scratch.size()) k = scratch.size();
    std::vector<T> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(bounded(scratch.size() - i));
      std::swap(scratch[i], scratch[j]);
      out.push_back(scratch[i]);
    }
    return out;
  }

 private:
  uint64_t state_;
};

// FNV-1a over bytes; used to derive independent named substreams from one
// user-facing seed.
uint64_t fnv1a64(std::string_view bytes);

// Substream seed for (seed, tag); stable across platforms.
uint64_t mix_seed(uint64_t seed, std::string_view tag);
uint64_t mix_seed(uint64_t seed, std::string_view tag, uint64_t index);

}  // namespace dpaudit

#endif  // DPAUDIT_RNG_HPP_
