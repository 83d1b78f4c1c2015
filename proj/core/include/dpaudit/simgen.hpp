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

#ifndef DPAUDIT_SIMGEN_HPP_
#define DPAUDIT_SIMGEN_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "dpaudit/corpus.hpp"
#include "dpaudit/plan.hpp"

namespace dpaudit {

// Synthetic-generator simulators with known privacy behaviour, used to
// validate the audit loop end to end without any LLM in the loop.
//
//   copier:              emits the trial's generation-input records verbatim
//                        with per-token dropout p (p=0 leaks everything).
//   independent:         emits an aux-only sample; ignores membership, so the
//                        mechanism carries zero information about the target.
//   randomized_response: emits an aux-only sample, then includes each audit
//                        target verbatim with probability p1 when that target
//                        is in the trial's generation input and p0 otherwise.
//                        True epsilon is rr_epsilon(p1, p0) with delta = 0.
struct SimGeneratorSpec {
  enum class Kind { kCopier, kIndependent, kRandomizedResponse };

  Kind kind = Kind::kIndependent;
  double dropout = 0.0;  // copier
  double p1 = 0.0;       // randomized_response: inclusion prob when member
  double p0 = 0.0;       // randomized_response: inclusion prob otherwise
  uint64_t seed = 42;

  void validate() const;
};

SimGeneratorSpec::Kind parse_generator_kind(const std::string& name);
std::string generator_kind_name(SimGeneratorSpec::Kind kind);

// One synthetic corpus for one trial; seeded by (spec.seed, trial_id) only,
// so trials can be generated independently and in any order.
Corpus generate_trial(const SimGeneratorSpec& spec, const AuditPlan& plan,
                      const Corpus& corpus, const Trial& trial);

// All trials at once.
std::map<std::string, Corpus> generate(const SimGeneratorSpec& spec,
                                       const AuditPlan& plan,
                                       const Corpus& corpus);

// Writes synthetic/<trial_id>.jsonl under dir, the layout import_synthetic
// expects.
void write_synthetic(const std::map<std::string, Corpus>& synthetic,
                     const std::string& dir);

// max(ln(p1/p0), ln((1-p0)/(1-p1))); the exact privacy budget of the
// randomized-response inclusion mechanism. Requires 0 < p0 <= p1 < 1.
double rr_epsilon(double p1, double p0);

}  // namespace dpaudit

#endif  // DPAUDIT_SIMGEN_HPP_
