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

#include "dpaudit/simgen.hpp"

#include <algorithm>
#include <cmath>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "dpaudit/errors.hpp"
#include "testutil.hpp"

namespace dpaudit {
namespace {

struct Fixture {
  Corpus corpus;
  AuditPlan plan;
};

Fixture make_fixture(size_t n_records, int n_trials, uint64_t seed) {
  Fixture f;
  f.corpus = testutil::make_english_fixture(n_records, seed);
  OutlierReport outliers;
  for (size_t i = 0; i < 6; ++i) {
    outliers.target_ids.push_back(f.corpus.records[i].id);
  }
  std::sort(outliers.target_ids.begin(), outliers.target_ids.end());
  PlanParams params;
  params.n_trials = n_trials;
  f.plan = build_plan(f.corpus, outliers, params, seed + 1);
  return f;
}

bool corpus_contains_text(const Corpus& c, const std::string& text) {
  return std::any_of(c.records.begin(), c.records.end(),
                     [&](const Record& r) { return r.text == text; });
}

TEST(CopierTest, ZeroDropoutEmitsTargetVerbatim) {
  Fixture f = make_fixture(200, 40, 60);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kCopier;
  spec.dropout = 0.0;
  std::map<std::string, Corpus> syn = generate(spec, f.plan, f.corpus);
  for (const Trial& t : f.plan.trials) {
    const Corpus& out = syn.at(t.trial_id);
    const Record* target = f.corpus.find(t.target_id);
    ASSERT_NE(target, nullptr);
    EXPECT_EQ(corpus_contains_text(out, target->text), t.member) << t.trial_id;
    EXPECT_EQ(out.size(), t.subset_ids.size() + (t.member ? 1 : 0));
  }
}

TEST(CopierTest, DropoutRemovesRoughlyThatFraction) {
  Fixture f = make_fixture(200, 10, 61);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kCopier;
  spec.dropout = 0.5;
  std::map<std::string, Corpus> syn = generate(spec, f.plan, f.corpus);

  size_t in_tokens = 0;
  size_t out_tokens = 0;
  for (const Trial& t : f.plan.trials) {
    for (const std::string& id : t.generation_input_ids()) {
      in_tokens += tokenize(f.corpus.find(id)->text).size();
    }
    for (const Record& r : syn.at(t.trial_id).records) {
      out_tokens += tokenize(r.text).size();
    }
  }
  double kept = static_cast<double>(out_tokens) / static_cast<double>(in_tokens);
  EXPECT_NEAR(kept, 0.5, 0.05);
}

TEST(IndependentTest, IgnoresMembershipBit) {
  Fixture f = make_fixture(200, 20, 62);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kIndependent;
  std::map<std::string, Corpus> a = generate(spec, f.plan, f.corpus);

  AuditPlan flipped = f.plan;
  for (Trial& t : flipped.trials) t.member = !t.member;
  std::map<std::string, Corpus> b = generate(spec, flipped, f.corpus);
  EXPECT_EQ(a, b);
}

TEST(IndependentTest, EmitsOnlyAuxRecords) {
  Fixture f = make_fixture(200, 20, 63);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kIndependent;
  std::map<std::string, Corpus> syn = generate(spec, f.plan, f.corpus);

  std::set<std::string> aux_texts;
  for (const std::string& id : f.plan.aux_ids) {
    aux_texts.insert(f.corpus.find(id)->text);
  }
  for (const auto& [trial_id, c] : syn) {
    EXPECT_EQ(c.size(), f.plan.trials[0].subset_ids.size());
    for (const Record& r : c.records) {
      EXPECT_TRUE(aux_texts.count(r.text)) << trial_id;
    }
  }
}

TEST(RandomizedResponseTest, InclusionFrequenciesMatchProbabilities) {
  Fixture f = make_fixture(300, 400, 64);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kRandomizedResponse;
  spec.p1 = 0.731;
  spec.p0 = 0.269;
  std::map<std::string, Corpus> syn = generate(spec, f.plan, f.corpus);

  size_t member_trials = 0, member_included = 0;
  size_t non_member_trials = 0, non_member_included = 0;
  for (const Trial& t : f.plan.trials) {
    const Record* target = f.corpus.find(t.target_id);
    bool included = corpus_contains_text(syn.at(t.trial_id), target->text);
    if (t.member) {
      ++member_trials;
      member_included += included;
    } else {
      ++non_member_trials;
      non_member_included += included;
    }
  }
  double p1_hat =
      static_cast<double>(member_included) / static_cast<double>(member_trials);
  double p0_hat = static_cast<double>(non_member_included) /
                  static_cast<double>(non_member_trials);
  EXPECT_NEAR(p1_hat, spec.p1, 0.08);
  EXPECT_NEAR(p0_hat, spec.p0, 0.08);
}

TEST(GenerateTest, DeterministicPerTrialSeeding) {
  Fixture f = make_fixture(150, 12, 65);
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kRandomizedResponse;
  spec.p1 = 0.7;
  spec.p0 = 0.2;
  std::map<std::string, Corpus> all = generate(spec, f.plan, f.corpus);
  // Regenerating one trial in isolation reproduces the same corpus.
  for (const Trial& t : f.plan.trials) {
    EXPECT_EQ(generate_trial(spec, f.plan, f.corpus, t), all.at(t.trial_id));
  }
}

TEST(RrEpsilonTest, HandValues) {
  EXPECT_DOUBLE_EQ(rr_epsilon(0.5, 0.5), 0.0);
  EXPECT_NEAR(rr_epsilon(0.731, 0.269), 1.0, 2e-3);
  EXPECT_NEAR(rr_epsilon(0.5, 0.25), std::log(2.0), 1e-12);
}

TEST(RrEpsilonTest, BothConstraintsBindNearSymmetricPoint) {
  // p1 + p0 == 1 makes both log-ratios equal.
  double p1 = 0.731, p0 = 0.269;
  EXPECT_NEAR(std::log(p1 / p0), std::log((1 - p0) / (1 - p1)), 1e-12);
}

TEST(RrEpsilonTest, BoundaryProbabilitiesRejected) {
  EXPECT_THROW(rr_epsilon(1.0, 0.5), DomainError);
  EXPECT_THROW(rr_epsilon(0.5, 0.0), DomainError);
  EXPECT_THROW(rr_epsilon(0.3, 0.5), DomainError);
}

TEST(SimGeneratorSpecTest, Validation) {
  SimGeneratorSpec spec;
  spec.kind = SimGeneratorSpec::Kind::kCopier;
  spec.dropout = 1.5;
  EXPECT_THROW(spec.validate(), DomainError);
  spec = {};
  spec.kind = SimGeneratorSpec::Kind::kRandomizedResponse;
  spec.p1 = 0.2;
  spec.p0 = 0.5;
  EXPECT_THROW(spec.validate(), DomainError);
}

TEST(SimGeneratorSpecTest, KindNames) {
  EXPECT_EQ(parse_generator_kind("copier"), SimGeneratorSpec::Kind::kCopier);
  EXPECT_EQ(parse_generator_kind("randomized-response"),
            SimGeneratorSpec::Kind::kRandomizedResponse);
  EXPECT_EQ(generator_kind_name(SimGeneratorSpec::Kind::kIndependent),
            "independent");
  EXPECT_THROW(parse_generator_kind("nope"), ValidationError);
}

}  // namespace
}  // namespace dpaudit
