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

#include <cmath>
#include <filesystem>
#include <unordered_map>

#include "dpaudit/errors.hpp"
#include "dpaudit/rng.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;

std::string synth_id(const std::string& trial_id, size_t k) {
  return trial_id + "-s" + std::to_string(k);
}

// Whitespace-delimited token dropout; p == 0 returns the text verbatim.
std::string drop_tokens(const std::string& text, double p, Rng& rng) {
  if (p <= 0.0) return text;
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (start == i) break;
    if (rng.next_double() >= p) {
      if (!out.empty()) out += ' ';
      out.append(text, start, i - start);
    }
  }
  return out;
}

}  // namespace

void SimGeneratorSpec::validate() const {
  if (kind == Kind::kCopier) {
    if (!(dropout >= 0.0 && dropout <= 1.0)) {
      throw DomainError("copier dropout must lie in [0, 1]");
    }
  } else if (kind == Kind::kRandomizedResponse) {
    if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0)) {
      throw DomainError("inclusion probabilities must lie in [0, 1]");
    }
    if (p1 < p0) throw DomainError("randomized response requires p1 >= p0");
  }
}

SimGeneratorSpec::Kind parse_generator_kind(const std::string& name) {
  if (name == "copier") return SimGeneratorSpec::Kind::kCopier;
  if (name == "independent") return SimGeneratorSpec::Kind::kIndependent;
  if (name == "randomized-response" || name == "randomized_response") {
    return SimGeneratorSpec::Kind::kRandomizedResponse;
  }
  throw ValidationError("unknown generator kind '" + name + "'");
}

std::string generator_kind_name(SimGeneratorSpec::Kind kind) {
  switch (kind) {
    case SimGeneratorSpec::Kind::kCopier:
      return "copier";
    case SimGeneratorSpec::Kind::kIndependent:
      return "independent";
    case SimGeneratorSpec::Kind::kRandomizedResponse:
      return "randomized-response";
  }
  return "unknown";
}

Corpus generate_trial(const SimGeneratorSpec& spec, const AuditPlan& plan,
                      const Corpus& corpus, const Trial& trial) {
  spec.validate();
  std::unordered_map<std::string, const Record*> by_id;
  for (const Record& r : corpus.records) by_id[r.id] = &r;
  const auto lookup = [&](const std::string& id) -> const Record& {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ValidationError("corpus is missing id '" + id + "'");
    }
    return *it->second;
  };

  Rng rng(mix_seed(spec.seed, trial.trial_id));
  Corpus out;
  out.name = trial.trial_id;
  size_t k = 0;
  const auto emit = [&](const std::string& text, const Record& source) {
    Record r;
    r.id = synth_id(trial.trial_id, k++);
    r.text = text;
    r.labels = source.labels;
    out.records.push_back(std::move(r));
  };

  switch (spec.kind) {
    case SimGeneratorSpec::Kind::kCopier: {
      for (const std::string& id : trial.generation_input_ids()) {
        const Record& src = lookup(id);
        std::string text = drop_tokens(src.text, spec.dropout, rng);
        if (text.empty()) continue;  // fully dropped
        emit(text, src);
      }
      break;
    }
    case SimGeneratorSpec::Kind::kIndependent: {
      size_t want = std::min(trial.subset_ids.size(), plan.aux_ids.size());
      for (const std::string& id : rng.sample(plan.aux_ids, want)) {
        const Record& src = lookup(id);
        emit(src.text, src);
      }
      break;
    }
    case SimGeneratorSpec::Kind::kRandomizedResponse: {
      size_t want = std::min(trial.subset_ids.size(), plan.aux_ids.size());
      for (const std::string& id : rng.sample(plan.aux_ids, want)) {
        const Record& src = lookup(id);
        emit(src.text, src);
      }
      // Independent per-target inclusion: probability p1 when the target is
      // in this trial's generation input, p0 otherwise. The output
      // distributions for neighbouring inputs then differ by exactly the
      // randomized-response factors, so the mechanism's true epsilon is
      // rr_epsilon(p1, p0).
      for (const std::string& target : plan.targets) {
        bool in_input = trial.member && trial.target_id == target;
        double p = in_input ? spec.p1 : spec.p0;
        if (rng.next_double() < p) {
          const Record& src = lookup(target);
          emit(src.text, src);
        }
      }
      break;
    }
  }
  if (out.empty()) {
    // A fully-dropped copier trial still has to produce a corpus.
    const Record& src = lookup(trial.subset_ids.empty()
                                   ? plan.aux_ids.front()
                                   : trial.subset_ids.front());
    Record r;
    r.id = synth_id(trial.trial_id, k);
    r.text = src.text;
    out.records.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, Corpus> generate(const SimGeneratorSpec& spec,
                                       const AuditPlan& plan,
                                       const Corpus& corpus) {
  std::map<std::string, Corpus> out;
  for (const Trial& t : plan.trials) {
    out.emplace(t.trial_id, generate_trial(spec, plan, corpus, t));
  }
  return out;
}

void write_synthetic(const std::map<std::string, Corpus>& synthetic,
                     const std::string& dir) {
  fs::path syn_dir = fs::path(dir) / "synthetic";
  std::error_code ec;
  fs::create_directories(syn_dir, ec);
  if (ec) {
    throw IoError("cannot create '" + syn_dir.string() + "': " + ec.message());
  }
  for (const auto& [trial_id, corpus] : synthetic) {
    save_corpus(corpus, (syn_dir / (trial_id + ".jsonl")).string());
  }
}

double rr_epsilon(double p1, double p0) {
  if (!(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0)) {
    throw DomainError("rr_epsilon requires probabilities strictly inside (0, 1)");
  }
  if (p1 < p0) throw DomainError("rr_epsilon requires p1 >= p0");
  return std::max(std::log(p1 / p0), std::log((1.0 - p0) / (1.0 - p1)));
}

}  // namespace dpaudit
