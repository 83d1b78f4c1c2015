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

#include "dpaudit/plan.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_set>

#include "dpaudit/errors.hpp"
#include "dpaudit/rng.hpp"
#include "dpaudit/version.hpp"
#include "internal.hpp"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;
using internal::json;

constexpr size_t kMinRemainder = 30;

std::string trial_name(int index, int n_trials) {
  int width = 1;
  for (int v = n_trials - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index);
  return "t" + std::string(width > static_cast<int>(digits.size())
                               ? width - digits.size()
                               : 0,
                           '0') +
         digits;
}

std::string label_key(const Record& r) {
  std::string key;
  for (const std::string& l : r.labels) {  // std::set iterates sorted
    key += l;
    key += '\x1f';
  }
  return key;
}

// Proportional per-stratum prv quotas via largest remainder, so the global
// 1:2 split is exact to rounding while every stratum keeps its share.
std::map<std::string, size_t> stratum_quotas(
    const std::map<std::string, std::vector<std::string>>& strata,
    size_t n_prv_total, size_t n_total) {
  std::map<std::string, size_t> quota;
  std::vector<std::pair<double, std::string>> remainders;
  size_t assigned = 0;
  for (const auto& [key, ids] : strata) {
    double exact = static_cast<double>(ids.size()) *
                   static_cast<double>(n_prv_total) /
                   static_cast<double>(n_total);
    auto base = static_cast<size_t>(std::floor(exact));
    quota[key] = base;
    assigned += base;
    remainders.push_back({exact - static_cast<double>(base), key});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (size_t i = 0; assigned < n_prv_total && i < remainders.size(); ++i) {
    const std::string& key = remainders[i].second;
    if (quota[key] < strata.at(key).size()) {
      ++quota[key];
      ++assigned;
    }
  }
  return quota;
}

void validate_plan(const AuditPlan& plan) {
  std::unordered_set<std::string> prv(plan.prv_ids.begin(), plan.prv_ids.end());
  std::unordered_set<std::string> aux(plan.aux_ids.begin(), plan.aux_ids.end());
  for (const std::string& id : plan.aux_ids) {
    if (prv.count(id)) {
      throw ValidationError("id '" + id + "' appears in both prv and aux");
    }
  }
  for (const std::string& t : plan.targets) {
    if (prv.count(t) || aux.count(t)) {
      throw ValidationError("target '" + t + "' leaked into prv/aux");
    }
  }
  std::map<std::string, int> per_target;
  for (const ReferenceSet& ref : plan.references) {
    for (const std::string& t : ref.included_targets) ++per_target[t];
  }
  for (const std::string& t : plan.targets) {
    if (per_target[t] != plan.params.m_refs / 2) {
      throw ValidationError("target '" + t + "' is included in " +
                            std::to_string(per_target[t]) + " of " +
                            std::to_string(plan.params.m_refs) +
                            " reference sets; expected exactly half");
    }
  }
}

json budget_json(const DpBudget& b) {
  return {{"delta", b.delta}, {"epsilon", b.epsilon}};
}

}  // namespace

std::vector<std::string> Trial::generation_input_ids() const {
  std::vector<std::string> ids = subset_ids;
  if (member) ids.push_back(target_id);
  return ids;
}

AuditPlan build_plan(const Corpus& corpus, const OutlierReport& outliers,
                     const PlanParams& params, uint64_t seed,
                     std::optional<DpBudget> claimed_budget) {
  if (outliers.target_ids.empty()) {
    throw DomainError("no attack targets; run detect_outliers first");
  }
  if (params.n_trials < 1) throw DomainError("n_trials must be >= 1");
  if (!(params.subset_fraction > 0.0 && params.subset_fraction <= 1.0)) {
    throw DomainError("subset_fraction must lie in (0, 1]");
  }
  if (params.m_refs < 2 || params.m_refs % 2 != 0) {
    throw DomainError("m_refs must be even and >= 2");
  }
  if (claimed_budget) claimed_budget->validate();

  std::unordered_set<std::string> target_set(outliers.target_ids.begin(),
                                             outliers.target_ids.end());
  for (const std::string& t : outliers.target_ids) {
    if (!corpus.contains(t)) {
      throw ValidationError("target '" + t + "' is not in the corpus");
    }
  }

  // Remainder after removing targets, grouped into label-set strata.
  std::map<std::string, std::vector<std::string>> strata;
  size_t n_remainder = 0;
  for (const Record& r : corpus.records) {
    if (target_set.count(r.id)) continue;
    strata[label_key(r)].push_back(r.id);
    ++n_remainder;
  }
  if (n_remainder < kMinRemainder) {
    throw DomainError("only " + std::to_string(n_remainder) +
                      " records remain after removing targets; need >= " +
                      std::to_string(kMinRemainder));
  }

  AuditPlan plan;
  plan.seed = seed;
  plan.params = params;
  plan.claimed_budget = claimed_budget;
  plan.targets = outliers.target_ids;
  std::sort(plan.targets.begin(), plan.targets.end());

  // 1:2 prv:aux split, stratified by label set.
  const auto n_prv_total =
      static_cast<size_t>(std::llround(static_cast<double>(n_remainder) / 3.0));
  std::map<std::string, size_t> quota =
      stratum_quotas(strata, n_prv_total, n_remainder);
  Rng split_rng(mix_seed(seed, "split"));
  std::unordered_set<std::string> prv_set;
  for (auto& [key, ids] : strata) {
    split_rng.shuffle(ids);
    for (size_t i = 0; i < quota[key]; ++i) prv_set.insert(ids[i]);
  }
  for (const Record& r : corpus.records) {
    if (target_set.count(r.id)) continue;
    if (prv_set.count(r.id)) {
      plan.prv_ids.push_back(r.id);
    } else {
      plan.aux_ids.push_back(r.id);
    }
  }

  // Membership trials.
  const auto subset_size = std::clamp<size_t>(
      static_cast<size_t>(
          std::llround(params.subset_fraction *
                       static_cast<double>(plan.prv_ids.size()))),
      1, plan.prv_ids.size());
  Rng trial_rng(mix_seed(seed, "trials"));
  plan.trials.reserve(params.n_trials);
  for (int i = 0; i < params.n_trials; ++i) {
    Trial t;
    t.trial_id = trial_name(i, params.n_trials);
    std::vector<std::string> sampled = trial_rng.sample(plan.prv_ids, subset_size);
    std::sort(sampled.begin(), sampled.end());
    t.subset_ids = std::move(sampled);
    t.member = trial_rng.coin();
    t.target_id =
        plan.targets[trial_rng.bounded(plan.targets.size())];
    plan.trials.push_back(std::move(t));
  }

  // Reference sets: each target lands in exactly m_refs/2 of them.
  plan.references.resize(params.m_refs);
  for (int j = 0; j < params.m_refs; ++j) {
    plan.references[j].ref_id = "ref" + std::to_string(j + 1);
  }
  Rng ref_rng(mix_seed(seed, "refs"));
  for (const std::string& t : plan.targets) {
    std::vector<int> all(params.m_refs);
    for (int j = 0; j < params.m_refs; ++j) all[j] = j;
    std::vector<int> chosen = ref_rng.sample(all, params.m_refs / 2);
    std::sort(chosen.begin(), chosen.end());
    for (int j : chosen) plan.references[j].included_targets.push_back(t);
  }

  validate_plan(plan);
  return plan;
}

void export_manifests(const AuditPlan& plan, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());

  json pj;
  pj["aux_ids"] = plan.aux_ids;
  pj["format_version"] = kFormatVersion;
  pj["claimed_budget"] =
      plan.claimed_budget ? budget_json(*plan.claimed_budget) : json(nullptr);
  pj["params"] = {{"m_refs", plan.params.m_refs},
                  {"n_trials", plan.params.n_trials},
                  {"subset_fraction", plan.params.subset_fraction}};
  pj["prv_ids"] = plan.prv_ids;
  pj["seed"] = plan.seed;
  pj["split"] = "label-stratified 1:2 prv:aux";
  pj["targets"] = plan.targets;
  internal::write_text_file(dir + "/plan.json", pj.dump(2) + "\n");

  std::string trials;
  std::string key;
  for (const Trial& t : plan.trials) {
    json tj;
    tj["input_ids"] = t.generation_input_ids();
    tj["trial_id"] = t.trial_id;
    trials += tj.dump();
    trials += '\n';
    json kj;
    kj["member"] = t.member;
    kj["target_id"] = t.target_id;
    kj["trial_id"] = t.trial_id;
    key += kj.dump();
    key += '\n';
  }
  internal::write_text_file(dir + "/trials.jsonl", trials);
  internal::write_text_file(dir + "/key.jsonl", key);

  std::string refs;
  for (const ReferenceSet& ref : plan.references) {
    json rj;
    rj["included_targets"] = ref.included_targets;
    rj["ref_id"] = ref.ref_id;
    refs += rj.dump();
    refs += '\n';
  }
  internal::write_text_file(dir + "/references.jsonl", refs);
}

AuditPlan import_plan(const std::string& dir) {
  std::ifstream in(dir + "/plan.json", std::ios::binary);
  if (!in) throw IoError("cannot open '" + dir + "/plan.json'");
  json pj = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (pj.is_discarded() || !pj.is_object()) {
    throw ValidationError("'" + dir + "/plan.json' is not valid JSON");
  }

  AuditPlan plan;
  plan.seed = pj.at("seed").get<uint64_t>();
  plan.prv_ids = pj.at("prv_ids").get<std::vector<std::string>>();
  plan.aux_ids = pj.at("aux_ids").get<std::vector<std::string>>();
  plan.targets = pj.at("targets").get<std::vector<std::string>>();
  plan.params.n_trials = pj.at("params").at("n_trials").get<int>();
  plan.params.subset_fraction =
      pj.at("params").at("subset_fraction").get<double>();
  plan.params.m_refs = pj.at("params").at("m_refs").get<int>();
  if (!pj.at("claimed_budget").is_null()) {
    plan.claimed_budget = DpBudget{pj["claimed_budget"]["epsilon"].get<double>(),
                                   pj["claimed_budget"]["delta"].get<double>()};
  }

  struct KeyEntry {
    bool member;
    std::string target_id;
  };
  std::map<std::string, KeyEntry> key;
  internal::for_each_jsonl_line(dir + "/key.jsonl", [&](size_t, const json& j) {
    key[j.at("trial_id").get<std::string>()] = {
        j.at("member").get<bool>(), j.at("target_id").get<std::string>()};
  });

  internal::for_each_jsonl_line(
      dir + "/trials.jsonl", [&](size_t line_no, const json& j) {
        Trial t;
        t.trial_id = j.at("trial_id").get<std::string>();
        auto it = key.find(t.trial_id);
        if (it == key.end()) {
          throw ValidationError("trial '" + t.trial_id +
                                "' (trials.jsonl line " + std::to_string(line_no) +
                                ") has no key.jsonl entry");
        }
        t.member = it->second.member;
        t.target_id = it->second.target_id;
        t.subset_ids = j.at("input_ids").get<std::vector<std::string>>();
        if (t.member) {
          if (t.subset_ids.empty() || t.subset_ids.back() != t.target_id) {
            throw ValidationError("trial '" + t.trial_id +
                                  "': member trial input does not end with its "
                                  "target id");
          }
          t.subset_ids.pop_back();
        }
        plan.trials.push_back(std::move(t));
      });

  internal::for_each_jsonl_line(
      dir + "/references.jsonl", [&](size_t, const json& j) {
        ReferenceSet ref;
        ref.ref_id = j.at("ref_id").get<std::string>();
        ref.included_targets =
            j.at("included_targets").get<std::vector<std::string>>();
        plan.references.push_back(std::move(ref));
      });

  validate_plan(plan);
  return plan;
}

std::map<std::string, Corpus> import_synthetic(
    const AuditPlan& plan, const std::string& dir,
    std::vector<std::string>* warnings) {
  const fs::path syn_dir = fs::path(dir) / "synthetic";
  if (!fs::is_directory(syn_dir)) {
    throw IoError("missing synthetic directory '" + syn_dir.string() + "'");
  }

  std::map<std::string, Corpus> out;
  std::vector<std::string> missing;
  std::set<std::string> expected;
  for (const Trial& t : plan.trials) {
    expected.insert(t.trial_id + ".jsonl");
    fs::path p = syn_dir / (t.trial_id + ".jsonl");
    if (!fs::exists(p)) {
      missing.push_back(t.trial_id);
      continue;
    }
    Corpus c = load_corpus(p.string());
    if (c.empty()) {
      throw ValidationError("synthetic corpus for trial '" + t.trial_id +
                            "' is empty");
    }
    out.emplace(t.trial_id, std::move(c));
  }
  if (!missing.empty()) {
    std::string msg = "missing synthetic corpora for " +
                      std::to_string(missing.size()) + " trial(s):";
    size_t shown = std::min<size_t>(missing.size(), 10);
    for (size_t i = 0; i < shown; ++i) msg += " '" + missing[i] + "'";
    if (missing.size() > shown) msg += " ...";
    throw ValidationError(msg);
  }
  if (warnings) {
    std::vector<std::string> unknown;
    for (const auto& entry : fs::directory_iterator(syn_dir)) {
      std::string fname = entry.path().filename().string();
      if (!expected.count(fname)) unknown.push_back(fname);
    }
    std::sort(unknown.begin(), unknown.end());
    for (const std::string& fname : unknown) {
      warnings->push_back("ignoring unknown file '" + fname + "' in '" +
                          syn_dir.string() + "'");
    }
  }
  return out;
}

}  // namespace dpaudit
