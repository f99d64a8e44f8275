// Copyright 2026 The qfidkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Randomized lemma sweeps. A trial's operands come from stream_rng(seed', i)
// with seed' mixing the sweep seed and lemma name, so reports are identical at
// any worker count: outcomes are stored by trial index and reduced in order.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qfidkit/random.hpp"
#include "qfidkit/serialization.hpp"

namespace qfid {

/// Sweep parameters. The named reals are the lemma hypotheses' bounds.
struct CheckConfig {
  int trials = 1000;
  Index dim = 4;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Allowed excess of a measured quantity over its bound.
  double slack = 1e-8;
  /// Strength s of (1 - s) identity + s random perturbations.
  double perturbation = 0.1;
  /// Largest Frobenius norm of the Hermitian perturbation in F_e continuity.
  double delta_max = 0.2;
  /// Target infidelity for encoding-irrelevance instances.
  double epsilon = 0.01;

  void validate() const {
    if (trials < 1) throw PreconditionError("CheckConfig: trials must be >= 1");
    if (dim < 2) throw PreconditionError("CheckConfig: dim must be >= 2");
    if (workers < 1) throw PreconditionError("CheckConfig: workers must be >= 1");
  }
};

struct Metric {
  enum class Reduce { max, min, sum };
  std::string name;
  double value = 0.0;
  Reduce reduce = Reduce::max;
};

/// violation = measured - bound (negative values are slack).
struct TrialOutcome {
  double violation = 0.0;
  Json instance;
  bool skipped = false;
  std::vector<Metric> metrics;
};

struct CheckReport {
  std::string lemma;
  int trials = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double max_violation = -INFINITY;
  int violations = 0;
  int skipped = 0;
  int worst_trial = -1;
  Json worst_case_instance;
  std::map<std::string, double> metrics;
  bool pass = false;

  Json to_json() const {
    Json m = Json::object();
    for (const auto& [k, v] : metrics) m[k] = v;
    Json j = Json::object();
    j["lemma"] = lemma;
    j["trials"] = trials;
    j["seed"] = seed;
    j["tolerance"] = tolerance;
    j["max_violation"] = max_violation;
    j["max_slack"] = -max_violation;
    j["violations"] = violations;
    j["skipped"] = skipped;
    j["worst_trial"] = worst_trial;
    j["worst_case_instance"] = worst_case_instance;
    j["metrics"] = m;
    j["pass"] = pass;
    return j;
  }
};

inline std::uint64_t lemma_salt(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Runs fn(trial_index, rng) -> TrialOutcome over cfg.trials trials on up to
/// cfg.workers threads. An exception in any trial is rethrown (lowest index first).
template <typename TrialFn>
CheckReport run_trials(std::string lemma, const CheckConfig& cfg, double tolerance, TrialFn&& fn) {
  cfg.validate();
  const int n = cfg.trials;
  const std::uint64_t stream_seed = cfg.seed ^ lemma_salt(lemma);
  std::vector<TrialOutcome> outcomes(static_cast<size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        Rng rng = stream_rng(stream_seed, static_cast<std::uint64_t>(i));
        outcomes[size_t(i)] = fn(i, rng);
      } catch (...) {
        errors[size_t(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(cfg.workers, 1, n);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CheckReport r;
  r.lemma = std::move(lemma);
  r.trials = n;
  r.seed = cfg.seed;
  r.tolerance = tolerance;
  std::map<std::string, Metric::Reduce> modes;
  for (int i = 0; i < n; ++i) {
    const TrialOutcome& o = outcomes[size_t(i)];
    for (const Metric& m : o.metrics) {
      auto [it, fresh] = r.metrics.try_emplace(m.name, m.value);
      modes.try_emplace(m.name, m.reduce);
      if (fresh) continue;
      switch (m.reduce) {
        case Metric::Reduce::max: it->second = std::max(it->second, m.value); break;
        case Metric::Reduce::min: it->second = std::min(it->second, m.value); break;
        case Metric::Reduce::sum: it->second += m.value; break;
      }
    }
    if (o.skipped) {
      ++r.skipped;
      continue;
    }
    if (o.violation > tolerance) ++r.violations;
    if (o.violation > r.max_violation) {
      r.max_violation = o.violation;
      r.worst_trial = i;
      r.worst_case_instance = o.instance;
    }
  }
  r.pass = r.violations == 0 && r.skipped < n;
  return r;
}

}  // namespace qfid
