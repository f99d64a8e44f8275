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

// Acceptance gate: runs every acceptance criterion and prints one PASS/FAIL
// line each. Exit status is nonzero when any criterion fails.
//
// Usage: qfidkit_acceptance [path-to-qfidkit-cli]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qfidkit/commands.hpp"
#include "oracles.hpp"

namespace {

using namespace qfid;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

int hardware_workers() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

CheckConfig config(int trials, Index dim, std::uint64_t seed) {
  CheckConfig cfg;
  cfg.trials = trials;
  cfg.dim = dim;
  cfg.seed = seed;
  cfg.workers = hardware_workers();
  return cfg;
}

void require_clean(Outcome& o, const CheckReport& r) {
  o.require(r.violations == 0, r.lemma + " violations = " + std::to_string(r.violations));
  o.require(r.skipped == 0, r.lemma + " skipped = " + std::to_string(r.skipped));
  o.require(r.trials > 0 && r.pass, r.lemma + " pass flag");
  o.note(r.lemma + " max_violation " + fmt(r.max_violation));
}

Outcome ac1() {
  Outcome o;
  const CheckReport r = check_fe_equivalence(config(1000, 8, 101));
  require_clean(o, r);
  o.require(r.tolerance == 1e-9, "tolerance is 1e-9");
  return o;
}

Outcome ac2() {
  Outcome o;
  const CheckConfig cfg = config(1000, 8, 102);
  for (const auto& run : std::vector<std::function<CheckReport(const CheckConfig&)>>{
           check_convexity, check_composition_lemma, check_close_final, check_fe_continuity,
           check_entropy_continuity, check_conditional_entropy_continuity}) {
    const CheckReport r = run(cfg);
    require_clean(o, r);
    o.require(r.tolerance == 1e-8, r.lemma + " slack is 1e-8");
    if (r.lemma == "composition") o.require(r.metrics.at("max_eta") <= 0.1 + 1e-12, "composition eta <= 0.1");
    if (r.lemma == "cond-entropy-continuity") o.require(r.metrics.at("min_fidelity") > 5.0 / 9.0, "F > 5/9");
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  const CheckReport r = check_three_halves(config(500, 6, 103), 1e-4);
  require_clean(o, r);
  o.require(r.metrics.at("max_eta") <= 0.1, "oracle-certified eta <= 0.1");
  o.note("max_eta " + fmt(r.metrics.at("max_eta")));
  return o;
}

Outcome ac4() {
  Outcome o;
  const CheckReport r = check_isometry_extraction(config(1000, 4, 104));
  require_clean(o, r);
  o.require(r.metrics.at("min_fe_before") >= 0.9, "instances have F_e(rho, A o E) >= 0.9");
  o.require(r.metrics.at("max_maximality_deviation") < 1e-9, "maximality < 1e-9");
  o.require(r.metrics.at("max_off_diagonal_mass") < 1e-10, "off-diagonal mass < 1e-10");
  o.note("min F_e(A o E) " + fmt(r.metrics.at("min_fe_before")));
  return o;
}

Outcome ac5() {
  Outcome o;
  const CheckReport r = check_fcc(config(200, 4, 105));
  require_clean(o, r);
  o.require(r.metrics.at("max_eta") <= 0.05, "total fidelity >= 0.95");
  o.require(r.metrics.at("min_fe") >= 0.90, "returned F_e >= 0.90");
  o.note("min F_e " + fmt(r.metrics.at("min_fe")));
  return o;
}

Outcome ac6() {
  Outcome o;
  const IIDSource src(DensityOperator::diagonal(std::vector<double>{0.9, 0.1}));
  const double eps = 0.15;
  const double delta = 0.1;
  double worst = 0.0;
  for (const QaepRow& row : qaep_profile(src, eps, 4, 12)) {
    const qfid_test::BinomialOracle oracle = qfid_test::binomial_typical(0.1, row.n, eps);
    worst = std::max(worst, std::abs(row.weight - oracle.weight));
    o.require(std::abs(row.weight - oracle.weight) <= 1e-12, "weight at n=" + std::to_string(row.n));
    o.require(static_cast<double>(row.dim) == oracle.dim, "dimension at n=" + std::to_string(row.n));
    const double s = src.entropy_rate();
    o.require(row.dim <= std::exp2(row.n * (s + eps)), "upper dim bound at n=" + std::to_string(row.n));
    if (row.weight >= 1.0 - delta) {
      o.require((1.0 - delta) * std::exp2(row.n * (s - eps)) <= row.dim, "lower dim bound at n=" + std::to_string(row.n));
    }
  }
  o.note("max weight deviation " + fmt(worst));
  return o;
}

Outcome ac7() {
  Outcome o;
  const DensityOperator half = DensityOperator::maximally_mixed(2);
  for (int i = 0; i <= 5; ++i) {
    const double p = 0.1 * i;
    const double v = coherent_information(half, channel_zoo("dephasing", p)).value;
    o.require(std::abs(v - (1.0 - qfid_test::h2(p))) <= 1e-8, "dephasing p=" + fmt(p));
  }
  o.require(std::abs(coherent_information(half, channel_zoo("depolarizing", 1.0)).value + 1.0) <= 1e-8,
            "depolarizing(1) gives -1");
  Rng rng = stream_rng(107, 0);
  for (Index d = 2; d <= 6; ++d) {
    const DensityOperator rho = random_density(rng, d);
    const double v = coherent_information(rho, identity_operation(d)).value;
    o.require(std::abs(v - qfid_test::entropy_bits(rho.matrix())) <= 1e-9, "identity at d=" + std::to_string(d));
  }
  return o;
}

// Known feasible inputs: I/d, pure |0>, and the diagonal family diag(1-q, q) on a fine grid.
double best_feasible(const QuantumOperation& ch) {
  double best = coherent_information(DensityOperator::maximally_mixed(ch.dim_in()), ch).value;
  for (int i = 0; i <= 200; ++i) {
    const double q = i / 200.0;
    const DensityOperator rho = DensityOperator::diagonal(std::vector<double>{1.0 - q, q});
    best = std::max(best, coherent_information(rho, ch).value);
  }
  return best;
}

Outcome ac8() {
  Outcome o;
  CoherentOptimizerConfig cfg;
  cfg.workers = hardware_workers();
  double worst = INFINITY;
  for (std::string_view name : kZooNames) {
    for (double p : {0.0, 0.1, 0.25, 0.4, 0.6}) {
      const QuantumOperation ch = channel_zoo(name, p);
      const double found = maximize_coherent_information(ch, 1, cfg).value;
      const double feasible = best_feasible(ch);
      worst = std::min(worst, found - feasible);
      o.require(found >= feasible - 1e-5, std::string(name) + " p=" + fmt(p) + " dominance");
    }
  }
  for (double p : {0.05, 0.1}) {
    const QuantumOperation ch = channel_zoo("depolarizing", p);
    const double one = maximize_coherent_information(ch, 1, cfg).value_per_use;
    const double two = maximize_coherent_information(ch, 2, cfg).value_per_use;
    o.require(two >= one - 1e-6, "depolarizing p=" + fmt(p) + " n=2 per use");
    o.note("depolarizing " + fmt(p) + ": n=1 " + fmt(one) + ", n=2 " + fmt(two));
  }
  o.note("min dominance margin " + fmt(worst));
  return o;
}

Outcome ac9() {
  Outcome o;
  int failures = 0;
  double worst_recon = 0.0;
  for (int t = 0; t < 200; ++t) {
    Rng rng = stream_rng(109, static_cast<std::uint64_t>(t));
    const Index d = uniform_index(rng, 4, 6);
    const DensityOperator rho = random_density(rng, d, 4);
    const QuantumOperation op = perturbed_identity(rng, d, uniform(rng, 0.0, 0.3));
    MinFidelityConfig mcfg;
    mcfg.seed = rng();
    const StrippingResult r = strip_support(rho, op, 2, mcfg);
    const StrippingEnsemble& ens = r.ensemble;
    const double lambda_max = rho.spectrum().values(0);
    bool ok = ens.rank() == 4;
    const double recon = (ens.reconstruct() - rho.matrix()).norm();
    worst_recon = std::max(worst_recon, recon);
    ok = ok && recon < 1e-8 && std::abs(ens.total_weight() - 1.0) <= 1e-10;
    for (Index i = 0; i < ens.rank(); ++i) {
      const StrippingStep& st = ens.steps[size_t(i)];
      ok = ok && st.rank_before == 4 - i && st.q <= lambda_max + 1e-10;
      const Matrix over = ens.residual(i) - (st.q + 1e-6) * st.state * st.state.adjoint();
      ok = ok && eig_hermitian(hermitian_part(over)).values.minCoeff() < 0.0;
    }
    if (!ok) ++failures;
  }
  o.require(failures == 0, std::to_string(failures) + " instances broke an ensemble invariant");
  o.note("max reconstruction error " + fmt(worst_recon));
  return o;
}

Outcome ac10() {
  Outcome o;
  CheckConfig cfg = config(100, 4, 110);
  cfg.epsilon = 0.01;
  const CheckReport r = check_encoding_irrelevance(cfg);
  require_clean(o, r);
  o.require(std::abs(r.metrics.at("max_epsilon") - 0.01) < 1e-6, "instances at eps = 0.01");
  o.note("min slack " + fmt(r.metrics.at("min_slack")) + ", max gap " + fmt(r.metrics.at("max_gap")));
  return o;
}

Json run_cli_check(const std::string& cli, int workers, const std::string& out) {
  const std::string cmd = "QFIDKIT_WORKERS=" + std::to_string(workers) + " \"" + cli +
                          "\" check --lemma all --trials 200 --seed 7 --out \"" + out + "\"";
  const int status = std::system(cmd.c_str());
  if (status != 0) throw std::runtime_error("cli exited with status " + std::to_string(status));
  std::ifstream in(out);
  return Json::parse(in);
}

Outcome ac11(const std::string& cli) {
  Outcome o;
  Json a;
  Json b;
  if (!cli.empty()) {
    const std::string dir = std::filesystem::temp_directory_path().string();
    a = run_cli_check(cli, 1, dir + "/qfidkit_ac11_w1.json");
    b = run_cli_check(cli, 8, dir + "/qfidkit_ac11_w8.json");
    o.note("via CLI");
  } else {
    CheckOptions opt;
    opt.trials = 200;
    opt.seed = 7;
    opt.workers = 1;
    a = check_report(opt);
    opt.workers = 8;
    b = check_report(opt);
    o.note("in process");
  }
  o.require(a["sections"].size() == 11, "11 sections");
  o.require(without_wall_time(a).dump() == without_wall_time(b).dump(), "identical reports");
  return o;
}

struct Criterion {
  const char* id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria = {
      {"AC1", "fidelity equivalence", 10, ac1},
      {"AC2", "lemma suite", 120, ac2},
      {"AC3", "three-halves theorem", 120, ac3},
      {"AC4", "isometry extraction", 60, ac4},
      {"AC5", "FCC derandomization", 60, ac5},
      {"AC6", "QAEP oracle match", 5, ac6},
      {"AC7", "coherent information closed forms", 5, ac7},
      {"AC8", "optimizer dominance", 300, ac8},
      {"AC9", "stripping ensemble", 120, ac9},
      {"AC10", "encoding-irrelevance continuity", 60, ac10},
      {"AC11", "determinism", 60, [&] { return ac11(cli); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.limit_seconds, "runtime " + fmt(secs) + " s over the " + fmt(c.limit_seconds) + " s limit");
    if (!o.pass) ++failed;
    std::cout << c.id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << fmt(secs) << " s)  "
              << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
