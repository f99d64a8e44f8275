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

// Command implementations behind the qfidkit executable. Each command returns
// its report text and exit code; the executable only parses flags and writes.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qfidkit/capacity.hpp"
#include "qfidkit/fidelity.hpp"
#include "qfidkit/procedures.hpp"
#include "qfidkit/sources.hpp"

namespace qfid {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitPass = 0, kExitViolation = 1, kExitUsage = 2 };

/// Invalid flags or operands; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommandResult {
  int exit_code = kExitPass;
  std::string text;
};

/// Worker count: QFIDKIT_WORKERS when set, otherwise the hardware concurrency.
inline int workers_from_env() {
  if (const char* env = std::getenv("QFIDKIT_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
    throw UsageError("QFIDKIT_WORKERS must be a positive integer");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Every report carries the manifest that produced it. Only wall_time_seconds
/// varies between identical runs.
inline Json manifest(const std::string& command, std::uint64_t seed, const Json& config, double wall_time) {
  Json m = Json::object();
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["version"] = kVersion;
  m["wall_time_seconds"] = wall_time;
  return m;
}

inline Json report_envelope(const std::string& command, std::uint64_t seed, const Json& config, double wall_time) {
  Json r = Json::object();
  r["schema"] = kSchemaVersion;
  r["manifest"] = manifest(command, seed, config, wall_time);
  return r;
}

/// Drops the wall-time field so identical runs compare equal.
inline Json without_wall_time(Json report) {
  if (report.contains("manifest")) report["manifest"].erase("wall_time_seconds");
  return report;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// Parsing helpers

inline std::vector<double> parse_doubles(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

/// "a,b,c" or an inclusive range "start:stop:step".
inline std::vector<double> parse_param_list(const std::string& text, const char* flag) {
  if (text.find(':') == std::string::npos) return parse_doubles(text, flag);
  std::string spec = text;
  for (char& c : spec) c = c == ':' ? ',' : c;
  const std::vector<double> v = parse_doubles(spec, flag);
  if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) {
    throw UsageError(std::string(flag) + ": range must be start:stop:step with step > 0");
  }
  std::vector<double> out;
  const long count = std::lround(std::floor((v[1] - v[0]) / v[2] + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(v[0] + static_cast<double>(k) * v[2]);
  return out;
}

/// "n" or an inclusive integer range "first:last".
inline std::pair<int, int> parse_int_range(const std::string& text, const char* flag) {
  try {
    const size_t colon = text.find(':');
    size_t used = 0;
    if (colon == std::string::npos) {
      const int n = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {n, n};
    }
    const std::string a = text.substr(0, colon);
    const std::string b = text.substr(colon + 1);
    const int first = std::stoi(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    const int last = std::stoi(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    return {first, last};
  } catch (const std::invalid_argument&) {
    throw UsageError(std::string(flag) + ": expected an integer or first:last");
  } catch (const std::out_of_range&) {
    throw UsageError(std::string(flag) + ": value out of range");
  }
}

inline std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto [a, b] = parse_int_range(item, flag);
    for (int n = a; n <= b; ++n) out.push_back(n);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

inline DensityOperator parse_base(const std::string& text) {
  const std::vector<double> p = parse_doubles(text, "--base");
  try {
    return DensityOperator::diagonal(p);
  } catch (const Error& e) {
    throw UsageError(std::string("--base: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError("malformed JSON in '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// check

struct CheckOptions {
  std::string lemma = "all";
  int trials = 200;
  Index dim = 4;
  std::uint64_t seed = 1;
  int workers = 1;
};

using LemmaRunner = std::function<CheckReport(const CheckConfig&)>;

inline const std::vector<std::pair<std::string, LemmaRunner>>& lemma_registry() {
  static const std::vector<std::pair<std::string, LemmaRunner>> registry = {
      {"fe-equivalence", check_fe_equivalence},
      {"convexity", check_convexity},
      {"composition", check_composition_lemma},
      {"close-final", check_close_final},
      {"fe-continuity", check_fe_continuity},
      {"entropy-continuity", check_entropy_continuity},
      {"cond-entropy-continuity", check_conditional_entropy_continuity},
      {"three-halves", [](const CheckConfig& c) { return check_three_halves(c); }},
      {"isometry", check_isometry_extraction},
      {"fcc", check_fcc},
      {"encoding-irrelevance", check_encoding_irrelevance},
  };
  return registry;
}

inline std::vector<std::string> lemma_names() {
  std::vector<std::string> names{"all"};
  for (const auto& [name, _] : lemma_registry()) names.push_back(name);
  return names;
}

inline Json check_report(const CheckOptions& opt, int* exit_code = nullptr) {
  if (opt.trials < 1) throw UsageError("--trials must be >= 1");
  if (opt.dim < 2) throw UsageError("--dim must be >= 2");
  std::vector<std::pair<std::string, LemmaRunner>> selected;
  for (const auto& entry : lemma_registry()) {
    if (opt.lemma == "all" || opt.lemma == entry.first) selected.push_back(entry);
  }
  if (selected.empty()) throw UsageError("unknown lemma selector '" + opt.lemma + "'");
  const Stopwatch clock;
  CheckConfig cfg;
  cfg.trials = opt.trials;
  cfg.dim = opt.dim;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  Json sections = Json::array();
  bool pass = true;
  for (const auto& [name, run] : selected) {
    const CheckReport r = run(cfg);
    pass = pass && r.pass;
    sections.push_back(r.to_json());
  }
  Json config = Json::object();
  config["lemma"] = opt.lemma;
  config["trials"] = opt.trials;
  config["dim"] = opt.dim;
  Json report = report_envelope("check", opt.seed, config, clock.seconds());
  report["sections"] = sections;
  report["pass"] = pass;
  if (exit_code) *exit_code = pass ? kExitPass : kExitViolation;
  return report;
}

inline CommandResult cmd_check(const CheckOptions& opt) {
  CommandResult r;
  r.text = check_report(opt, &r.exit_code).dump(2) + "\n";
  return r;
}

// ---------------------------------------------------------------------------
// coherent-info

struct CoherentInfoOptions {
  std::string channel = "dephasing";
  std::vector<double> params{0.1};
  std::vector<int> ns{1};
  std::uint64_t seed = 1;
  int workers = 1;
};

inline CommandResult cmd_coherent_info(const CoherentInfoOptions& opt) {
  if (std::find(kZooNames.begin(), kZooNames.end(), opt.channel) == kZooNames.end()) {
    throw UsageError("unknown channel '" + opt.channel + "'");
  }
  std::ostringstream out;
  out.precision(12);
  out << "channel,param,n,value_per_use,converged,feasible_value\n";
  for (double p : opt.params) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("--param values must lie in [0, 1]");
    const QuantumOperation ch = channel_zoo(opt.channel, p);
    for (int n : opt.ns) {
      if (n < 1 || n > 3 || (n == 3 && ch.dim_in() != 2)) throw UsageError("--n must be 1, 2 or 3");
      CoherentOptimizerConfig cfg;
      cfg.seed = opt.seed;
      cfg.workers = opt.workers;
      const UpperBoundResult u = maximize_coherent_information(ch, n, cfg);
      const double feasible = coherent_information(DensityOperator::maximally_mixed(ch.dim_in()), ch).value;
      out << opt.channel << ',' << p << ',' << n << ',' << u.value_per_use << ','
          << (u.converged ? "true" : "false") << ',' << feasible << '\n';
    }
  }
  return {kExitPass, out.str()};
}

// ---------------------------------------------------------------------------
// typical / qaep

struct TypicalOptions {
  std::string base = "0.9,0.1";
  int n = 10;
  double eps = 0.15;
  double delta = 0.1;
};

inline CommandResult cmd_typical(const TypicalOptions& opt) {
  if (!(opt.eps > 0.0)) throw UsageError("--eps must be positive");
  if (opt.n < 1) throw UsageError("--n must be >= 1");
  const Stopwatch clock;
  const IIDSource src(parse_base(opt.base), "diag");
  const TypicalSubspace t = typical_subspace(src, opt.n, opt.eps);
  Json config = Json::object();
  config["base"] = opt.base;
  config["n"] = opt.n;
  config["eps"] = opt.eps;
  config["delta"] = opt.delta;
  Json report = report_envelope("typical", 0, config, clock.seconds());
  report["typical"] = t.to_json();
  report["dim_lower_bound"] = t.dim_lower_bound(opt.delta);
  report["dim_bounds_hold"] = t.dim_bounds_hold(opt.delta);
  report["eigenvalues"] = t.eigenvalues();
  return {t.dim_bounds_hold(opt.delta) ? kExitPass : kExitViolation, report.dump(2) + "\n"};
}

inline CommandResult cmd_qaep(const std::string& base, double eps, int n_first, int n_last) {
  if (!(eps > 0.0)) throw UsageError("--eps must be positive");
  const IIDSource src(parse_base(base), "diag");
  try {
    return {kExitPass, qaep_csv(qaep_profile(src, eps, n_first, n_last))};
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------
// strip / extract

namespace detail {

inline QuantumOperation zoo_or_usage(const std::string& name, double p) {
  if (std::find(kZooNames.begin(), kZooNames.end(), name) == kZooNames.end()) {
    throw UsageError("unknown channel '" + name + "'");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("--param must lie in [0, 1]");
  return channel_zoo(name, p);
}

template <typename F>
auto parse_operand(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw UsageError(std::string("malformed ") + what + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(std::string("invalid ") + what + ": " + e.what());
  }
}

}  // namespace detail

/// Operands: --input {"rho": ..., "op": ...} or --base with a zoo channel.
struct StripOptions {
  std::string input;
  std::string base = "0.5,0.5";
  std::string channel = "dephasing";
  double param = 0.2;
  Index n0 = 1;
  std::uint64_t seed = 1;
};

inline CommandResult cmd_strip(const StripOptions& opt) {
  const Stopwatch clock;
  DensityOperator rho = DensityOperator::maximally_mixed(1);
  std::optional<QuantumOperation> op;
  Json provenance = Json::object();
  if (!opt.input.empty()) {
    const Json in = read_json_file(opt.input);
    rho = detail::parse_operand("rho", [&] { return density_from_json(in.at("rho")); });
    op.emplace(detail::parse_operand("op", [&] { return operation_from_json(in.at("op")); }));
    provenance["input"] = opt.input;
  } else {
    rho = parse_base(opt.base);
    const QuantumOperation single = detail::zoo_or_usage(opt.channel, opt.param);
    Index d = single.dim_in();
    int power = 1;
    while (d < rho.dim() && power < kDefaultTensorPowerCap) {
      d *= single.dim_in();
      ++power;
    }
    if (d != rho.dim()) throw UsageError("--base dimension must be a power (at most 3) of the channel dimension");
    op.emplace(tensor_power(single, power));
    provenance["base"] = opt.base;
    provenance["channel"] = opt.channel;
    provenance["param"] = opt.param;
  }
  MinFidelityConfig mcfg;
  mcfg.seed = opt.seed;
  const StrippingResult r = detail::parse_operand("operands", [&] { return strip_support(rho, *op, opt.n0, mcfg); });

  // Ensemble invariants.
  const auto& steps = r.ensemble.steps;
  const double lambda_max = rho.spectrum().values(0);
  double max_q = 0.0;
  bool ranks = true;
  bool maximal = true;
  for (size_t i = 0; i < steps.size(); ++i) {
    max_q = std::max(max_q, steps[i].q);
    ranks = ranks && steps[i].rank_before == r.ensemble.rank() - static_cast<Index>(i);
    const Matrix before = r.ensemble.residual(static_cast<Index>(i));
    const Matrix over = before - (steps[i].q + 1e-6) * steps[i].state * steps[i].state.adjoint();
    maximal = maximal && eig_hermitian(hermitian_part(over)).values.minCoeff() < 0.0;
  }
  Json inv = Json::object();
  inv["reconstruction_error"] = (r.ensemble.reconstruct() - rho.matrix()).norm();
  inv["total_weight"] = r.ensemble.total_weight();
  inv["rank_decrements_exact"] = ranks;
  inv["max_q"] = max_q;
  inv["lambda_max"] = lambda_max;
  inv["q_maximal"] = maximal;
  inv["gamma_within_bound"] = r.gamma <= r.gamma_bound + kOptimizerSlack;
  inv["convexity_identity"] = r.convexity_lhs >= r.fe - kOptimizerSlack;
  const bool ok = inv["reconstruction_error"].get<double>() < 1e-8 &&
                  std::abs(r.ensemble.total_weight() - 1.0) < 1e-10 && ranks && max_q <= lambda_max + 1e-10 &&
                  maximal && inv["gamma_within_bound"].get<bool>() && inv["convexity_identity"].get<bool>();
  inv["pass"] = ok;

  Json config = Json::object();
  config["n0"] = opt.n0;
  config["operands"] = provenance;
  Json report = report_envelope("strip", opt.seed, config, clock.seconds());
  report["result"] = r.to_json();
  report["invariants"] = inv;
  return {ok ? kExitPass : kExitViolation, report.dump(2) + "\n"};
}

/// Operands: --input {"rho", "E", "A"} or a built-in fixture.
struct ExtractOptions {
  std::string input;
  std::string fixture = "perfect";
  std::uint64_t seed = 1;
};

inline CommandResult cmd_extract(const ExtractOptions& opt) {
  const Stopwatch clock;
  Json provenance = Json::object();
  DensityOperator rho = DensityOperator::maximally_mixed(1);
  std::optional<QuantumOperation> e;
  std::optional<QuantumOperation> a;
  if (!opt.input.empty()) {
    const Json in = read_json_file(opt.input);
    rho = detail::parse_operand("rho", [&] { return density_from_json(in.at("rho")); });
    e.emplace(detail::parse_operand("E", [&] { return operation_from_json(in.at("E")); }));
    a.emplace(detail::parse_operand("A", [&] { return operation_from_json(in.at("A")); }));
    provenance["input"] = opt.input;
  } else if (opt.fixture == "perfect" || opt.fixture == "unitary" || opt.fixture == "perturbed") {
    Rng rng = stream_rng(opt.seed, 0);
    if (opt.fixture == "perturbed") {
      const ExtractionInstance inst = random_extraction_instance(rng, 2, 3, 0.05);
      rho = inst.rho;
      e.emplace(inst.e);
      a.emplace(inst.a);
    } else {
      const Index dc = opt.fixture == "perfect" ? 3 : 2;
      const Matrix v = random_isometry(rng, dc, 2);
      rho = random_density(rng, 2);
      e.emplace(std::vector<Matrix>{v});
      a.emplace(opt.fixture == "perfect" ? reversal_decoder(v) : QuantumOperation({Matrix(v.adjoint())}));
    }
    provenance["fixture"] = opt.fixture;
  } else {
    throw UsageError("unknown fixture '" + opt.fixture + "'");
  }
  const IsometryExtraction x = detail::parse_operand("operands", [&] { return extract_isometry(rho, *e, *a); });
  const bool ok = x.fe_after >= 2.0 * x.fe_before - 1.0 - 1e-8 && x.maximality_deviation < 1e-9 &&
                  x.off_diagonal_mass < 1e-10;
  Json config = Json::object();
  config["operands"] = provenance;
  Json report = report_envelope("extract", opt.seed, config, clock.seconds());
  report["result"] = x.to_json();
  report["pass"] = ok;
  return {ok ? kExitPass : kExitViolation, report.dump(2) + "\n"};
}

}  // namespace qfid
