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

// Coherent information, entropy continuity, classical overlaps, observed
// channels and the finite-n coherent-information maximizer.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "qfidkit/channels.hpp"
#include "qfidkit/checks.hpp"
#include "qfidkit/entropy.hpp"
#include "qfidkit/fidelity.hpp"
#include "qfidkit/linalg.hpp"
#include "qfidkit/procedures.hpp"
#include "qfidkit/random.hpp"
#include "qfidkit/serialization.hpp"

namespace qfid {

// ---------------------------------------------------------------------------
// Classical distributions

class ClassicalDistribution {
 public:
  explicit ClassicalDistribution(RealVector p, const Tolerances& tol = {}) : p_(std::move(p)) {
    if (p_.size() < 1) throw ShapeError("ClassicalDistribution: empty");
    if (p_.minCoeff() < -tol.psd) throw PreconditionError("ClassicalDistribution: negative entry");
    if (std::abs(p_.sum() - 1.0) > tol.trace) throw PreconditionError("ClassicalDistribution: not normalized");
    p_ = p_.cwiseMax(0.0);
  }

  /// Eigenvalues of rho, in decreasing order.
  static ClassicalDistribution spectrum_of(const Matrix& rho) {
    return ClassicalDistribution(eig_hermitian(hermitian_part(rho)).values.cwiseMax(0.0));
  }

  Index size() const { return p_.size(); }
  const RealVector& probabilities() const { return p_; }

 private:
  RealVector p_;
};

inline void require_same_length(const ClassicalDistribution& p, const ClassicalDistribution& q, const char* what) {
  if (p.size() != q.size()) throw ShapeError(std::string(what) + ": distributions differ in length");
}

/// (1/2) sum |p_i - q_i|.
inline double kolmogorov_distance(const ClassicalDistribution& p, const ClassicalDistribution& q) {
  require_same_length(p, q, "kolmogorov_distance");
  return 0.5 * (p.probabilities() - q.probabilities()).cwiseAbs().sum();
}

/// sum sqrt(p_i q_i).
inline double bhattacharyya_overlap(const ClassicalDistribution& p, const ClassicalDistribution& q) {
  require_same_length(p, q, "bhattacharyya_overlap");
  return p.probabilities().cwiseProduct(q.probabilities()).cwiseSqrt().sum();
}

// ---------------------------------------------------------------------------
// Coherent information

struct CoherentInfoResult {
  double value = 0.0;
  double output_entropy = 0.0;
  double joint_entropy = 0.0;
  double output_trace = 0.0;

  Json to_json() const {
    Json j = Json::object();
    j["value"] = value;
    j["output_entropy"] = output_entropy;
    j["joint_entropy"] = joint_entropy;
    j["output_trace"] = output_trace;
    return j;
  }
};

/// S(E(rho)/t) - S((I (x) E)(|psi><psi|)/t) with t = tr E(rho) and psi the
/// canonical purification of rho.
inline CoherentInfoResult coherent_information(const DensityOperator& rho, const QuantumOperation& op,
                                               const Tolerances& tol = {}) {
  if (op.dim_in() != rho.dim()) throw ShapeError("coherent_information: dimension mismatch");
  const Purification psi = purify(rho);
  const Matrix joint = apply_on_second(op, psi.projector(), psi.dim_r);
  const double t = joint.trace().real();
  if (!(t > tol.trace)) throw DegenerateInputError("coherent_information: output trace " + std::to_string(t));
  const Matrix joint_n = joint / t;
  CoherentInfoResult r;
  r.output_trace = t;
  r.output_entropy = von_neumann_entropy(partial_trace(joint_n, Subsystem::first, psi.dim_r, op.dim_out()), tol);
  r.joint_entropy = von_neumann_entropy(joint_n, tol);
  r.value = r.output_entropy - r.joint_entropy;
  return r;
}

/// The same quantity from the environment Gram matrix W_ij = tr(A_i rho A_j^dagger),
/// whose nonzero spectrum equals that of the joint state. Accepts any positive
/// rho of unit trace; used inside the optimizer.
inline double coherent_information_value(const Matrix& rho, const QuantumOperation& op) {
  const Index k = static_cast<Index>(op.size());
  std::vector<Matrix> arho;
  arho.reserve(size_t(k));
  Matrix out = Matrix::Zero(op.dim_out(), op.dim_out());
  for (const Matrix& a : op.kraus()) {
    arho.push_back(a * rho);
    out.noalias() += arho.back() * a.adjoint();
  }
  Matrix w(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = i; j < k; ++j) {
      const Complex v = arho[size_t(i)].cwiseProduct(op.kraus()[size_t(j)].conjugate()).sum();
      w(i, j) = v;
      w(j, i) = std::conj(v);
    }
  }
  const double t = out.trace().real();
  const RealVector so = eig_hermitian(hermitian_part(out / t)).values.cwiseMax(0.0);
  const RealVector sj = eig_hermitian(hermitian_part(w / t)).values.cwiseMax(0.0);
  return shannon_entropy(so) - shannon_entropy(sj);
}

/// S(rho_RQ) - S(tr_R rho_RQ).
inline double conditional_entropy(const Matrix& rho_rq, Index dim_r, Index dim_q) {
  require_square(rho_rq, "conditional_entropy");
  if (rho_rq.rows() != dim_r * dim_q) throw ShapeError("conditional_entropy: dimensions do not factor");
  return von_neumann_entropy(rho_rq) - von_neumann_entropy(partial_trace(rho_rq, Subsystem::first, dim_r, dim_q));
}

// ---------------------------------------------------------------------------
// Continuity checks

namespace detail {

inline Matrix unitary_exp(const Matrix& h, double theta) {
  const EigResult e = eig_hermitian(h);
  Vector phases(e.values.size());
  for (Index k = 0; k < e.values.size(); ++k) phases(k) = std::polar(1.0, theta * e.values(k));
  return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

// (1-t) U rho U^dagger + t sigma with U = exp(i theta H).
inline Matrix perturb_density(Rng& rng, const Matrix& rho, double theta_max, double t_max) {
  const Index d = rho.rows();
  const Matrix u = unitary_exp(random_hermitian(rng, d), uniform(rng, 0.0, theta_max));
  const double t = uniform(rng, 0.0, t_max);
  return hermitian_part((1.0 - t) * u * rho * u.adjoint() + t * random_density(rng, d).matrix());
}

}  // namespace detail

/// |S(r1) - S(r2)| <= 2 sqrt(1-F) log2 d + 1 whenever 2 sqrt(1-F) < 1/3, with
/// the proof chain through sorted spectra checked alongside.
inline CheckReport check_entropy_continuity(const CheckConfig& cfg) {
  return run_trials("entropy-continuity", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index d = uniform_index(rng, 2, cfg.dim);
    const Matrix r1 = random_density(rng, d, uniform_index(rng, 1, d)).matrix();
    double theta = 0.2;
    double t = 0.05;
    Matrix r2;
    double f = 0.0;
    for (int attempt = 0;; ++attempt) {
      r2 = detail::perturb_density(rng, r1, theta, t);
      f = std::min(1.0, uhlmann_fidelity(r1, r2));
      if (2.0 * std::sqrt(1.0 - f) < 1.0 / 3.0 || attempt == 30) break;
      theta *= 0.5;
      t *= 0.5;
    }
    TrialOutcome o;
    o.instance = Json::object();
    o.instance["rho1"] = matrix_to_json(r1);
    o.instance["rho2"] = matrix_to_json(r2);
    o.instance["F"] = f;
    if (!(2.0 * std::sqrt(1.0 - f) < 1.0 / 3.0)) {
      o.skipped = true;
      return o;
    }
    const double s1 = von_neumann_entropy(r1);
    const double s2 = von_neumann_entropy(r2);
    const double root = std::sqrt(1.0 - f);
    const double lemma = std::abs(s1 - s2) - (2.0 * root * std::log2(double(d)) + 1.0);

    const ClassicalDistribution p1 = ClassicalDistribution::spectrum_of(r1);
    const ClassicalDistribution p2 = ClassicalDistribution::spectrum_of(r2);
    const double dk = kolmogorov_distance(p1, p2);
    const double b = std::min(1.0, bhattacharyya_overlap(p1, p2));
    const double kraft = dk - std::sqrt(1.0 - b * b);
    const double overlap = f - b;
    const double weak_kraft = dk - std::sqrt(1.0 - b);
    const double tn = trace_norm(r1 - r2);
    const double fannes = std::abs(s1 - s2) - (tn * std::log2(double(d)) + (tn > 0.0 ? -tn * std::log2(tn) : 0.0));

    o.violation = std::max({lemma, kraft, overlap});
    o.metrics.push_back({"max_lemma_excess", lemma});
    o.metrics.push_back({"max_kraft_excess", kraft});
    o.metrics.push_back({"max_overlap_excess", overlap});
    o.metrics.push_back({"max_fannes_excess", fannes});
    o.metrics.push_back({"max_sqrt_one_minus_b_form_excess", weak_kraft});
    o.metrics.push_back({"sqrt_one_minus_b_form_failures", weak_kraft > cfg.slack ? 1.0 : 0.0, Metric::Reduce::sum});
    return o;
  });
}

/// |S(Q1|R1) - S(Q2|R2)| <= 6 sqrt(1-F) log2 d + 2 whenever F > 5/9.
inline CheckReport check_conditional_entropy_continuity(const CheckConfig& cfg) {
  return run_trials("cond-entropy-continuity", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index d = uniform_index(rng, 2, std::max<Index>(2, std::min<Index>(cfg.dim, 4)));
    const Matrix r1 = random_density(rng, d * d, uniform_index(rng, 1, d * d)).matrix();
    double theta = 1.0;
    double t = 0.3;
    Matrix r2;
    double f = 0.0;
    for (int attempt = 0;; ++attempt) {
      r2 = detail::perturb_density(rng, r1, theta, t);
      f = std::min(1.0, uhlmann_fidelity(r1, r2));
      if (f > 5.0 / 9.0 || attempt == 30) break;
      theta *= 0.5;
      t *= 0.5;
    }
    TrialOutcome o;
    o.instance = Json::object();
    o.instance["rho1"] = matrix_to_json(r1);
    o.instance["rho2"] = matrix_to_json(r2);
    o.instance["F"] = f;
    o.instance["d"] = d;
    if (!(f > 5.0 / 9.0)) {
      o.skipped = true;
      return o;
    }
    const double gap = std::abs(conditional_entropy(r1, d, d) - conditional_entropy(r2, d, d));
    o.violation = gap - (6.0 * std::sqrt(1.0 - f) * std::log2(double(d)) + 2.0);
    o.metrics.push_back({"min_fidelity", f, Metric::Reduce::min});
    return o;
  });
}

// ---------------------------------------------------------------------------
// Observed channels

struct ObservedBranch {
  double weight = 0.0;
  double value = 0.0;
  bool skipped = false;
};

struct ObservedCoherentInfo {
  /// sum_m tr(E_m rho) I_c(rho, N o E_m).
  double total = 0.0;
  /// I_c(rho, N o sum_m E_m).
  double blind = 0.0;
  std::vector<ObservedBranch> branches;
  bool dominates = false;

  Json to_json() const {
    Json b = Json::array();
    for (const auto& x : branches) {
      Json e = Json::object();
      e["weight"] = x.weight;
      e["value"] = x.value;
      e["skipped"] = x.skipped;
      b.push_back(e);
    }
    Json j = Json::object();
    j["total"] = total;
    j["blind"] = blind;
    j["branches"] = b;
    j["dominates"] = dominates;
    return j;
  }
};

inline ObservedCoherentInfo observed_coherent_information(const DensityOperator& rho, const QuantumOperation& n,
                                                          const Instrument& instrument, const Tolerances& tol = {}) {
  ObservedCoherentInfo out;
  for (const QuantumOperation& e : instrument.branches()) {
    ObservedBranch b;
    b.weight = qfid::apply(e, rho).trace().real();
    if (!(b.weight > tol.trace)) {
      b.skipped = true;
      b.weight = 0.0;
    } else {
      b.value = coherent_information(rho, compose(n, e), tol).value;
      out.total += b.weight * b.value;
    }
    out.branches.push_back(b);
  }
  out.blind = coherent_information(rho, compose(n, instrument.total()), tol).value;
  out.dominates = out.total >= out.blind - tol.svd;
  return out;
}

/// For a partially isometric branch V = W Gamma: tr(Gamma rho) I_c(rho, N o V)
/// and tr(Gamma rho) I_c(W Gamma rho Gamma W^dagger / tr, N).
struct PartialIsometryTerm {
  double direct = 0.0;
  double via_polar = 0.0;
  double weight = 0.0;
};

inline PartialIsometryTerm partial_isometry_term(const DensityOperator& rho, const Matrix& v, const QuantumOperation& n,
                                                 const Tolerances& tol = {}) {
  const PolarResult p = polar(v, tol);
  PartialIsometryTerm r;
  r.weight = (p.positive * rho.matrix()).trace().real();
  if (!(r.weight > tol.trace)) throw DegenerateInputError("partial_isometry_term: branch has no weight");
  r.direct = r.weight * coherent_information(rho, compose(n, QuantumOperation({v})), tol).value;
  const Matrix moved = p.isometry * p.positive * rho.matrix() * p.positive * p.isometry.adjoint();
  r.via_polar = r.weight * coherent_information(DensityOperator::trusted(moved / moved.trace().real()), n, tol).value;
  return r;
}

// ---------------------------------------------------------------------------
// Maximizing coherent information

struct CoherentOptimizerConfig {
  int restarts = 16;
  int max_iterations = 300;
  double fd_step = 1e-5;
  /// Converged when an accepted step improves the value by less than this.
  double value_tol = 1e-8;
  std::uint64_t seed = 0xc0de;
  int workers = 1;
};

struct UpperBoundResult {
  int n = 1;
  DensityOperator argmax_state = DensityOperator::maximally_mixed(1);
  double value = 0.0;
  double value_per_use = 0.0;
  int restarts = 0;
  int best_restart = 0;
  int iterations = 0;
  bool converged = false;

  Json to_json() const {
    Json j = Json::object();
    j["n"] = n;
    j["value"] = value;
    j["value_per_use"] = value_per_use;
    j["restarts"] = restarts;
    j["best_restart"] = best_restart;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["argmax_state"] = density_to_json(argmax_state);
    return j;
  }
};

namespace detail {

inline Matrix factor_state(const RealVector& x, Index d) {
  Matrix t(d, d);
  for (Index i = 0; i < d * d; ++i) t(i / d, i % d) = Complex(x(2 * i), x(2 * i + 1));
  const Matrix p = t.adjoint() * t;
  return p / p.trace().real();
}

inline RealVector factor_params(const Matrix& t) {
  const Index d = t.rows();
  RealVector x(2 * d * d);
  for (Index i = 0; i < d * d; ++i) {
    x(2 * i) = t(i / d, i % d).real();
    x(2 * i + 1) = t(i / d, i % d).imag();
  }
  return x;
}

struct AscentRun {
  RealVector x;
  double value = -INFINITY;
  int iterations = 0;
  bool converged = false;
};

// BFGS ascent with central-difference gradients and backtracking.
template <typename F>
AscentRun bfgs_ascent(F&& f, RealVector x, const CoherentOptimizerConfig& cfg) {
  const Index n = x.size();
  auto grad = [&](const RealVector& at) {
    RealVector g(n);
    RealVector p = at;
    for (Index i = 0; i < n; ++i) {
      const double keep = p(i);
      p(i) = keep + cfg.fd_step;
      const double up = f(p);
      p(i) = keep - cfg.fd_step;
      const double down = f(p);
      p(i) = keep;
      g(i) = (up - down) / (2.0 * cfg.fd_step);
    }
    return g;
  };
  AscentRun run;
  double fx = f(x);
  RealVector g = grad(x);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  int small_steps = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    run.iterations = it + 1;
    RealVector dir = h * g;
    if (dir.dot(g) <= 0.0) {
      h.setIdentity();
      dir = g;
    }
    if (g.norm() < 1e-10) {
      run.converged = true;
      break;
    }
    double step = 1.0;
    RealVector trial;
    double ft = fx;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      trial = x + step * dir;
      ft = f(trial);
      if (ft >= fx + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      run.converged = true;
      break;
    }
    const RealVector g_new = grad(trial);
    const RealVector s = trial - x;
    const RealVector y = g - g_new;  // curvature pair for the negated objective
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(n, n);
      h = (i - rho * s * y.transpose()) * h * (i - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const double improvement = ft - fx;
    x = trial;
    fx = ft;
    g = g_new;
    small_steps = improvement < cfg.value_tol * 1e-3 ? small_steps + 1 : 0;
    if (small_steps >= 3) {
      run.converged = true;
      break;
    }
  }
  run.x = x;
  run.value = fx;
  return run;
}

}  // namespace detail

/// Multi-start maximization of I_c(rho, N^{(x) n}) over input states
/// rho = T^dagger T / tr(T^dagger T). The value is a lower bound on the maximum.
inline UpperBoundResult maximize_coherent_information(const QuantumOperation& channel, int n,
                                                      const CoherentOptimizerConfig& cfg = {}) {
  if (n < 1 || n > 3) throw PreconditionError("maximize_coherent_information: n must be 1, 2 or 3");
  if (n == 3 && channel.dim_in() != 2) {
    throw ResourceError("maximize_coherent_information: n = 3 is limited to qubit inputs");
  }
  if (cfg.restarts < 1) throw PreconditionError("maximize_coherent_information: restarts must be >= 1");
  const QuantumOperation block = tensor_power(channel, n);
  const Index d = block.dim_in();
  auto objective = [&](const RealVector& x) { return coherent_information_value(detail::factor_state(x, d), block); };

  std::vector<detail::AscentRun> runs(size_t(cfg.restarts));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < cfg.restarts; r = next++) {
      Matrix t;
      if (r == 0) {
        t = Matrix::Identity(d, d);
      } else if (r == 1) {
        t = Matrix::Zero(d, d);
        t(0, 0) = 1.0;
        // Small full-rank admixture keeps finite differences defined around the pure start.
        t += 1e-3 * Matrix::Identity(d, d);
      } else {
        Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(r));
        t = ginibre(rng, d, d);
      }
      runs[size_t(r)] = detail::bfgs_ascent(objective, detail::factor_params(t), cfg);
    }
  };
  const int workers = std::clamp(cfg.workers, 1, cfg.restarts);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  int best = 0;
  for (int r = 1; r < cfg.restarts; ++r) {
    if (runs[size_t(r)].value > runs[size_t(best)].value) best = r;
  }
  UpperBoundResult out;
  out.n = n;
  out.argmax_state = DensityOperator::trusted(detail::factor_state(runs[size_t(best)].x, d));
  out.value = runs[size_t(best)].value;
  out.value_per_use = out.value / n;
  out.restarts = cfg.restarts;
  out.best_restart = best;
  out.iterations = runs[size_t(best)].iterations;
  out.converged = runs[size_t(best)].converged;
  return out;
}

// ---------------------------------------------------------------------------
// Encoding irrelevance

struct EncodingIrrelevanceReport {
  bool skipped = false;
  std::string reason;
  /// 1 - F_e(rho, D o N o E).
  double epsilon = 0.0;
  /// 1 - F_e(rho, D o N o F).
  double epsilon_f = 0.0;
  double fidelity_final = 0.0;
  double ic_general = 0.0;
  double ic_extension = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  double source_entropy = 0.0;
  double capstone_rhs = 0.0;
  bool extension_step = false;
  bool close_final_step = false;
  bool continuity_step = false;
  bool capstone_step = false;

  bool holds() const { return skipped || (extension_step && close_final_step && continuity_step && capstone_step); }
  double slack() const { return bound - gap; }

  Json to_json() const {
    Json j = Json::object();
    j["skipped"] = skipped;
    j["reason"] = reason;
    j["epsilon"] = epsilon;
    j["epsilon_f"] = epsilon_f;
    j["fidelity_final"] = fidelity_final;
    j["ic_general"] = ic_general;
    j["ic_extension"] = ic_extension;
    j["gap"] = gap;
    j["bound"] = bound;
    j["slack"] = slack();
    j["source_entropy"] = source_entropy;
    j["capstone_rhs"] = capstone_rhs;
    j["extension_step"] = extension_step;
    j["close_final_step"] = close_final_step;
    j["continuity_step"] = continuity_step;
    j["capstone_step"] = capstone_step;
    j["holds"] = holds();
    return j;
  }
};

/// Builds F from the isometry extracted for (E, D o N), embeds it, and checks
/// |I_c(rho, N o E) - I_c(rho, N o F)| < 6 sqrt(3 eps) log2 d_c + 2 step by step.
inline EncodingIrrelevanceReport encoding_irrelevance_check(const DensityOperator& rho, const QuantumOperation& n,
                                                            const QuantumOperation& e, const QuantumOperation& d,
                                                            double slack = 1e-8) {
  EncodingIrrelevanceReport r;
  const QuantumOperation dn = compose(d, n);
  r.epsilon = 1.0 - entanglement_fidelity(rho, compose(dn, e));
  if (!(1.0 - 3.0 * r.epsilon > 5.0 / 9.0)) {
    r.skipped = true;
    r.reason = "fidelity premise too weak for the conditional-entropy lemma";
    return r;
  }
  const IsometryExtraction x = extract_isometry(rho, e, dn);
  const QuantumOperation f = embed(x.as_operation());
  r.epsilon_f = 1.0 - entanglement_fidelity(rho, compose(dn, f));
  r.extension_step = r.epsilon_f <= 2.0 * r.epsilon + slack;

  const Purification psi = purify(rho);
  const Matrix out_e = apply_on_second(compose(dn, e), psi.projector(), psi.dim_r);
  const Matrix out_f = apply_on_second(compose(dn, f), psi.projector(), psi.dim_r);
  r.fidelity_final = uhlmann_fidelity(out_e, out_f);
  r.close_final_step = r.fidelity_final >= 1.0 - 3.0 * r.epsilon - slack;

  const double log_dc = std::log2(static_cast<double>(n.dim_in()));
  r.ic_general = coherent_information(rho, compose(n, e)).value;
  r.ic_extension = coherent_information(rho, compose(n, f)).value;
  r.gap = std::abs(r.ic_general - r.ic_extension);
  r.bound = 6.0 * std::sqrt(3.0 * std::max(r.epsilon, 0.0)) * log_dc + 2.0;
  r.continuity_step = r.gap < r.bound + slack;

  r.source_entropy = von_neumann_entropy(rho);
  r.capstone_rhs = r.ic_extension + 2.0 + 4.0 * r.epsilon_f * log_dc;
  r.capstone_step = r.source_entropy <= r.capstone_rhs + slack;
  return r;
}

/// Random (rho, E, N, D) on a qubit source whose perturbation strength is
/// tuned by bisection so that 1 - F_e(rho, D o N o E) equals target_epsilon.
struct EncodingTriple {
  DensityOperator rho;
  QuantumOperation e;
  QuantumOperation n;
  QuantumOperation d;
  double epsilon = 0.0;
};

inline EncodingTriple random_encoding_triple(Rng& rng, Index dim_s, Index dim_c, double target_epsilon) {
  const DensityOperator rho = random_density(rng, dim_s);
  const Matrix v = random_isometry(rng, dim_c, dim_s);
  const QuantumOperation re = random_channel(rng, dim_s, dim_c, 2);
  const QuantumOperation rn = random_channel(rng, dim_c, dim_c, 2);
  const QuantumOperation rd = random_channel(rng, dim_c, dim_s, dim_c);
  const QuantumOperation vop({v});
  const QuantumOperation dec = reversal_decoder(v);
  auto build = [&](double s) {
    return EncodingTriple{rho, mix(vop, re, s), mix(identity_operation(dim_c), rn, s), mix(dec, rd, s), 0.0};
  };
  auto eps = [&](const EncodingTriple& t) {
    return 1.0 - entanglement_fidelity(rho, compose(t.d, compose(t.n, t.e)));
  };
  double lo = 0.0;
  double hi = 1.0;
  if (eps(build(hi)) < target_epsilon) {
    EncodingTriple t = build(hi);
    t.epsilon = eps(t);
    return t;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eps(build(mid)) < target_epsilon ? lo : hi) = mid;
  }
  EncodingTriple t = build(0.5 * (lo + hi));
  t.epsilon = eps(t);
  return t;
}

inline CheckReport check_encoding_irrelevance(const CheckConfig& cfg) {
  return run_trials("encoding-irrelevance", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index dc = uniform_index(rng, 2, 3);
    const EncodingTriple t = random_encoding_triple(rng, 2, dc, cfg.epsilon);
    const EncodingIrrelevanceReport r = encoding_irrelevance_check(t.rho, t.n, t.e, t.d, cfg.slack);
    TrialOutcome o;
    o.instance = Json::object();
    o.instance["rho"] = density_to_json(t.rho);
    o.instance["E"] = operation_to_json(t.e);
    o.instance["N"] = operation_to_json(t.n);
    o.instance["D"] = operation_to_json(t.d);
    o.instance["report"] = r.to_json();
    if (r.skipped) {
      o.skipped = true;
      return o;
    }
    o.violation = r.gap - r.bound;
    if (!r.holds()) o.violation = std::max(o.violation, 1.0);
    o.metrics.push_back({"min_slack", r.slack(), Metric::Reduce::min});
    o.metrics.push_back({"max_gap", r.gap});
    o.metrics.push_back({"max_epsilon", r.epsilon});
    return o;
  });
}

}  // namespace qfid
