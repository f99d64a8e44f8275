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

// Entanglement, Uhlmann and pure-state fidelities, the minimum pure-state
// fidelity over a subspace, and randomized checks of the fidelity lemmas.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "qfidkit/channels.hpp"
#include "qfidkit/checks.hpp"
#include "qfidkit/linalg.hpp"
#include "qfidkit/random.hpp"
#include "qfidkit/serialization.hpp"

namespace qfid {

namespace detail {

inline void require_fidelity_shapes(const Matrix& rho, const QuantumOperation& op, const char* what) {
  require_square(rho, what);
  if (op.dim_in() != op.dim_out()) {
    throw ShapeError(std::string(what) + ": operation must map a space to itself");
  }
  if (rho.rows() != op.dim_in()) {
    throw ShapeError(std::string(what) + ": operator is " + std::to_string(rho.rows()) +
                     "-dimensional, operation acts on " + std::to_string(op.dim_in()));
  }
}

}  // namespace detail

/// a_i = tr(A_i rho); |a|^2 is the entanglement fidelity.
struct FeTermVector {
  Vector components;
  double squared_norm() const { return components.squaredNorm(); }
};

inline FeTermVector fe_term_vector(const Matrix& rho, const QuantumOperation& op) {
  detail::require_fidelity_shapes(rho, op, "fe_term_vector");
  FeTermVector out{Vector(static_cast<Index>(op.size()))};
  for (size_t i = 0; i < op.size(); ++i) {
    out.components(Index(i)) = (op.kraus()[i].cwiseProduct(rho.transpose())).sum();
  }
  return out;
}

inline FeTermVector fe_term_vector(const DensityOperator& rho, const QuantumOperation& op) {
  return fe_term_vector(rho.matrix(), op);
}

/// sum_i |tr A_i B|^2. B need not be a density operator (the continuity
/// lemma evaluates it on unnormalized positive and perturbed operators).
inline double entanglement_fidelity(const Matrix& rho, const QuantumOperation& op) {
  return fe_term_vector(rho, op).squared_norm();
}

inline double entanglement_fidelity(const DensityOperator& rho, const QuantumOperation& op) {
  return entanglement_fidelity(rho.matrix(), op);
}

/// <psi| (I (x) op)(|psi><psi|) |psi> for any purification psi of the input.
inline double entanglement_fidelity(const Purification& psi, const QuantumOperation& op) {
  if (op.dim_in() != op.dim_out() || op.dim_in() != psi.dim_q) {
    throw ShapeError("entanglement_fidelity: purification and operation dimensions differ");
  }
  const Matrix joint = apply_on_second(op, psi.projector(), psi.dim_r);
  return (psi.vec.adjoint() * joint * psi.vec)(0, 0).real();
}

/// F_e / tr(op(rho)).
inline double entanglement_fidelity_renormalized(const DensityOperator& rho, const QuantumOperation& op,
                                                 const Tolerances& tol = {}) {
  const double fe = entanglement_fidelity(rho, op);
  const double t = qfid::apply(op, rho).trace().real();
  if (!(t > tol.trace)) {
    throw DegenerateInputError("entanglement_fidelity_renormalized: output trace " + std::to_string(t));
  }
  return fe / t;
}

/// (tr sqrt(sqrt(a) b sqrt(a)))^2 for positive operators a, b.
inline double uhlmann_fidelity(const Matrix& a, const Matrix& b) {
  require_square(a, "uhlmann_fidelity");
  require_square(b, "uhlmann_fidelity");
  if (a.rows() != b.rows()) throw ShapeError("uhlmann_fidelity: dimensions differ");
  const Matrix sa = sqrt_psd(hermitian_part(a));
  const Matrix inner = hermitian_part(sa * hermitian_part(b) * sa);
  const EigResult e = eig_hermitian(inner);
  double s = 0.0;
  for (Index k = 0; k < e.values.size(); ++k) s += std::sqrt(std::max(0.0, e.values(k)));
  return s * s;
}

inline double uhlmann_fidelity(const DensityOperator& a, const DensityOperator& b) {
  return uhlmann_fidelity(a.matrix(), b.matrix());
}

/// <psi| op(|psi><psi|) |psi> = sum_i |<psi|A_i|psi>|^2 for a unit vector psi.
inline double pure_state_fidelity(const Vector& psi, const QuantumOperation& op) {
  if (op.dim_in() != op.dim_out() || psi.size() != op.dim_in()) {
    throw ShapeError("pure_state_fidelity: dimension mismatch");
  }
  double f = 0.0;
  for (const Matrix& a : op.kraus()) f += std::norm(psi.dot(a * psi));
  return f;
}

// ---------------------------------------------------------------------------
// Minimum pure-state fidelity

struct MinFidelityConfig {
  int restarts = 32;
  int max_iterations = 500;
  /// Converged when one accepted step improves the objective by less than this.
  double improvement_tol = 1e-12;
  /// Candidates within this of the best value count as tied.
  double tie_tol = 1e-10;
  std::uint64_t seed = 0x51f1d;
};

struct MinFidelityResult {
  double value = 0.0;
  Vector witness;
  bool converged = false;
  int best_restart = 0;
  int iterations = 0;

  Json to_json() const {
    Json j = Json::object();
    j["value"] = value;
    j["witness"] = vector_to_json(witness);
    j["converged"] = converged;
    j["best_restart"] = best_restart;
    j["iterations"] = iterations;
    return j;
  }
};

namespace detail {

// f(c) = sum_i |c^H B_i c|^2 on the unit sphere of subspace coordinates.
struct QuarticForm {
  std::vector<Matrix> b;

  double value(const Vector& c) const {
    double f = 0.0;
    for (const Matrix& m : b) f += std::norm(c.dot(m * c));
    return f;
  }

  // Wirtinger gradient 2 df/dc^*.
  Vector gradient(const Vector& c) const {
    Vector g = Vector::Zero(c.size());
    for (const Matrix& m : b) {
      const Vector mc = m * c;
      const Complex z = c.dot(mc);
      g += std::conj(z) * mc + z * (m.adjoint() * c);
    }
    return 2.0 * g;
  }
};

struct DescentRun {
  Vector c;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline DescentRun descend(const QuarticForm& form, Vector c, const MinFidelityConfig& cfg) {
  DescentRun run;
  double f = form.value(c);
  double step = 1.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    run.iterations = it + 1;
    Vector g = form.gradient(c);
    g -= c * c.dot(g).real();
    const double gg = g.squaredNorm();
    if (gg < 1e-28) {
      run.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e3);
    bool accepted = false;
    Vector trial;
    double ft = f;
    for (int bt = 0; bt < 60; ++bt) {
      trial = c - step * g;
      trial /= trial.norm();
      ft = form.value(trial);
      if (ft <= f - 1e-4 * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      run.converged = true;
      break;
    }
    const double improvement = f - ft;
    c = trial;
    f = ft;
    if (improvement < cfg.improvement_tol) {
      run.converged = true;
      break;
    }
  }
  run.c = c;
  run.value = f;
  return run;
}

// Phase convention: the largest-amplitude coordinate (lowest index among
// near-ties) is made real and positive.
inline Vector canonical_phase(const Vector& v) {
  Index best = 0;
  const double top = v.cwiseAbs().maxCoeff();
  while (std::abs(v(best)) < top - 1e-9) ++best;
  const Complex z = v(best);
  return v * (std::abs(z) / z);
}

// Prefers the larger modulus at the lowest index where the two differ.
inline bool amplitude_precedes(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    const double x = std::abs(a(i));
    const double y = std::abs(b(i));
    if (x > y + 1e-9) return true;
    if (y > x + 1e-9) return false;
  }
  return false;
}

}  // namespace detail

/// Minimizes sum_i |<psi|A_i|psi>|^2 over unit psi in H by multi-start
/// projected gradient descent. The value is an upper bound on the true minimum.
/// The witness is returned in ambient coordinates.
inline MinFidelityResult min_pure_state_fidelity(const Subspace& h, const QuantumOperation& op,
                                                 const MinFidelityConfig& cfg = {}) {
  if (op.dim_in() != op.dim_out() || op.dim_in() != h.ambient_dim()) {
    throw ShapeError("min_pure_state_fidelity: subspace and operation dimensions differ");
  }
  if (cfg.restarts < 1) throw PreconditionError("min_pure_state_fidelity: restarts must be >= 1");
  const Matrix& basis = h.basis();
  const Index k = h.dim();
  detail::QuarticForm form;
  for (const Matrix& a : op.kraus()) form.b.push_back(basis.adjoint() * a * basis);

  MinFidelityResult out;
  if (k == 1) {
    const Vector c = Vector::Ones(1);
    out.value = form.value(c);
    out.witness = basis.col(0);
    out.converged = true;
    return out;
  }

  std::vector<detail::DescentRun> runs;
  runs.reserve(size_t(cfg.restarts));
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(r));
    runs.push_back(detail::descend(form, random_unit_vector(rng, k), cfg));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) best = std::min(best, run.value);

  int chosen = -1;
  Vector chosen_c;
  for (int r = 0; r < cfg.restarts; ++r) {
    if (runs[size_t(r)].value > best + cfg.tie_tol) continue;
    const Vector c = detail::canonical_phase(runs[size_t(r)].c);
    if (chosen < 0 || detail::amplitude_precedes(c, chosen_c)) {
      chosen = r;
      chosen_c = c;
    }
  }
  const auto& run = runs[size_t(chosen)];
  out.value = run.value;
  out.witness = basis * chosen_c;
  out.converged = run.converged;
  out.best_restart = chosen;
  out.iterations = run.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Single-operator rotation

struct RotationResult {
  QuantumOperation rotated;
  /// Position of the operator carrying all of F_e.
  Index index = 0;
  Matrix remix;
};

/// Remixes op by a unitary whose first row is a^* / |a| so that
/// tr(A'_0 rho) = |a| and tr(A'_k rho) = 0 for k >= 1.
inline RotationResult single_operator_rotation(const DensityOperator& rho, const QuantumOperation& op) {
  const FeTermVector a = fe_term_vector(rho, op);
  const double norm = a.components.norm();
  if (!(norm > 1e-300) || !(a.squared_norm() > 0.0)) {
    throw DegenerateInputError("single_operator_rotation: entanglement fidelity is zero");
  }
  const Index s = a.components.size();
  const Vector u = a.components.conjugate() / norm;
  Eigen::HouseholderQR<Matrix> qr{Matrix(u)};
  Matrix q = qr.householderQ() * Matrix::Identity(s, s);
  q.col(0) = u;
  const Matrix m = q.transpose();
  return RotationResult{remix(op, RemixMatrix(m)), 0, m};
}

// ---------------------------------------------------------------------------
// Lemma checks

namespace detail {

inline Index sample_dim(Rng& rng, const CheckConfig& cfg) { return uniform_index(rng, 2, cfg.dim); }

inline QuantumOperation sample_operation(Rng& rng, Index d) {
  const Index k = uniform_index(rng, 1, 3);
  if (uniform(rng) < 0.5) return random_channel(rng, d, d, k + 1);
  return random_subchannel(rng, d, d, k + 1);
}

}  // namespace detail

/// Two-path agreement: Kraus trace formula vs purification matrix element,
/// for the canonical purification and a randomly rotated reference.
inline CheckReport check_fe_equivalence(const CheckConfig& cfg) {
  return run_trials("fe-equivalence", cfg, 1e-9, [&](int, Rng& rng) {
    const Index d = detail::sample_dim(rng, cfg);
    const DensityOperator rho = random_density(rng, d, uniform_index(rng, 1, d));
    const QuantumOperation op = detail::sample_operation(rng, d);
    const Purification canonical = purify(rho);
    const Purification rotated = rotate_reference(canonical, random_unitary(rng, canonical.dim_r));
    const double kraus_form = entanglement_fidelity(rho, op);
    const double dev = std::max(std::abs(kraus_form - entanglement_fidelity(canonical, op)),
                                std::abs(kraus_form - entanglement_fidelity(rotated, op)));
    TrialOutcome o;
    o.violation = dev;
    o.instance = Json::object();
    o.instance["rho"] = density_to_json(rho);
    o.instance["op"] = operation_to_json(op);
    return o;
  });
}

/// F_e(l rho1 + (1-l) rho2) <= l F_e(rho1) + (1-l) F_e(rho2).
inline CheckReport check_convexity(const CheckConfig& cfg) {
  return run_trials("convexity", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index d = detail::sample_dim(rng, cfg);
    const DensityOperator r1 = random_density(rng, d, uniform_index(rng, 1, d));
    const DensityOperator r2 = random_density(rng, d, uniform_index(rng, 1, d));
    const double l = uniform(rng);
    const QuantumOperation op = detail::sample_operation(rng, d);
    const Matrix mixture = l * r1.matrix() + (1.0 - l) * r2.matrix();
    const double lhs = entanglement_fidelity(mixture, op);
    const double rhs = l * entanglement_fidelity(r1, op) + (1.0 - l) * entanglement_fidelity(r2, op);
    TrialOutcome o;
    o.violation = lhs - rhs;
    o.instance = Json::object();
    o.instance["rho1"] = density_to_json(r1);
    o.instance["rho2"] = density_to_json(r2);
    o.instance["lambda"] = l;
    o.instance["op"] = operation_to_json(op);
    return o;
  });
}

/// |F_e(rho, A o E) - F_e(rho, A)| <= 2 eta with eta = 1 - F_e(rho, E).
inline CheckReport check_composition_lemma(const CheckConfig& cfg) {
  return run_trials("composition", cfg, cfg.slack, [&](int trial, Rng& rng) {
    const Index d = detail::sample_dim(rng, cfg);
    const DensityOperator rho = random_density(rng, d, uniform_index(rng, 1, d));
    const QuantumOperation e = perturbed_identity(rng, d, uniform(rng, 0.0, cfg.perturbation));
    const QuantumOperation a = trial % 2 == 0
                                   ? random_subchannel(rng, d, d, uniform_index(rng, 1, 3))
                                   : perturbed_identity(rng, d, uniform(rng, 0.0, 1.0));
    const double eta = 1.0 - entanglement_fidelity(rho, e);
    const double gap =
        std::abs(entanglement_fidelity(rho, compose(a, e, KrausReduction::none)) - entanglement_fidelity(rho, a));
    TrialOutcome o;
    o.violation = gap - 2.0 * eta;
    o.metrics.push_back({"max_eta", eta});
    o.instance = Json::object();
    o.instance["rho"] = density_to_json(rho);
    o.instance["E"] = operation_to_json(e);
    o.instance["A"] = operation_to_json(a);
    o.instance["eta"] = eta;
    return o;
  });
}

/// F(A(rho), B(rho)) >= 1 - eps1 - eps2 for trace-preserving A, B.
inline CheckReport check_close_final(const CheckConfig& cfg) {
  return run_trials("close-final", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index d = detail::sample_dim(rng, cfg);
    const DensityOperator rho = random_density(rng, d, uniform_index(rng, 1, d));
    const QuantumOperation a = perturbed_identity(rng, d, uniform(rng, 0.0, cfg.perturbation));
    const QuantumOperation b = perturbed_identity(rng, d, uniform(rng, 0.0, cfg.perturbation));
    const double e1 = 1.0 - entanglement_fidelity(rho, a);
    const double e2 = 1.0 - entanglement_fidelity(rho, b);
    const double f = uhlmann_fidelity(qfid::apply(a, rho), qfid::apply(b, rho));
    TrialOutcome o;
    o.violation = (1.0 - e1 - e2) - f;
    o.instance = Json::object();
    o.instance["rho"] = density_to_json(rho);
    o.instance["A"] = operation_to_json(a);
    o.instance["B"] = operation_to_json(b);
    return o;
  });
}

/// |F_e(B + D, A) - F_e(B, A)| <= (tr|D|)^2 + 2 tr|D| for positive B with
/// tr B <= 1 and Hermitian D.
inline CheckReport check_fe_continuity(const CheckConfig& cfg) {
  return run_trials("fe-continuity", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index d = detail::sample_dim(rng, cfg);
    const Matrix b = uniform(rng, 0.5, 1.0) * random_density(rng, d, uniform_index(rng, 1, d)).matrix();
    const Matrix delta = uniform(rng, 0.0, cfg.delta_max) * random_hermitian(rng, d);
    const QuantumOperation a = detail::sample_operation(rng, d);
    const double tr_abs = eig_hermitian(delta).values.cwiseAbs().sum();
    const double gap =
        std::abs(entanglement_fidelity(Matrix(b + delta), a) - entanglement_fidelity(b, a));
    TrialOutcome o;
    o.violation = gap - (tr_abs * tr_abs + 2.0 * tr_abs);
    o.instance = Json::object();
    o.instance["B"] = matrix_to_json(b);
    o.instance["Delta"] = matrix_to_json(delta);
    o.instance["A"] = operation_to_json(a);
    return o;
  });
}

}  // namespace qfid
