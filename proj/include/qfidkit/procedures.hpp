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

// Constructive procedures: support stripping, phase averaging, partial-isometry
// extraction and derandomization of forward-classical-communication schemes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "qfidkit/channels.hpp"
#include "qfidkit/checks.hpp"
#include "qfidkit/fidelity.hpp"
#include "qfidkit/linalg.hpp"
#include "qfidkit/random.hpp"
#include "qfidkit/serialization.hpp"

namespace qfid {

/// Slack allowed to the multi-start optimizer's minima.
inline constexpr double kOptimizerSlack = 1e-6;
/// Eigenvalues above this count toward a support.
inline constexpr double kSupportCutoff = 1e-12;

// ---------------------------------------------------------------------------
// Support stripping

struct StrippingStep {
  double q = 0.0;
  Vector state;
  double fidelity = 0.0;
  bool converged = true;
  Index rank_before = 0;
  /// Orthonormal basis of the support the state was chosen from.
  Matrix support;
};

/// Pure-state ensemble {q_i, |i>} for rho, lowest fidelity first, run until
/// the residual vanishes.
struct StrippingEnsemble {
  std::vector<StrippingStep> steps;

  Index rank() const { return static_cast<Index>(steps.size()); }
  double total_weight() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.q;
    return s;
  }
  Matrix reconstruct() const {
    const Index d = steps.front().state.size();
    Matrix m = Matrix::Zero(d, d);
    for (const auto& st : steps) m += st.q * st.state * st.state.adjoint();
    return m;
  }
  /// rho~_count: what remains after removing the first count states.
  Matrix residual(Index count) const {
    const Index d = steps.front().state.size();
    Matrix m = Matrix::Zero(d, d);
    for (Index i = count; i < rank(); ++i) {
      const auto& st = steps[size_t(i)];
      m += st.q * st.state * st.state.adjoint();
    }
    return m;
  }

  Json to_json() const {
    Json s = Json::array();
    for (const auto& st : steps) {
      Json e = Json::object();
      e["q"] = st.q;
      e["state"] = vector_to_json(st.state);
      e["fidelity"] = st.fidelity;
      e["converged"] = st.converged;
      e["rank_before"] = st.rank_before;
      s.push_back(e);
    }
    return s;
  }
};

struct StrippingResult {
  StrippingEnsemble ensemble;
  Index n0 = 0;
  /// Support of rho~_{n0}.
  Subspace retained;
  double alpha = 0.0;
  /// 1 - F_e(rho, op).
  double eta = 0.0;
  /// 1 - f_{n0+1}, the lowest pure-state fidelity on the retained support.
  double gamma = 0.0;
  /// eta / alpha (infinite when alpha = 0).
  double gamma_bound = 0.0;
  /// sum_{i<=n0} q_i f_i + (1 - alpha) F_e(rho_rest, op), which is >= F_e(rho, op).
  double convexity_lhs = 0.0;
  double fe = 0.0;
  bool converged = true;

  Json to_json() const {
    Json j = Json::object();
    j["n0"] = n0;
    j["alpha"] = alpha;
    j["eta"] = eta;
    j["gamma"] = gamma;
    j["gamma_bound"] = std::isfinite(gamma_bound) ? Json(gamma_bound) : Json("inf");
    j["convexity_lhs"] = convexity_lhs;
    j["fe"] = fe;
    j["converged"] = converged;
    j["retained_dim"] = retained.dim();
    j["retained_basis"] = matrix_to_json(retained.basis());
    j["ensemble"] = ensemble.to_json();
    return j;
  }
};

namespace detail {

inline Matrix support_basis(const Matrix& m) {
  const EigResult e = eig_hermitian(hermitian_part(m));
  Index r = 0;
  while (r < e.values.size() && e.values(r) > kSupportCutoff) ++r;
  return e.vectors.leftCols(r);
}

}  // namespace detail

/// Builds the full fidelity-ordered ensemble for rho.
inline StrippingEnsemble stripping_ensemble(const DensityOperator& rho, const QuantumOperation& op,
                                            const MinFidelityConfig& cfg = {}) {
  if (op.dim_in() != op.dim_out() || op.dim_in() != rho.dim()) {
    throw ShapeError("strip_support: operation does not act on the state's space");
  }
  StrippingEnsemble out;
  Matrix basis = detail::support_basis(rho.matrix());
  Matrix m = hermitian_part(basis.adjoint() * rho.matrix() * basis);
  while (basis.cols() > 0) {
    const Index k = basis.cols();
    StrippingStep step;
    step.rank_before = k;
    step.support = basis;
    if (k == 1) {
      step.state = basis.col(0);
      step.fidelity = pure_state_fidelity(step.state, op);
      step.q = m(0, 0).real();
      out.steps.push_back(std::move(step));
      break;
    }
    const MinFidelityResult f = min_pure_state_fidelity(Subspace(basis), op, cfg);
    step.state = f.witness;
    step.fidelity = f.value;
    step.converged = f.converged;
    const Vector c = basis.adjoint() * f.witness;
    const Eigen::LDLT<Matrix> ldlt(m);
    step.q = 1.0 / c.dot(ldlt.solve(c)).real();
    const Matrix next = hermitian_part(m - step.q * c * c.adjoint());
    const EigResult e = eig_hermitian(next);
    const double dropped = e.values(k - 1);
    if (std::abs(dropped) > 1e-9 * std::max(1.0, e.values(0))) {
      throw DecompositionError("strip_support: removal did not lower the rank", std::abs(dropped));
    }
    const Matrix keep = e.vectors.leftCols(k - 1);
    basis = basis * keep;
    detail::orthonormalize_columns(basis);
    m = e.values.head(k - 1).cast<Complex>().asDiagonal();
    out.steps.push_back(std::move(step));
  }
  return out;
}

/// Strips the n0 lowest-fidelity directions from rho's support.
inline StrippingResult strip_support(const DensityOperator& rho, const QuantumOperation& op, Index n0,
                                     const MinFidelityConfig& cfg = {}) {
  if (n0 < 0) throw PreconditionError("strip_support: n0 must be >= 0");
  const Index rank = detail::support_basis(rho.matrix()).cols();
  if (rank < n0 + 1) {
    throw PreconditionError("strip_support: rank " + std::to_string(rank) + " < n0 + 1");
  }
  StrippingEnsemble ens = stripping_ensemble(rho, op, cfg);
  StrippingResult r{std::move(ens), n0, Subspace(Matrix::Identity(1, 1))};
  const auto& steps = r.ensemble.steps;
  r.retained = Subspace(steps[size_t(n0)].support);
  for (Index i = 0; i < n0; ++i) r.alpha += steps[size_t(i)].q;
  for (const auto& st : steps) r.converged = r.converged && st.converged;
  r.fe = entanglement_fidelity(rho, op);
  r.eta = 1.0 - r.fe;
  r.gamma = 1.0 - steps[size_t(n0)].fidelity;
  r.gamma_bound = r.alpha > 0.0 ? r.eta / r.alpha : INFINITY;
  double lhs = 0.0;
  for (Index i = 0; i < n0; ++i) lhs += steps[size_t(i)].q * steps[size_t(i)].fidelity;
  // (1 - alpha) F_e(rest / w) with w = tr(rest) = 1 - alpha; F_e is quadratic in its argument.
  const Matrix rest = r.ensemble.residual(n0);
  lhs += entanglement_fidelity(rest, op) / rest.trace().real();
  r.convexity_lhs = lhs;
  return r;
}

struct RateAccounting {
  Index n0 = 0;
  double alpha = 0.0;
  Index retained_dim = 0;
  double rate = 0.0;
  double lambda_max = 0.0;
  /// (1 - alpha) / lambda_max.
  double dim_lower_bound = 0.0;
  bool bound_holds = false;

  Json to_json() const {
    Json j = Json::object();
    j["n0"] = n0;
    j["alpha"] = alpha;
    j["D"] = retained_dim;
    j["rate"] = rate;
    j["lambda_max"] = lambda_max;
    j["dim_lower_bound"] = dim_lower_bound;
    j["bound_holds"] = bound_holds;
    return j;
  }
};

/// Removes the fewest states whose weight reaches alpha_target and accounts
/// for the retained dimension D = rank - n0 >= (1 - alpha) / lambda_max.
inline RateAccounting rate_accounting(const StrippingEnsemble& ens, const DensityOperator& rho, double alpha_target) {
  RateAccounting r;
  while (r.n0 < ens.rank() && r.alpha < alpha_target - 1e-12) r.alpha += ens.steps[size_t(r.n0++)].q;
  r.retained_dim = ens.rank() - r.n0;
  r.rate = r.retained_dim > 0 ? std::log2(static_cast<double>(r.retained_dim)) : -INFINITY;
  r.lambda_max = rho.spectrum().values(0);
  r.dim_lower_bound = (1.0 - r.alpha) / r.lambda_max;
  r.bound_holds = static_cast<double>(r.retained_dim) >= r.dim_lower_bound - 1e-9;
  return r;
}

// ---------------------------------------------------------------------------
// Phase averaging

struct PhaseSet {
  enum class Kind { four_point, grid };
  Kind kind = Kind::four_point;
  int m = 4;

  static PhaseSet four_point() { return {Kind::four_point, 4}; }
  static PhaseSet grid(int m) { return {Kind::grid, m}; }
};

struct PhaseAverageConfig {
  /// Tuples are enumerated up to this count and sampled beyond it.
  std::int64_t enumeration_limit = 65536;
  int samples = 65536;
  std::uint64_t seed = 0x9a5e;
};

/// Mean pure-state fidelity of sum_k sqrt(l_k) e^{i phi_k} |k> over phase tuples.
/// The first phase is fixed to 1 (a global phase changes nothing).
inline double phase_average_fidelity(const DensityOperator& rho, const QuantumOperation& op, PhaseSet set = {},
                                     const PhaseAverageConfig& cfg = {}) {
  if (set.m < 1) throw PreconditionError("phase_average_fidelity: grid size must be >= 1");
  const EigResult e = rho.spectrum();
  Index r = 0;
  while (r < e.values.size() && e.values(r) > kSupportCutoff) ++r;
  std::vector<Vector> terms;
  for (Index k = 0; k < r; ++k) terms.push_back(std::sqrt(e.values(k)) * e.vectors.col(k));
  const int m = set.m;
  auto phase = [&](int j) { return std::polar(1.0, 2.0 * M_PI * j / m); };
  auto fidelity_of = [&](const std::vector<int>& digits) {
    Vector psi = terms[0];
    for (Index k = 1; k < r; ++k) psi += phase(digits[size_t(k)]) * terms[size_t(k)];
    return pure_state_fidelity(psi, op);
  };

  std::int64_t count = 1;
  bool enumerate = true;
  for (Index k = 1; k < r; ++k) {
    count *= m;
    if (count > cfg.enumeration_limit) {
      enumerate = false;
      break;
    }
  }
  std::vector<int> digits(size_t(r), 0);
  double total = 0.0;
  if (enumerate) {
    for (std::int64_t t = 0; t < count; ++t) {
      std::int64_t rest = t;
      for (Index k = 1; k < r; ++k) {
        digits[size_t(k)] = int(rest % m);
        rest /= m;
      }
      total += fidelity_of(digits);
    }
    return total / static_cast<double>(count);
  }
  Rng rng = stream_rng(cfg.seed, 0);
  for (int s = 0; s < cfg.samples; ++s) {
    for (Index k = 1; k < r; ++k) digits[size_t(k)] = int(uniform_index(rng, 0, m - 1));
    total += fidelity_of(digits);
  }
  return total / cfg.samples;
}

/// F_e + sum_{k != l} l_k l_l <l| op(|k><k|) |l>, the four-point average in closed form.
inline double phase_average_identity(const DensityOperator& rho, const QuantumOperation& op) {
  const EigResult e = rho.spectrum();
  double total = entanglement_fidelity(rho, op);
  for (Index k = 0; k < e.values.size(); ++k) {
    const Matrix out = qfid::apply(op, Matrix(e.vectors.col(k) * e.vectors.col(k).adjoint()));
    for (Index l = 0; l < e.values.size(); ++l) {
      if (l == k) continue;
      total += e.values(k) * e.values(l) * e.vectors.col(l).dot(out * e.vectors.col(l)).real();
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Partial-isometry extraction

struct IsometryExtraction {
  /// Maximal partial isometry from the source space to the channel input.
  Matrix w;
  Index chosen_index = 0;
  /// Singular values of X = [tr(A_i E_j rho)].
  RealVector coupling;
  /// Diagonalized X after remixing both families.
  Matrix x_diagonal;
  double off_diagonal_mass = 0.0;
  /// tr(E_k rho E_k^dagger) for the remixed E.
  RealVector lambda;
  double chosen_ratio = 0.0;
  double fe_before = 0.0;
  double fe_after = 0.0;
  /// |W^dagger W - I| or |W W^dagger - I| on the smaller space.
  double maximality_deviation = 0.0;
  /// fe_before <= 1/2 makes the 2 fe_before - 1 guarantee empty.
  bool vacuous = false;

  QuantumOperation as_operation() const { return QuantumOperation({w}); }

  Json to_json() const {
    Json j = Json::object();
    j["W"] = matrix_to_json(w);
    j["chosen_index"] = chosen_index;
    j["coupling"] = real_vector_to_json(coupling);
    j["off_diagonal_mass"] = off_diagonal_mass;
    j["lambda"] = real_vector_to_json(lambda);
    j["chosen_ratio"] = chosen_ratio;
    j["fe_before"] = fe_before;
    j["fe_after"] = fe_after;
    j["maximality_deviation"] = maximality_deviation;
    j["vacuous"] = vacuous;
    return j;
  }
};

inline double maximality_deviation(const Matrix& w) {
  if (w.rows() >= w.cols()) return (w.adjoint() * w - Matrix::Identity(w.cols(), w.cols())).norm();
  return (w * w.adjoint() - Matrix::Identity(w.rows(), w.rows())).norm();
}

/// Given encoding E (source -> channel) and decoding A (channel -> source),
/// finds a partial isometry W with F_e(rho, A o W) >= 2 F_e(rho, A o E) - 1.
inline IsometryExtraction extract_isometry(const DensityOperator& rho, const QuantumOperation& e,
                                           const QuantumOperation& a, const Tolerances& tol = {}) {
  if (e.dim_in() != rho.dim() || a.dim_in() != e.dim_out() || a.dim_out() != rho.dim()) {
    throw ShapeError("extract_isometry: dimensions of rho, E and A do not chain");
  }
  if (!a.trace_nonincreasing()) throw PreconditionError("extract_isometry: A is not trace-nonincreasing");
  const double te = qfid::apply(e, rho).trace().real();
  if (std::abs(te - 1.0) > tol.trace) {
    throw PreconditionError("extract_isometry: tr E(rho) = " + std::to_string(te) + " != 1");
  }
  IsometryExtraction out;
  out.fe_before = entanglement_fidelity(rho, compose(a, e));
  out.vacuous = out.fe_before <= 0.5;

  const Index na = static_cast<Index>(a.size());
  const Index ne = static_cast<Index>(e.size());
  Matrix x(na, ne);
  for (Index i = 0; i < na; ++i) {
    const Matrix ar = a.kraus()[size_t(i)];
    for (Index j = 0; j < ne; ++j) {
      x(i, j) = (ar * e.kraus()[size_t(j)] * rho.matrix()).trace();
    }
  }
  const SvdResult s = svd(x, SvdMode::full, tol);
  out.coupling = s.singular;
  const QuantumOperation a2 = remix(a, RemixMatrix(s.u.adjoint()));
  const QuantumOperation e2 = remix(e, RemixMatrix(s.v.conjugate()));
  out.x_diagonal = Matrix(na, ne);
  for (Index i = 0; i < na; ++i) {
    for (Index j = 0; j < ne; ++j) {
      out.x_diagonal(i, j) = (a2.kraus()[size_t(i)] * e2.kraus()[size_t(j)] * rho.matrix()).trace();
    }
  }
  Matrix off = out.x_diagonal;
  for (Index k = 0; k < std::min(na, ne); ++k) off(k, k) = 0.0;
  out.off_diagonal_mass = off.norm();

  out.lambda = RealVector(ne);
  Index chosen = -1;
  for (Index k = 0; k < ne; ++k) {
    const Matrix& ek = e2.kraus()[size_t(k)];
    out.lambda(k) = (ek * rho.matrix() * ek.adjoint()).trace().real();
    if (k >= na || !(out.lambda(k) > tol.trace)) continue;
    const double ratio = std::norm(out.x_diagonal(k, k)) / out.lambda(k);
    if (chosen < 0 || ratio > out.chosen_ratio) {
      chosen = k;
      out.chosen_ratio = ratio;
    }
  }
  if (chosen < 0) throw DegenerateInputError("extract_isometry: every coupled branch has negligible weight");
  out.chosen_index = chosen;

  const SvdResult ak = svd(a2.kraus()[size_t(chosen)], SvdMode::thin, tol);
  out.w = ak.v.adjoint() * ak.u.adjoint();
  out.maximality_deviation = maximality_deviation(out.w);
  out.fe_after = entanglement_fidelity(rho, compose(a, QuantumOperation({out.w}, QuantumOperation::Unchecked{})));
  return out;
}

// ---------------------------------------------------------------------------
// Forward classical communication

struct FccDerandomization {
  Index chosen = 0;
  double eta = 0.0;
  std::vector<double> branch_fidelities;
  std::vector<double> branch_traces;
  std::vector<double> renormalized;
  IsometryExtraction extraction;
  double fe = 0.0;

  Json to_json() const {
    Json j = Json::object();
    j["chosen"] = chosen;
    j["eta"] = eta;
    j["branch_fidelities"] = branch_fidelities;
    j["branch_traces"] = branch_traces;
    j["renormalized"] = renormalized;
    j["extraction"] = extraction.to_json();
    j["fe"] = fe;
    return j;
  }
};

/// Reduces a scheme with encodings {E_m} and decoders {D_m} over channel N
/// (total fidelity 1 - eta, eta < 1/4) to one isometric encoding.
inline FccDerandomization derandomize_fcc(const DensityOperator& rho, const Instrument& encodings,
                                          const std::vector<QuantumOperation>& decoders, const QuantumOperation& n,
                                          const Tolerances& tol = {}) {
  if (decoders.size() != encodings.size()) {
    throw ShapeError("derandomize_fcc: one decoder per encoding branch is required");
  }
  FccDerandomization out;
  double total = 0.0;
  for (size_t m = 0; m < encodings.size(); ++m) {
    if (!decoders[m].trace_preserving()) throw PreconditionError("derandomize_fcc: decoders must be trace-preserving");
    const QuantumOperation& em = encodings.branches()[m];
    const double f = entanglement_fidelity(rho, compose(decoders[m], compose(n, em)));
    const double t = qfid::apply(em, rho).trace().real();
    out.branch_fidelities.push_back(f);
    out.branch_traces.push_back(t);
    out.renormalized.push_back(t > tol.trace ? f / t : 0.0);
    total += f;
  }
  out.eta = 1.0 - total;
  if (!(out.eta < 0.25)) {
    throw PreconditionError("derandomize_fcc: total fidelity " + std::to_string(total) + " is not above 3/4");
  }
  const auto best = std::max_element(out.renormalized.begin(), out.renormalized.end());
  out.chosen = static_cast<Index>(best - out.renormalized.begin());
  if (!(*best > 1.0 - out.eta - tol.svd)) {
    throw InconsistentInputError("derandomize_fcc: no branch reaches renormalized fidelity 1 - eta");
  }
  const size_t j = size_t(out.chosen);
  const QuantumOperation ej = scaled(encodings.branches()[j], 1.0 / out.branch_traces[j]);
  const QuantumOperation a = compose(decoders[j], n);
  out.extraction = extract_isometry(rho, ej, a, tol);
  out.fe = out.extraction.fe_after;
  return out;
}

// ---------------------------------------------------------------------------
// Instance generators and checks

/// E = (1-s) V + s R (source -> channel), A = (1-s') V^dagger + s' R' with
/// V a random isometry: a near-perfect encoding/decoding pair.
struct ExtractionInstance {
  DensityOperator rho;
  QuantumOperation e;
  QuantumOperation a;
};

inline ExtractionInstance random_extraction_instance(Rng& rng, Index dim_s, Index dim_c, double s_max) {
  const DensityOperator rho = random_density(rng, dim_s, uniform_index(rng, 1, dim_s));
  const Matrix v = random_isometry(rng, dim_c, dim_s);
  const double s1 = uniform(rng, 0.0, s_max);
  const double s2 = uniform(rng, 0.0, s_max);
  const QuantumOperation e = mix(QuantumOperation({v}), random_channel(rng, dim_s, dim_c, 2), s1);
  const QuantumOperation a =
      mix(QuantumOperation({Matrix(v.adjoint())}), random_channel(rng, dim_c, dim_s, dim_c), s2);
  return {rho, e, a};
}

/// Decoder V^dagger completed to a channel by sending the orthogonal
/// complement of V's range to |0>.
inline QuantumOperation reversal_decoder(const Matrix& v) {
  const Index dc = v.rows();
  const Index ds = v.cols();
  std::vector<Matrix> kraus{v.adjoint()};
  const Matrix complement = Matrix::Identity(dc, dc) - v * v.adjoint();
  const Matrix basis = detail::support_basis(complement);
  for (Index k = 0; k < basis.cols(); ++k) {
    Matrix g = Matrix::Zero(ds, dc);
    g.row(0) = basis.col(k).adjoint();
    kraus.push_back(g);
  }
  return QuantumOperation(std::move(kraus));
}

struct FccInstance {
  DensityOperator rho;
  Instrument encodings;
  std::vector<QuantumOperation> decoders;
  QuantumOperation channel;
};

inline FccInstance random_fcc_instance(Rng& rng, Index dim_s, Index dim_c, int branches, double s_max) {
  const DensityOperator rho = random_density(rng, dim_s, uniform_index(rng, 1, dim_s));
  std::vector<double> p(static_cast<size_t>(branches));
  double total = 0.0;
  for (double& x : p) total += (x = uniform(rng, 0.2, 1.0));
  std::vector<QuantumOperation> enc;
  std::vector<QuantumOperation> dec;
  for (int m = 0; m < branches; ++m) {
    const Matrix v = random_isometry(rng, dim_c, dim_s);
    const double s = uniform(rng, 0.0, s_max);
    enc.push_back(scaled(mix(QuantumOperation({v}), random_channel(rng, dim_s, dim_c, 2), s), p[size_t(m)] / total));
    dec.push_back(mix(reversal_decoder(v), random_channel(rng, dim_c, dim_s, dim_c), uniform(rng, 0.0, s_max)));
  }
  QuantumOperation channel = perturbed_identity(rng, dim_c, uniform(rng, 0.0, s_max));
  return {rho, Instrument(std::move(enc)), std::move(dec), std::move(channel)};
}

/// F_e(rho, op) >= 1 - 3/2 eta when every pure state of S has fidelity >= 1 - eta
/// and rho is supported in S. eta is the smaller of the optimizer's and a
/// sampling oracle's minimum.
inline CheckReport check_three_halves(const CheckConfig& cfg, double tolerance = 1e-4) {
  const Index ambient = std::max<Index>(cfg.dim, 3);
  return run_trials("three-halves", cfg, tolerance, [&](int trial, Rng& rng) {
    const Index k = uniform_index(rng, 2, 3);
    const Subspace s = random_subspace(rng, ambient, k);
    const QuantumOperation op = perturbed_identity(rng, ambient, uniform(rng, 0.0, cfg.perturbation));
    Matrix rho_m;
    if (trial % 4 == 0) {
      const Matrix pair = s.basis() * random_isometry(rng, k, 2);
      rho_m = 0.5 * pair * pair.adjoint();
    } else {
      const Matrix inner = random_density(rng, k, uniform_index(rng, 1, k)).matrix();
      rho_m = s.basis() * inner * s.basis().adjoint();
    }
    const DensityOperator rho = DensityOperator::trusted(rho_m);
    MinFidelityConfig mcfg;
    mcfg.seed = rng();
    const MinFidelityResult opt = min_pure_state_fidelity(s, op, mcfg);
    double oracle = opt.value;
    for (int t = 0; t < 2000; ++t) {
      oracle = std::min(oracle, pure_state_fidelity(s.basis() * random_unit_vector(rng, k), op));
    }
    const double eta = 1.0 - oracle;
    const double fe = entanglement_fidelity(rho, op);
    TrialOutcome o;
    o.violation = (1.0 - 1.5 * eta) - fe;
    o.metrics.push_back({"max_eta", eta});
    o.metrics.push_back({"max_oracle_gap", opt.value - oracle});
    o.instance = Json::object();
    o.instance["subspace"] = matrix_to_json(s.basis());
    o.instance["rho"] = density_to_json(rho);
    o.instance["op"] = operation_to_json(op);
    o.instance["eta"] = eta;
    return o;
  });
}

/// F_e(rho, A o W) >= 2 F_e(rho, A o E) - 1 with W maximal and X diagonalized.
inline CheckReport check_isometry_extraction(const CheckConfig& cfg) {
  return run_trials("isometry", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index ds = uniform_index(rng, 2, std::max<Index>(2, std::min<Index>(cfg.dim, 3)));
    const Index dc = ds + uniform_index(rng, 0, 2);
    const ExtractionInstance inst = random_extraction_instance(rng, ds, dc, 0.05);
    const IsometryExtraction x = extract_isometry(inst.rho, inst.e, inst.a);
    TrialOutcome o;
    o.violation = (2.0 * x.fe_before - 1.0) - x.fe_after;
    // Structural postconditions have their own thresholds; a miss counts as a full violation.
    if (!(x.maximality_deviation < 1e-9) || !(x.off_diagonal_mass < 1e-10)) o.violation = 1.0;
    o.metrics.push_back({"min_fe_before", x.fe_before, Metric::Reduce::min});
    o.metrics.push_back({"max_maximality_deviation", x.maximality_deviation});
    o.metrics.push_back({"max_off_diagonal_mass", x.off_diagonal_mass});
    o.instance = Json::object();
    o.instance["rho"] = density_to_json(inst.rho);
    o.instance["E"] = operation_to_json(inst.e);
    o.instance["A"] = operation_to_json(inst.a);
    o.instance["result"] = x.to_json();
    return o;
  });
}

/// 3-branch instruments with total fidelity 1 - eta: F_e(rho, D_j N W) >= 1 - 2 eta.
inline CheckReport check_fcc(const CheckConfig& cfg) {
  return run_trials("fcc", cfg, cfg.slack, [&](int, Rng& rng) {
    const Index ds = uniform_index(rng, 2, std::max<Index>(2, std::min<Index>(cfg.dim, 3)));
    const Index dc = ds + uniform_index(rng, 0, 1);
    const FccInstance inst = random_fcc_instance(rng, ds, dc, 3, 0.015);
    const FccDerandomization r = derandomize_fcc(inst.rho, inst.encodings, inst.decoders, inst.channel);
    TrialOutcome o;
    o.violation = (1.0 - 2.0 * r.eta) - r.fe;
    if (!(r.extraction.maximality_deviation < 1e-9)) o.violation = 1.0;
    o.metrics.push_back({"max_eta", r.eta});
    o.metrics.push_back({"min_fe", r.fe, Metric::Reduce::min});
    Json enc = Json::array();
    for (const auto& b : inst.encodings.branches()) enc.push_back(operation_to_json(b));
    Json dec = Json::array();
    for (const auto& d : inst.decoders) dec.push_back(operation_to_json(d));
    o.instance = Json::object();
    o.instance["rho"] = density_to_json(inst.rho);
    o.instance["encodings"] = enc;
    o.instance["decoders"] = dec;
    o.instance["channel"] = operation_to_json(inst.channel);
    o.instance["result"] = r.to_json();
    return o;
  });
}

}  // namespace qfid
