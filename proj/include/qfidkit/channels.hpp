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

// Quantum operations as Kraus families A(rho) = sum_i A_i rho A_i^dagger, plus
// their algebra: composition, tensor powers, unitary remixing, Stinespring
// dilation, embedding of trace-decreasing branches, and instruments.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qfidkit/linalg.hpp"
#include "qfidkit/random.hpp"

namespace qfid {

struct ValidityReport {
  /// Largest eigenvalue of sum A^dagger A - I (<= 0 for trace-nonincreasing maps).
  double max_excess = 0.0;
  /// Operator norm of sum A^dagger A - I.
  double tp_deviation = 0.0;
  bool trace_nonincreasing = true;
  bool trace_preserving = true;
};

namespace detail {

inline ValidityReport assess_kraus(const std::vector<Matrix>& kraus, const Tolerances& tol) {
  const Index n = kraus.front().cols();
  Matrix gram = Matrix::Zero(n, n);
  for (const Matrix& a : kraus) gram.noalias() += a.adjoint() * a;
  gram -= Matrix::Identity(n, n);
  const RealVector ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(hermitian_part(gram), Eigen::EigenvaluesOnly).eigenvalues();
  ValidityReport r;
  r.max_excess = ev(n - 1);
  r.tp_deviation = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
  r.trace_nonincreasing = r.max_excess <= tol.psd;
  r.trace_preserving = r.tp_deviation <= tol.trace;
  return r;
}

}  // namespace detail

class QuantumOperation {
 public:
  /// Tag for completely positive maps without the trace-nonincreasing
  /// constraint, e.g. a branch divided by its output trace.
  struct Unchecked {};

  /// Validating constructor: throws InvalidOperationError unless
  /// sum A^dagger A <= I within tolerance.
  explicit QuantumOperation(std::vector<Matrix> kraus, const Tolerances& tol = {})
      : kraus_(std::move(kraus)) {
    check_shapes();
    report_ = detail::assess_kraus(kraus_, tol);
    if (!report_.trace_nonincreasing) {
      throw InvalidOperationError("QuantumOperation: sum A^dagger A exceeds I by " +
                                  std::to_string(report_.max_excess));
    }
  }

  QuantumOperation(std::vector<Matrix> kraus, Unchecked, const Tolerances& tol = {})
      : kraus_(std::move(kraus)) {
    check_shapes();
    report_ = detail::assess_kraus(kraus_, tol);
  }

  Index dim_in() const { return kraus_.front().cols(); }
  Index dim_out() const { return kraus_.front().rows(); }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  size_t size() const { return kraus_.size(); }
  bool trace_preserving() const { return report_.trace_preserving; }
  bool trace_nonincreasing() const { return report_.trace_nonincreasing; }
  const ValidityReport& report() const { return report_; }

  Matrix gram_sum() const {
    Matrix g = Matrix::Zero(dim_in(), dim_in());
    for (const Matrix& a : kraus_) g.noalias() += a.adjoint() * a;
    return g;
  }

 private:
  void check_shapes() const {
    if (kraus_.empty()) throw ShapeError("QuantumOperation: empty Kraus family");
    for (const Matrix& a : kraus_) {
      if (a.rows() != kraus_.front().rows() || a.cols() != kraus_.front().cols()) {
        throw ShapeError("QuantumOperation: Kraus operators differ in shape");
      }
      if (!all_finite(a)) throw PreconditionError("QuantumOperation: non-finite Kraus entry");
    }
  }

  std::vector<Matrix> kraus_;
  ValidityReport report_;
};

namespace detail {

// Keeps the validating constructor whenever the inputs were trace-nonincreasing.
inline QuantumOperation rebuild(std::vector<Matrix> kraus, bool checked) {
  if (checked) return QuantumOperation(std::move(kraus));
  return QuantumOperation(std::move(kraus), QuantumOperation::Unchecked{});
}

}  // namespace detail

/// Reports trace behaviour; throws InvalidOperationError when the family is
/// not trace-nonincreasing.
inline ValidityReport validate(const QuantumOperation& op, const Tolerances& tol = {}) {
  ValidityReport r = detail::assess_kraus(op.kraus(), tol);
  if (!r.trace_nonincreasing) {
    throw InvalidOperationError("validate: sum A^dagger A exceeds I by " + std::to_string(r.max_excess));
  }
  return r;
}

inline Matrix apply(const QuantumOperation& op, const Matrix& rho) {
  if (rho.rows() != op.dim_in() || rho.cols() != op.dim_in()) {
    throw ShapeError("apply: operator of dimension " + std::to_string(rho.rows()) +
                     " does not match channel input " + std::to_string(op.dim_in()));
  }
  Matrix out = Matrix::Zero(op.dim_out(), op.dim_out());
  for (const Matrix& a : op.kraus()) out.noalias() += a * rho * a.adjoint();
  return out;
}

inline Matrix apply(const QuantumOperation& op, const DensityOperator& rho) {
  return qfid::apply(op, rho.matrix());
}

/// (I_R (x) op) applied to an operator on R (x) Q with reference dimension dim_r.
inline Matrix apply_on_second(const QuantumOperation& op, const Matrix& joint, Index dim_r) {
  if (joint.rows() != dim_r * op.dim_in()) throw ShapeError("apply_on_second: dimension mismatch");
  const Matrix id = Matrix::Identity(dim_r, dim_r);
  Matrix out = Matrix::Zero(dim_r * op.dim_out(), dim_r * op.dim_out());
  for (const Matrix& a : op.kraus()) {
    const Matrix big = tensor(id, a);
    out.noalias() += big * joint * big.adjoint();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kraus-count reduction

inline constexpr double kKrausReductionThreshold = 1e-12;

/// Rewrites the family in the eigenbasis of the Gram matrix tr(A_i^dagger A_j)
/// and drops directions with eigenvalue below threshold. Same action.
inline QuantumOperation reduce_kraus(const QuantumOperation& op,
                                     double threshold = kKrausReductionThreshold) {
  const Index s = static_cast<Index>(op.size());
  Matrix gram(s, s);
  for (Index i = 0; i < s; ++i) {
    for (Index j = i; j < s; ++j) {
      const Complex g = (op.kraus()[size_t(i)].adjoint() * op.kraus()[size_t(j)]).trace();
      gram(i, j) = g;
      gram(j, i) = std::conj(g);
    }
  }
  const EigResult e = eig_hermitian(gram);
  std::vector<Matrix> out;
  for (Index k = 0; k < s; ++k) {
    if (e.values(k) <= threshold) break;
    Matrix b = Matrix::Zero(op.dim_out(), op.dim_in());
    for (Index j = 0; j < s; ++j) b += e.vectors(j, k) * op.kraus()[size_t(j)];
    out.push_back(std::move(b));
  }
  if (out.empty()) out.push_back(Matrix::Zero(op.dim_out(), op.dim_in()));
  return detail::rebuild(std::move(out), op.trace_nonincreasing());
}

enum class KrausReduction { none, gram };

/// The operation `before` followed by `after`, with family {A_i E_j}.
inline QuantumOperation compose(const QuantumOperation& after, const QuantumOperation& before,
                                KrausReduction reduce = KrausReduction::none) {
  if (before.dim_out() != after.dim_in()) {
    throw ShapeError("compose: output dimension " + std::to_string(before.dim_out()) +
                     " does not match input dimension " + std::to_string(after.dim_in()));
  }
  std::vector<Matrix> kraus;
  kraus.reserve(after.size() * before.size());
  for (const Matrix& a : after.kraus()) {
    for (const Matrix& e : before.kraus()) kraus.push_back(a * e);
  }
  QuantumOperation out = detail::rebuild(std::move(kraus),
                                         after.trace_nonincreasing() && before.trace_nonincreasing());
  return reduce == KrausReduction::gram ? reduce_kraus(out) : out;
}

inline QuantumOperation tensor(const QuantumOperation& a, const QuantumOperation& b) {
  std::vector<Matrix> kraus;
  kraus.reserve(a.size() * b.size());
  for (const Matrix& x : a.kraus()) {
    for (const Matrix& y : b.kraus()) kraus.push_back(tensor(x, y));
  }
  return detail::rebuild(std::move(kraus), a.trace_nonincreasing() && b.trace_nonincreasing());
}

inline constexpr int kDefaultTensorPowerCap = 3;

/// n-fold tensor power, reduced to Gram rank after every factor by default.
inline QuantumOperation tensor_power(const QuantumOperation& op, int n,
                                     KrausReduction reduce = KrausReduction::gram,
                                     int cap = kDefaultTensorPowerCap) {
  if (n < 1) throw PreconditionError("tensor_power: n must be >= 1");
  if (n > cap) {
    throw ResourceError("tensor_power: n = " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  }
  QuantumOperation out = op;
  for (int k = 1; k < n; ++k) {
    out = tensor(out, op);
    if (reduce == KrausReduction::gram) out = reduce_kraus(out);
  }
  return out;
}

/// Same action; each operator multiplied by sqrt(factor).
inline QuantumOperation scaled(const QuantumOperation& op, double factor) {
  std::vector<Matrix> kraus;
  for (const Matrix& a : op.kraus()) kraus.push_back(std::sqrt(factor) * a);
  return detail::rebuild(std::move(kraus), factor <= 1.0 && op.trace_nonincreasing());
}

/// Sum of operations with equal dimensions (concatenated families).
inline QuantumOperation sum(const std::vector<QuantumOperation>& ops, bool checked = true) {
  if (ops.empty()) throw ShapeError("sum: no operations");
  std::vector<Matrix> kraus;
  for (const QuantumOperation& op : ops) {
    if (op.dim_in() != ops.front().dim_in() || op.dim_out() != ops.front().dim_out()) {
      throw ShapeError("sum: operations differ in dimensions");
    }
    kraus.insert(kraus.end(), op.kraus().begin(), op.kraus().end());
  }
  return detail::rebuild(std::move(kraus), checked);
}

// ---------------------------------------------------------------------------
// Unitary remixing

/// r x s matrix (s <= r) with orthonormal columns: the maximal partial
/// isometry relating two decompositions, A_i = sum_j m_ij B_j.
class RemixMatrix {
 public:
  explicit RemixMatrix(Matrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
    if (m_.cols() < 1 || m_.cols() > m_.rows()) {
      throw PreconditionError("RemixMatrix: need 1 <= cols <= rows");
    }
    const Index s = m_.cols();
    const double dev = (m_.adjoint() * m_ - Matrix::Identity(s, s)).norm();
    if (dev > tol.trace * static_cast<double>(s) + 1e-12) {
      throw PreconditionError("RemixMatrix: columns are not orthonormal (deviation " +
                              std::to_string(dev) + ")");
    }
  }
  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

inline QuantumOperation remix(const QuantumOperation& op, const RemixMatrix& m) {
  if (m.cols() != static_cast<Index>(op.size())) {
    throw PreconditionError("remix: matrix has " + std::to_string(m.cols()) + " columns for " +
                            std::to_string(op.size()) + " Kraus operators");
  }
  std::vector<Matrix> kraus;
  for (Index i = 0; i < m.rows(); ++i) {
    Matrix a = Matrix::Zero(op.dim_out(), op.dim_in());
    for (Index j = 0; j < m.cols(); ++j) a += m.matrix()(i, j) * op.kraus()[size_t(j)];
    kraus.push_back(std::move(a));
  }
  return detail::rebuild(std::move(kraus), op.trace_nonincreasing());
}

// ---------------------------------------------------------------------------
// Stinespring dilation

/// Unitary on Q (x) E (Q slow) with the environment starting in basis state
/// env_initial_index; <i_E| U |0_E> reproduces the i-th Kraus operator.
struct StinespringDilation {
  Index dim_q = 0;
  Index env_dim = 0;
  Index env_initial_index = 0;
  Matrix unitary;
};

/// Operator matrix element <i_E| U |initial_E> acting on Q.
inline Matrix environment_element(const StinespringDilation& d, Index i) {
  Matrix a(d.dim_q, d.dim_q);
  for (Index qo = 0; qo < d.dim_q; ++qo) {
    for (Index qi = 0; qi < d.dim_q; ++qi) {
      a(qo, qi) = d.unitary(qo * d.env_dim + i, qi * d.env_dim + d.env_initial_index);
    }
  }
  return a;
}

inline QuantumOperation kraus_from_dilation(const StinespringDilation& d) {
  std::vector<Matrix> kraus;
  for (Index i = 0; i < d.env_dim; ++i) kraus.push_back(environment_element(d, i));
  return QuantumOperation(std::move(kraus));
}

/// Dilates a trace-preserving operation with dim_in == dim_out. The isometry
/// formed by the Kraus operators is completed to a unitary with the
/// orthonormal complement from a Householder QR, filled into the remaining
/// columns in increasing index order.
inline StinespringDilation dilate(const QuantumOperation& op, const Tolerances& tol = {}) {
  if (!op.trace_preserving()) throw PreconditionError("dilate: operation is not trace-preserving");
  if (op.dim_in() != op.dim_out()) {
    throw PreconditionError("dilate: only square operations are supported");
  }
  const Index d = op.dim_in();
  const Index k = static_cast<Index>(op.size());
  const Index n = d * k;
  Matrix column(n, d);
  for (Index i = 0; i < k; ++i) {
    const Matrix& a = op.kraus()[size_t(i)];
    for (Index qo = 0; qo < d; ++qo) column.row(qo * k + i) = a.row(qo);
  }
  Matrix complement(n, n - d);
  if (n > d) {
    Eigen::HouseholderQR<Matrix> qr(column);
    const Matrix q = qr.householderQ();
    complement = q.rightCols(n - d);
  }
  StinespringDilation out{d, k, 0, Matrix(n, n)};
  Index next = 0;
  for (Index c = 0; c < n; ++c) {
    if (c % k == 0) {
      out.unitary.col(c) = column.col(c / k);
    } else {
      out.unitary.col(c) = complement.col(next++);
    }
  }
  const double residual = (out.unitary.adjoint() * out.unitary - Matrix::Identity(n, n)).norm();
  if (residual > tol.svd * static_cast<double>(n)) {
    throw DecompositionError("dilate: completion is not unitary", residual);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embedding trace-decreasing operations

/// Completion G with Kraus {K_b (I - sum A^dagger A)^{1/2}}, where the K_b
/// tile the identity of dim_in into dim_out-row blocks (a single padded
/// identity when dim_out >= dim_in). Empty when the branch is already
/// trace-preserving.
inline std::optional<QuantumOperation> embedding_complement(const QuantumOperation& branch,
                                                            const Tolerances& tol = {}) {
  if (!branch.trace_nonincreasing()) {
    throw PreconditionError("embed: branch is not trace-nonincreasing");
  }
  if (branch.trace_preserving()) return std::nullopt;
  const Index din = branch.dim_in();
  const Index dout = branch.dim_out();
  const Matrix deficit = Matrix::Identity(din, din) - branch.gram_sum();
  const Matrix root = sqrt_psd(hermitian_part(deficit), tol);
  std::vector<Matrix> kraus;
  for (Index start = 0; start < din; start += dout) {
    Matrix k = Matrix::Zero(dout, din);
    for (Index t = 0; t < dout && start + t < din; ++t) k(t, start + t) = 1.0;
    kraus.push_back(k * root);
  }
  return QuantumOperation(std::move(kraus));
}

/// Trace-preserving F = branch + G with the branch's Kraus operators first.
inline QuantumOperation embed(const QuantumOperation& branch, const Tolerances& tol = {}) {
  const auto g = embedding_complement(branch, tol);
  if (!g) return branch;
  return sum({branch, *g});
}

// ---------------------------------------------------------------------------
// Instruments

/// Trace-nonincreasing branches summing to a trace-preserving operation.
class Instrument {
 public:
  explicit Instrument(std::vector<QuantumOperation> branches, const Tolerances& tol = {})
      : branches_(std::move(branches)) {
    if (branches_.empty()) throw ShapeError("Instrument: no branches");
    const QuantumOperation total = sum(branches_, false);
    const ValidityReport r = detail::assess_kraus(total.kraus(), tol);
    if (!r.trace_preserving) {
      throw PreconditionError("Instrument: branches do not sum to a trace-preserving operation "
                              "(deviation " + std::to_string(r.tp_deviation) + ")");
    }
  }
  const std::vector<QuantumOperation>& branches() const { return branches_; }
  size_t size() const { return branches_.size(); }
  QuantumOperation total() const { return sum(branches_); }

 private:
  std::vector<QuantumOperation> branches_;
};

// ---------------------------------------------------------------------------
// Standard channels

inline QuantumOperation identity_operation(Index dim) {
  return QuantumOperation({Matrix::Identity(dim, dim)});
}

inline QuantumOperation unitary_operation(const Matrix& u) { return QuantumOperation({u}); }

namespace pauli {
inline Matrix x() { Matrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline Matrix y() { Matrix m(2, 2); m << 0, Complex(0, -1), Complex(0, 1), 0; return m; }
inline Matrix z() { Matrix m(2, 2); m << 1, 0, 0, -1; return m; }
}  // namespace pauli

inline constexpr std::array<std::string_view, 5> kZooNames = {
    "identity", "depolarizing", "dephasing", "amplitude_damping", "erasure_like"};

/// Standard qubit channels. erasure_like maps a qubit into a qutrit whose
/// third level flags the erasure.
inline QuantumOperation channel_zoo(std::string_view name, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw PreconditionError("channel_zoo: parameter " + std::to_string(p) + " outside [0, 1]");
  }
  const Matrix id = Matrix::Identity(2, 2);
  if (name == "identity") return QuantumOperation({id});
  if (name == "depolarizing") {
    return QuantumOperation({std::sqrt(1.0 - 0.75 * p) * id, std::sqrt(p / 4.0) * pauli::x(),
                             std::sqrt(p / 4.0) * pauli::y(), std::sqrt(p / 4.0) * pauli::z()});
  }
  if (name == "dephasing") {
    return QuantumOperation({std::sqrt(1.0 - p) * id, std::sqrt(p) * pauli::z()});
  }
  if (name == "amplitude_damping") {
    Matrix a0(2, 2), a1(2, 2);
    a0 << 1, 0, 0, std::sqrt(1.0 - p);
    a1 << 0, std::sqrt(p), 0, 0;
    return QuantumOperation({a0, a1});
  }
  if (name == "erasure_like") {
    Matrix keep = Matrix::Zero(3, 2), lose0 = Matrix::Zero(3, 2), lose1 = Matrix::Zero(3, 2);
    keep(0, 0) = keep(1, 1) = std::sqrt(1.0 - p);
    lose0(2, 0) = lose1(2, 1) = std::sqrt(p);
    return QuantumOperation({keep, lose0, lose1});
  }
  throw PreconditionError("channel_zoo: unknown channel '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Random instances

/// Random trace-preserving operation: blocks of a Haar isometry C^din -> C^(dout*k).
inline QuantumOperation random_channel(Rng& rng, Index dim_in, Index dim_out, Index num_kraus) {
  const Index rows = dim_out * num_kraus;
  if (rows < dim_in) throw PreconditionError("random_channel: too few Kraus operators");
  const Matrix v = random_isometry(rng, rows, dim_in);
  std::vector<Matrix> kraus;
  for (Index k = 0; k < num_kraus; ++k) kraus.push_back(v.middleRows(k * dim_out, dim_out));
  return QuantumOperation(std::move(kraus));
}

/// Kraus-level mixture (1 - s) * base + s * other: family {sqrt(1-s) B_i} u {sqrt(s) C_j}.
inline QuantumOperation mix(const QuantumOperation& base, const QuantumOperation& other, double s) {
  return sum({scaled(base, 1.0 - s), scaled(other, s)});
}

/// (1 - s) identity + s * (random channel with num_kraus operators).
inline QuantumOperation perturbed_identity(Rng& rng, Index dim, double s, Index num_kraus = 2) {
  return mix(identity_operation(dim), random_channel(rng, dim, dim, num_kraus), s);
}

/// Random trace-nonincreasing operation: a random channel with its last
/// Kraus operator dropped.
inline QuantumOperation random_subchannel(Rng& rng, Index dim_in, Index dim_out, Index num_kraus) {
  const QuantumOperation full = random_channel(rng, dim_in, dim_out, num_kraus + 1);
  std::vector<Matrix> kraus(full.kraus().begin(), full.kraus().end() - 1);
  return QuantumOperation(std::move(kraus));
}

}  // namespace qfid
