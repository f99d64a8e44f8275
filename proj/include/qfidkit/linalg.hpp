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

// Dense complex linear algebra shared by every other module: decompositions,
// tensor products, partial traces, purifications.
//
// Conventions:
//   * Bipartite spaces are ordered R (x) Q with R the slow index, so the basis
//     vector |r>|q> sits at position r * dim_q + q.
//   * Eigenvalues and singular values are always returned in descending order.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qfidkit/errors.hpp"

namespace qfid {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances. Hermiticity, trace and positivity tolerances are
/// absolute for unit-trace operators; the decomposition tolerance is relative to
/// the Frobenius norm of the input.
struct Tolerances {
  double herm = 1e-9;
  double trace = 1e-9;
  double psd = 1e-9;
  double svd = 1e-8;
};

inline double frobenius(const Matrix& m) { return m.norm(); }

/// max(1, ||m||_F); keeps relative tests meaningful for tiny matrices.
inline double norm_scale(const Matrix& m) { return std::max(1.0, m.norm()); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol * norm_scale(m);
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw ShapeError(std::string(what) + ": expected a square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// ---------------------------------------------------------------------------
// Singular value decomposition

enum class SvdMode { thin, full };

/// m = u * diag(singular) * v. In thin mode u is rows x k and v is k x cols with
/// k = min(rows, cols); in full mode both factors are square unitaries and only
/// the leading k columns of u / rows of v meet the singular values.
struct SvdResult {
  Matrix u;
  RealVector singular;
  Matrix v;

  Matrix reconstruct() const {
    const Index k = singular.size();
    return u.leftCols(k) * singular.cast<Complex>().asDiagonal() * v.topRows(k);
  }
};

inline SvdResult svd(const Matrix& m, SvdMode mode = SvdMode::thin, const Tolerances& tol = {}) {
  if (!all_finite(m)) throw DecompositionError("svd: non-finite input", INFINITY);
  const unsigned opts = mode == SvdMode::thin ? (Eigen::ComputeThinU | Eigen::ComputeThinV)
                                              : (Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::JacobiSVD<Matrix> solver(m, opts);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV().adjoint()};
  const double residual = (m - out.reconstruct()).norm();
  if (!(residual <= tol.svd * norm_scale(m))) {
    throw DecompositionError("svd: reconstruction failed", residual);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

/// values descending; vectors.col(k) pairs with values(k).
struct EigResult {
  RealVector values;
  Matrix vectors;

  Matrix reconstruct() const {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
  }
};

namespace detail {

// Modified Gram-Schmidt, in place, column order preserved.
inline void orthonormalize_columns(Matrix& q) {
  for (Index j = 0; j < q.cols(); ++j) {
    for (Index i = 0; i < j; ++i) {
      const Complex overlap = q.col(i).dot(q.col(j));
      q.col(j) -= overlap * q.col(i);
    }
    const double n = q.col(j).norm();
    if (n > 0.0) q.col(j) /= n;
  }
}

}  // namespace detail

inline EigResult eig_hermitian(const Matrix& m, const Tolerances& tol = {}) {
  require_square(m, "eig_hermitian");
  if (!all_finite(m)) throw PreconditionError("eig_hermitian: non-finite input");
  if (!is_hermitian(m, tol.herm)) {
    throw PreconditionError("eig_hermitian: input is not Hermitian (deviation " +
                            std::to_string((m - m.adjoint()).norm()) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw DecompositionError("eig_hermitian: solver did not converge", INFINITY);
  }
  const Index n = m.rows();
  // The solver returns ascending values; a stable sort keeps its order among ties.
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const RealVector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return raw(a) > raw(b); });
  EigResult out{RealVector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values(k) = raw(order[static_cast<size_t>(k)]);
    out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
  }
  detail::orthonormalize_columns(out.vectors);
  return out;
}

/// Applies f to the eigenvalues of a Hermitian matrix.
template <typename F>
Matrix hermitian_function(const Matrix& m, F&& f, const Tolerances& tol = {}) {
  EigResult e = eig_hermitian(m, tol);
  for (Index k = 0; k < e.values.size(); ++k) e.values(k) = f(e.values(k));
  return e.reconstruct();
}

/// Square root of a positive semidefinite matrix; tiny negative eigenvalues are clamped.
inline Matrix sqrt_psd(const Matrix& m, const Tolerances& tol = {}) {
  return hermitian_function(m, [](double x) { return std::sqrt(std::max(x, 0.0)); }, tol);
}

/// Moore-Penrose inverse of a PSD matrix restricted to eigenvalues above cutoff.
inline Matrix pseudo_inverse_psd(const Matrix& m, double cutoff, const Tolerances& tol = {}) {
  return hermitian_function(m, [cutoff](double x) { return x > cutoff ? 1.0 / x : 0.0; }, tol);
}

/// Trace norm tr sqrt(M^dagger M), i.e. the sum of singular values.
inline double trace_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues().sum();
}

// ---------------------------------------------------------------------------
// Polar decomposition

/// m = isometry * positive with positive = sqrt(m^dagger m) and isometry a
/// maximal partial isometry.
struct PolarResult {
  Matrix isometry;
  Matrix positive;
};

inline PolarResult polar(const Matrix& m, const Tolerances& tol = {}) {
  const SvdResult s = svd(m, SvdMode::thin, tol);
  PolarResult out{s.u * s.v,
                  s.v.adjoint() * s.singular.cast<Complex>().asDiagonal() * s.v};
  const double residual = (m - out.isometry * out.positive).norm();
  if (!(residual <= tol.svd * norm_scale(m))) {
    throw DecompositionError("polar: reconstruction failed", residual);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tensor algebra

/// Kronecker product; the left factor is the slow index.
inline Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Matrix tensor_power(const Matrix& a, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) out = tensor(out, a);
  return out;
}

enum class Subsystem { first, second };

/// Traces out one factor of a square matrix on first (x) second.
inline Matrix partial_trace(const Matrix& m, Subsystem over, Index dim_first, Index dim_second) {
  require_square(m, "partial_trace");
  if (dim_first < 1 || dim_second < 1 || m.rows() != dim_first * dim_second) {
    throw ShapeError("partial_trace: matrix of dimension " + std::to_string(m.rows()) +
                     " does not factor as " + std::to_string(dim_first) + " x " +
                     std::to_string(dim_second));
  }
  if (over == Subsystem::first) {
    Matrix out = Matrix::Zero(dim_second, dim_second);
    for (Index r = 0; r < dim_first; ++r) {
      out += m.block(r * dim_second, r * dim_second, dim_second, dim_second);
    }
    return out;
  }
  Matrix out(dim_first, dim_first);
  for (Index r = 0; r < dim_first; ++r) {
    for (Index s = 0; s < dim_first; ++s) {
      out(r, s) = m.block(r * dim_second, s * dim_second, dim_second, dim_second).trace();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Density operators

class DensityOperator {
 public:
  /// Validates hermiticity, positivity and unit trace; stores the Hermitian part.
  explicit DensityOperator(const Matrix& m, const Tolerances& tol = {}) : matrix_(validate(m, tol)) {}

  /// Divides a nonzero positive operator by its trace.
  static DensityOperator normalized(const Matrix& positive, const Tolerances& tol = {}) {
    const double t = positive.trace().real();
    if (!(t > tol.trace)) {
      throw DegenerateInputError("DensityOperator::normalized: trace " + std::to_string(t));
    }
    return DensityOperator(Matrix(positive / t), tol);
  }

  static DensityOperator pure(const Vector& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw DegenerateInputError("DensityOperator::pure: zero vector");
    const Vector u = v / n;
    return DensityOperator(Matrix(u * u.adjoint()), Trusted{});
  }

  static DensityOperator maximally_mixed(Index dim) {
    return DensityOperator(Matrix(Matrix::Identity(dim, dim) / static_cast<double>(dim)), Trusted{});
  }

  static DensityOperator diagonal(std::span<const double> probabilities, const Tolerances& tol = {}) {
    Matrix m = Matrix::Zero(static_cast<Index>(probabilities.size()),
                            static_cast<Index>(probabilities.size()));
    for (size_t i = 0; i < probabilities.size(); ++i) m(Index(i), Index(i)) = probabilities[i];
    return DensityOperator(m, tol);
  }

  /// For operators that are valid by construction (tensor products and
  /// compressions of valid states). Skips the eigenvalue test.
  static DensityOperator trusted(Matrix m) { return DensityOperator(std::move(m), Trusted{}); }

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  EigResult spectrum() const { return eig_hermitian(matrix_); }

 private:
  struct Trusted {};
  DensityOperator(Matrix m, Trusted) : matrix_(hermitian_part(m)) {}

  static Matrix validate(const Matrix& m, const Tolerances& tol) {
    require_square(m, "DensityOperator");
    if (m.rows() < 1) throw ShapeError("DensityOperator: empty matrix");
    if (!all_finite(m)) throw PreconditionError("DensityOperator: non-finite entries");
    if (!is_hermitian(m, tol.herm)) throw PreconditionError("DensityOperator: not Hermitian");
    const double t = m.trace().real();
    if (std::abs(t - 1.0) > tol.trace) {
      throw PreconditionError("DensityOperator: trace " + std::to_string(t) + " != 1");
    }
    const Matrix h = hermitian_part(m);
    const double lowest = Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lowest < -tol.psd) {
      throw PreconditionError("DensityOperator: negative eigenvalue " + std::to_string(lowest));
    }
    return h;
  }

  Matrix matrix_;
};

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator::trusted(tensor(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------------------
// Purifications

/// Unit vector on R (x) Q whose reduced state on Q is the purified operator.
struct Purification {
  Index dim_r = 0;
  Index dim_q = 0;
  Vector vec;

  Matrix projector() const { return vec * vec.adjoint(); }
  Matrix reduced_q() const { return partial_trace(projector(), Subsystem::first, dim_r, dim_q); }
};

/// Eigenvalues at or below this are dropped from the reference factor.
inline constexpr double kPurificationCutoff = 1e-14;

/// Canonical purification sum_k sqrt(lambda_k) |k_R>|k_Q> over the support of
/// rho, eigenvalues descending, dim_R = rank(rho).
inline Purification purify(const DensityOperator& rho) {
  const EigResult e = rho.spectrum();
  Index rank = 0;
  while (rank < e.values.size() && e.values(rank) > kPurificationCutoff) ++rank;
  const Index dq = rho.dim();
  Purification out{rank, dq, Vector::Zero(rank * dq)};
  for (Index k = 0; k < rank; ++k) {
    out.vec.segment(k * dq, dq) = std::sqrt(e.values(k)) * e.vectors.col(k);
  }
  out.vec /= out.vec.norm();
  return out;
}

/// Applies a unitary on the reference factor; the result purifies the same state.
inline Purification rotate_reference(const Purification& p, const Matrix& unitary_r) {
  if (unitary_r.rows() != p.dim_r || unitary_r.cols() != p.dim_r) {
    throw ShapeError("rotate_reference: unitary does not act on the reference factor");
  }
  return Purification{p.dim_r, p.dim_q,
                      tensor(unitary_r, Matrix::Identity(p.dim_q, p.dim_q)) * p.vec};
}

// ---------------------------------------------------------------------------
// Subspaces

class Subspace {
 public:
  /// basis columns must be orthonormal.
  explicit Subspace(Matrix basis, const Tolerances& tol = {}) : basis_(std::move(basis)) {
    if (basis_.cols() < 1 || basis_.cols() > basis_.rows()) {
      throw ShapeError("Subspace: need 1 <= k <= ambient basis columns");
    }
    const Index k = basis_.cols();
    const double dev = (basis_.adjoint() * basis_ - Matrix::Identity(k, k)).norm();
    if (dev > tol.trace * static_cast<double>(k) + 1e-12) {
      throw PreconditionError("Subspace: basis is not orthonormal (deviation " + std::to_string(dev) + ")");
    }
  }

  static Subspace full(Index dim) { return Subspace(Matrix::Identity(dim, dim)); }

  /// Orthonormalizes the given spanning vectors (must be linearly independent).
  static Subspace span(Matrix vectors) {
    detail::orthonormalize_columns(vectors);
    return Subspace(std::move(vectors));
  }

  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  Matrix projector() const { return basis_ * basis_.adjoint(); }

 private:
  Matrix basis_;
};

}  // namespace qfid
