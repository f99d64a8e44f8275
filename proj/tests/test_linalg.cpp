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

#include <gtest/gtest.h>

#include "qfidkit/linalg.hpp"
#include "qfidkit/random.hpp"
#include "oracles.hpp"

namespace qfid {
namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

TEST(Svd, IdentityHasUnitSingularValues) {
  const SvdResult s = svd(Matrix::Identity(3, 3));
  for (Index k = 0; k < 3; ++k) EXPECT_NEAR(s.singular(k), 1.0, 1e-14);
  EXPECT_LT((s.u * s.v - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Svd, DiagonalIsSortedDescending) {
  const SvdResult s = svd(diag2(0, 2));
  EXPECT_NEAR(s.singular(0), 2.0, 1e-14);
  EXPECT_NEAR(s.singular(1), 0.0, 1e-14);
}

TEST(Svd, RandomReconstructionThinAndFull) {
  Rng rng = stream_rng(3, 0);
  for (auto [r, c] : {std::pair<Index, Index>{4, 4}, {5, 3}, {3, 5}}) {
    const Matrix m = ginibre(rng, r, c);
    for (SvdMode mode : {SvdMode::thin, SvdMode::full}) {
      const SvdResult s = svd(m, mode);
      EXPECT_LT((m - s.reconstruct()).norm(), 1e-10);
      const Index k = std::min(r, c);
      EXPECT_LT((s.u.leftCols(k).adjoint() * s.u.leftCols(k) - Matrix::Identity(k, k)).norm(), 1e-12);
    }
  }
}

TEST(Svd, NonFiniteInputRaisesDecompositionError) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = NAN;
  EXPECT_THROW(svd(m), DecompositionError);
}

TEST(EigHermitian, MaximallyMixedQubit) {
  const EigResult e = eig_hermitian(Matrix::Identity(2, 2) / 2.0);
  EXPECT_NEAR(e.values(0), 0.5, 1e-15);
  EXPECT_NEAR(e.values(1), 0.5, 1e-15);
}

TEST(EigHermitian, DiagonalValuesAndVectors) {
  const EigResult e = eig_hermitian(diag2(0.1, 0.9));
  EXPECT_NEAR(e.values(0), 0.9, 1e-15);
  EXPECT_NEAR(e.values(1), 0.1, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0, 1e-14);
}

TEST(EigHermitian, RejectsNonHermitian) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eig_hermitian(m), PreconditionError);
}

TEST(EigHermitian, RandomReconstructionAndOrthonormality) {
  Rng rng = stream_rng(4, 0);
  for (Index d = 2; d <= 7; ++d) {
    const Matrix h = random_hermitian(rng, d);
    const EigResult e = eig_hermitian(h);
    EXPECT_LT((e.reconstruct() - h).norm(), 1e-12);
    EXPECT_LT((e.vectors.adjoint() * e.vectors - Matrix::Identity(d, d)).norm(), 1e-12);
    for (Index k = 1; k < d; ++k) EXPECT_GE(e.values(k - 1), e.values(k));
  }
}

TEST(Polar, UnitaryIsItsOwnIsometry) {
  Rng rng = stream_rng(5, 0);
  const Matrix u = random_unitary(rng, 3);
  const PolarResult p = polar(u);
  EXPECT_LT((p.isometry - u).norm(), 1e-10);
  EXPECT_LT((p.positive - Matrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(Polar, ScaledIdentity) {
  const PolarResult p = polar(Matrix(2.0 * Matrix::Identity(2, 2)));
  EXPECT_LT((p.isometry - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT((p.positive - 2.0 * Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Polar, RankOneIsCompletedToMaximalIsometry) {
  Rng rng = stream_rng(6, 0);
  const Vector a = random_unit_vector(rng, 3);
  const Vector b = random_unit_vector(rng, 3);
  const Matrix m = a * b.adjoint();
  const PolarResult p = polar(m);
  const Matrix wtw = p.isometry.adjoint() * p.isometry;
  EXPECT_LT((wtw - Matrix::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LT((p.isometry * p.positive - m).norm(), 1e-10);
  EXPECT_NEAR(p.positive.trace().real(), 1.0, 1e-10);
}

TEST(TraceNorm, MatchesSingularValueSumOfHermitian) {
  Rng rng = stream_rng(7, 0);
  const Matrix h = random_hermitian(rng, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  EXPECT_NEAR(trace_norm(h), es.eigenvalues().cwiseAbs().sum(), 1e-12);
}

TEST(PartialTrace, ProductStateFactors) {
  Rng rng = stream_rng(8, 0);
  const DensityOperator a = random_density(rng, 2);
  const DensityOperator b = random_density(rng, 3);
  const Matrix ab = tensor(a.matrix(), b.matrix());
  EXPECT_LT((partial_trace(ab, Subsystem::first, 2, 3) - b.matrix()).norm(), 1e-13);
  EXPECT_LT((partial_trace(ab, Subsystem::second, 2, 3) - a.matrix()).norm(), 1e-13);
}

TEST(PartialTrace, RejectsBadFactorization) {
  EXPECT_THROW(partial_trace(Matrix::Identity(6, 6), Subsystem::first, 4, 2), ShapeError);
}

TEST(DensityOperator, ValidatesInput) {
  EXPECT_THROW(DensityOperator(diag2(0.5, 0.6)), PreconditionError);
  EXPECT_THROW(DensityOperator(diag2(1.2, -0.2)), PreconditionError);
  Matrix m = diag2(0.5, 0.5);
  m(0, 1) = 0.3;
  EXPECT_THROW(DensityOperator{m}, PreconditionError);
  EXPECT_THROW(DensityOperator(Matrix::Identity(2, 3)), ShapeError);
  EXPECT_NO_THROW(DensityOperator(diag2(0.7, 0.3)));
}

TEST(DensityOperator, NormalizedDividesByTrace) {
  const DensityOperator rho = DensityOperator::normalized(diag2(3, 1));
  EXPECT_NEAR(rho.matrix()(0, 0).real(), 0.75, 1e-15);
  EXPECT_THROW(DensityOperator::normalized(Matrix::Zero(2, 2)), DegenerateInputError);
}

TEST(Purify, PureStateIsProduct) {
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  const Purification p = purify(DensityOperator::pure(v));
  EXPECT_EQ(p.dim_r, 1);
  EXPECT_NEAR(std::abs(p.vec(0)), 1.0, 1e-14);
}

TEST(Purify, MaximallyMixedQubitIsBellLike) {
  const Purification p = purify(DensityOperator::maximally_mixed(2));
  EXPECT_EQ(p.dim_r, 2);
  const Matrix coeffs = Eigen::Map<const Matrix>(p.vec.data(), 2, 2);
  const RealVector s = Eigen::JacobiSVD<Matrix>(coeffs).singularValues();
  EXPECT_NEAR(s(0), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(s(1), std::sqrt(0.5), 1e-14);
}

TEST(Purify, SchmidtCoefficientsAreRootEigenvalues) {
  const std::vector<double> p{0.9, 0.1};
  const Purification psi = purify(DensityOperator::diagonal(p));
  const Matrix coeffs = Eigen::Map<const Matrix>(psi.vec.data(), psi.dim_q, psi.dim_r);
  const RealVector s = Eigen::JacobiSVD<Matrix>(coeffs).singularValues();
  EXPECT_NEAR(s(0), std::sqrt(0.9), 1e-14);
  EXPECT_NEAR(s(1), std::sqrt(0.1), 1e-14);
}

TEST(Purify, ReducedStateRecoversInputAcrossReferenceRotations) {
  Rng rng = stream_rng(9, 0);
  for (int t = 0; t < 20; ++t) {
    const Index d = uniform_index(rng, 2, 5);
    const DensityOperator rho = random_density(rng, d, uniform_index(rng, 1, d));
    const Purification p = purify(rho);
    EXPECT_LT((p.reduced_q() - rho.matrix()).norm(), 1e-12);
    const Purification q = rotate_reference(p, random_unitary(rng, p.dim_r));
    EXPECT_LT((q.reduced_q() - rho.matrix()).norm(), 1e-12);
  }
}

TEST(Subspace, SpanOrthonormalizes) {
  Rng rng = stream_rng(10, 0);
  const Subspace s = Subspace::span(ginibre(rng, 5, 2));
  EXPECT_EQ(s.dim(), 2);
  EXPECT_EQ(s.ambient_dim(), 5);
  const Matrix p = s.projector();
  EXPECT_LT((p * p - p).norm(), 1e-12);
  EXPECT_THROW(Subspace(Matrix::Ones(3, 2)), PreconditionError);
}

TEST(Tensor, MatchesEntrywiseDefinition) {
  Rng rng = stream_rng(11, 0);
  const Matrix a = ginibre(rng, 2, 3);
  const Matrix b = ginibre(rng, 3, 2);
  const Matrix ab = tensor(a, b);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 3; ++k)
        for (Index l = 0; l < 2; ++l) EXPECT_EQ(ab(i * 3 + k, j * 2 + l), a(i, j) * b(k, l));
}

}  // namespace
}  // namespace qfid
