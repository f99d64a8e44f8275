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

#include "qfidkit/procedures.hpp"
#include "qfidkit/sources.hpp"
#include "oracles.hpp"

namespace qfid {
namespace {

DensityOperator diag_state(std::vector<double> p) { return DensityOperator::diagonal(p); }

Matrix ket(Index d, Index k) {
  Matrix v = Matrix::Zero(d, 1);
  v(k, 0) = 1.0;
  return v;
}

double lowest_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(hermitian_part(m), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// Shared invariants of a stripping ensemble for rho.
void expect_ensemble_invariants(const StrippingEnsemble& ens, const DensityOperator& rho) {
  const double lambda_max = rho.spectrum().values(0);
  const Index rank = ens.rank();
  EXPECT_LT((ens.reconstruct() - rho.matrix()).norm(), 1e-8);
  EXPECT_NEAR(ens.total_weight(), 1.0, 1e-10);
  for (Index i = 0; i < rank; ++i) {
    const StrippingStep& st = ens.steps[size_t(i)];
    EXPECT_EQ(st.rank_before, rank - i);
    EXPECT_LE(st.q, lambda_max + 1e-10);
    const Matrix rest = ens.residual(i);
    EXPECT_LT(lowest_eigenvalue(rest - (st.q + 1e-6) * st.state * st.state.adjoint()), 0.0) << "step " << i;
    if (i > 0) EXPECT_GE(st.fidelity, ens.steps[size_t(i - 1)].fidelity - kOptimizerSlack);
  }
}

TEST(Stripping, IdentityOperationHasUnitFidelities) {
  Rng rng = stream_rng(70, 0);
  const DensityOperator rho = random_density(rng, 3);
  const StrippingResult r = strip_support(rho, identity_operation(3), 1);
  for (const auto& st : r.ensemble.steps) EXPECT_NEAR(st.fidelity, 1.0, 1e-12);
  EXPECT_EQ(r.retained.dim(), 2);
  expect_ensemble_invariants(r.ensemble, rho);
}

TEST(Stripping, MaximallyMixedDephasingRemovesEquatorialState) {
  const double p = 0.3;
  const StrippingResult r = strip_support(DensityOperator::maximally_mixed(2), channel_zoo("dephasing", p), 1);
  const StrippingStep& first = r.ensemble.steps[0];
  EXPECT_NEAR(first.fidelity, 1.0 - p, 1e-8);
  EXPECT_NEAR(first.q, 0.5, 1e-8);
  EXPECT_NEAR(std::abs(first.state(0)), std::sqrt(0.5), 1e-4);
  EXPECT_EQ(r.retained.dim(), 1);
  EXPECT_NEAR(r.ensemble.steps[1].fidelity, 1.0 - p, 1e-8);
  EXPECT_NEAR(r.gamma, p, 1e-8);
}

TEST(Stripping, RandomRankFourInvariants) {
  Rng rng = stream_rng(71, 0);
  for (int t = 0; t < 8; ++t) {
    const DensityOperator rho = random_density(rng, 5, 4);
    const QuantumOperation op = perturbed_identity(rng, 5, 0.3);
    const StrippingResult r = strip_support(rho, op, 2);
    ASSERT_EQ(r.ensemble.rank(), 4);
    expect_ensemble_invariants(r.ensemble, rho);
    const double oracle = qfid_test::sampled_min_fidelity(op.kraus(), r.retained.basis(), 3000, 7 + t);
    EXPECT_GE(oracle, r.ensemble.steps[2].fidelity - kOptimizerSlack);
    EXPECT_GE(r.convexity_lhs, r.fe - 1e-10);
    EXPECT_LE(r.gamma, r.gamma_bound + kOptimizerSlack);
  }
}

TEST(Stripping, RankTooSmallRejected) {
  EXPECT_THROW(strip_support(diag_state({1.0, 0.0}), identity_operation(2), 1), PreconditionError);
}

TEST(RateAccounting, NothingRemovedKeepsRank) {
  Rng rng = stream_rng(72, 0);
  const DensityOperator rho = random_density(rng, 4, 3);
  const StrippingResult s = strip_support(rho, perturbed_identity(rng, 4, 0.2), 0);
  const RateAccounting r = rate_accounting(s.ensemble, rho, 0.0);
  EXPECT_EQ(r.n0, 0);
  EXPECT_EQ(r.retained_dim, 3);
}

TEST(RateAccounting, MaximallyMixedEight) {
  Rng rng = stream_rng(73, 0);
  const DensityOperator rho = DensityOperator::maximally_mixed(8);
  const StrippingResult s = strip_support(rho, perturbed_identity(rng, 8, 0.2), 2);
  const RateAccounting r = rate_accounting(s.ensemble, rho, 0.25);
  EXPECT_EQ(r.n0, 2);
  EXPECT_EQ(r.retained_dim, 6);
  EXPECT_NEAR(r.alpha, 0.25, 1e-8);
  EXPECT_TRUE(r.bound_holds);
  EXPECT_NEAR(r.dim_lower_bound, 6.0, 1e-6);
}

TEST(RateAccounting, TypicalRestrictionWindow) {
  const IIDSource src(DensityOperator::diagonal(std::vector<double>{0.8, 0.2}));
  const int n = 5;
  const double eps = 0.25;
  const TypicalSubspace t = typical_subspace(src, n, eps);
  const DensityOperator rho = renormalized_typical_restriction(src, n, eps);
  Rng rng = stream_rng(74, 0);
  const StrippingResult s = strip_support(rho, perturbed_identity(rng, 32, 0.1), 1);
  const RateAccounting r = rate_accounting(s.ensemble, rho, 0.2);
  EXPECT_TRUE(r.bound_holds);
  EXPECT_LE(r.lambda_max, std::exp2(-n * (src.entropy_rate() - eps)) / t.weight() + 1e-12);
  EXPECT_GE(double(r.retained_dim), (1 - r.alpha) * t.weight() * std::exp2(n * (src.entropy_rate() - eps)) - 1e-9);
}

TEST(ThreeHalves, TrivialCases) {
  Rng rng = stream_rng(75, 0);
  EXPECT_NEAR(entanglement_fidelity(random_density(rng, 3), identity_operation(3)), 1.0, 1e-14);
  const QuantumOperation op = perturbed_identity(rng, 3, 0.1);
  const Vector v = random_unit_vector(rng, 3);
  EXPECT_NEAR(entanglement_fidelity(DensityOperator::pure(v), op), pure_state_fidelity(v, op), 1e-14);
}

TEST(PhaseAverage, IdentityAndPureCases) {
  Rng rng = stream_rng(76, 0);
  EXPECT_NEAR(phase_average_fidelity(random_density(rng, 3), identity_operation(3)), 1.0, 1e-12);
  const Vector v = random_unit_vector(rng, 3);
  const QuantumOperation op = random_channel(rng, 3, 3, 2);
  EXPECT_NEAR(phase_average_fidelity(DensityOperator::pure(v), op), pure_state_fidelity(v, op), 1e-12);
}

TEST(PhaseAverage, DephasedQubitClosedForm) {
  const DensityOperator rho = diag_state({0.7, 0.3});
  const QuantumOperation op = channel_zoo("dephasing", 0.2);
  // Every phase gives (1-p) + p <Z>^2 = 0.8 + 0.2 * 0.16.
  const double closed = 0.832;
  EXPECT_NEAR(phase_average_fidelity(rho, op, PhaseSet::four_point()), closed, 1e-12);
  EXPECT_NEAR(phase_average_identity(rho, op), closed, 1e-12);
}

TEST(PhaseAverage, FourPointMatchesCrossTermIdentityOnRandomInstances) {
  Rng rng = stream_rng(77, 0);
  for (int t = 0; t < 10; ++t) {
    const Index d = uniform_index(rng, 2, 4);
    const DensityOperator rho = random_density(rng, d);
    const QuantumOperation op = random_channel(rng, d, d, 3);
    EXPECT_NEAR(phase_average_fidelity(rho, op, PhaseSet::four_point()), phase_average_identity(rho, op), 1e-12);
    EXPECT_NEAR(phase_average_fidelity(rho, op, PhaseSet::grid(5)), phase_average_identity(rho, op), 1e-12);
  }
}

TEST(PhaseAverage, SamplingBeyondEnumerationLimit) {
  Rng rng = stream_rng(78, 0);
  const DensityOperator rho = random_density(rng, 4);
  const QuantumOperation op = random_channel(rng, 4, 4, 2);
  PhaseAverageConfig cfg;
  cfg.enumeration_limit = 10;
  cfg.samples = 20000;
  EXPECT_NEAR(phase_average_fidelity(rho, op, PhaseSet::four_point(), cfg), phase_average_identity(rho, op), 0.01);
}

TEST(Extraction, PerfectTransmission) {
  Rng rng = stream_rng(79, 0);
  const Matrix v = random_isometry(rng, 3, 2);
  const DensityOperator rho = random_density(rng, 2);
  const IsometryExtraction x = extract_isometry(rho, QuantumOperation({v}), reversal_decoder(v));
  EXPECT_NEAR(x.fe_before, 1.0, 1e-12);
  EXPECT_NEAR(x.fe_after, 1.0, 1e-10);
  EXPECT_LT(x.maximality_deviation, 1e-9);
}

TEST(Extraction, UnitaryRecoveredUpToPhase) {
  Rng rng = stream_rng(80, 0);
  const Matrix u = random_unitary(rng, 3);
  const DensityOperator rho = random_density(rng, 3);
  const IsometryExtraction x = extract_isometry(rho, unitary_operation(u), unitary_operation(Matrix(u.adjoint())));
  for (int t = 0; t < 5; ++t) {
    const Matrix s = random_density(rng, 3).matrix();
    EXPECT_LT((x.w * s * x.w.adjoint() - u * s * u.adjoint()).norm(), 1e-10);
  }
}

TEST(Extraction, RandomQubitInstancesMeetGuarantee) {
  Rng rng = stream_rng(81, 0);
  for (int t = 0; t < 50; ++t) {
    const ExtractionInstance inst = random_extraction_instance(rng, 2, 3, 0.05);
    const IsometryExtraction x = extract_isometry(inst.rho, inst.e, inst.a);
    EXPECT_GE(x.fe_after, 2 * x.fe_before - 1 - 1e-8);
    EXPECT_LT(x.off_diagonal_mass, 1e-10);
    EXPECT_LT(maximality_deviation(x.w), 1e-9);
    EXPECT_EQ(x.w.rows(), 3);
    EXPECT_EQ(x.w.cols(), 2);
  }
}

TEST(Extraction, ShapeAndTraceChecks) {
  Rng rng = stream_rng(82, 0);
  const DensityOperator rho = random_density(rng, 2);
  EXPECT_THROW(extract_isometry(rho, identity_operation(3), identity_operation(3)), ShapeError);
  const QuantumOperation lossy({Matrix(Matrix::Identity(2, 2) * std::sqrt(0.5))});
  EXPECT_THROW(extract_isometry(rho, lossy, identity_operation(2)), PreconditionError);
}

TEST(Fcc, SingleBranchReducesToExtraction) {
  Rng rng = stream_rng(83, 0);
  const ExtractionInstance inst = random_extraction_instance(rng, 2, 2, 0.02);
  const FccDerandomization r =
      derandomize_fcc(inst.rho, Instrument({inst.e}), {inst.a}, identity_operation(2));
  const IsometryExtraction x = extract_isometry(inst.rho, inst.e, inst.a);
  EXPECT_EQ(r.chosen, 0);
  EXPECT_NEAR(r.fe, x.fe_after, 1e-12);
}

TEST(Fcc, PicksThePerfectBranch) {
  Rng rng = stream_rng(84, 0);
  const Matrix u = random_unitary(rng, 2);
  const Matrix w = random_unitary(rng, 2);
  const DensityOperator rho = diag_state({0.6, 0.4});
  const QuantumOperation useless_decoder({Matrix(pauli::x() * w.adjoint())});
  const Instrument enc({scaled(unitary_operation(w), 0.1), scaled(unitary_operation(u), 0.9)});
  const FccDerandomization r =
      derandomize_fcc(rho, enc, {useless_decoder, unitary_operation(Matrix(u.adjoint()))}, identity_operation(2));
  EXPECT_EQ(r.chosen, 1);
  EXPECT_NEAR(r.fe, 1.0, 1e-10);
}

TEST(Fcc, RandomInstancesMeetGuarantee) {
  Rng rng = stream_rng(85, 0);
  for (int t = 0; t < 20; ++t) {
    const FccInstance inst = random_fcc_instance(rng, 2, 3, 3, 0.01);
    const FccDerandomization r = derandomize_fcc(inst.rho, inst.encodings, inst.decoders, inst.channel);
    EXPECT_GE(r.fe, 1 - 2 * r.eta - 1e-8);
  }
}

TEST(Fcc, WeakSchemesRejected) {
  const DensityOperator rho = DensityOperator::maximally_mixed(2);
  const Instrument enc({unitary_operation(pauli::x())});
  EXPECT_THROW(derandomize_fcc(rho, enc, {identity_operation(2)}, identity_operation(2)), PreconditionError);
  EXPECT_THROW(derandomize_fcc(rho, enc, {}, identity_operation(2)), ShapeError);
}

TEST(Checks, SmallSweepsPass) {
  CheckConfig cfg;
  cfg.trials = 40;
  cfg.seed = 5;
  cfg.dim = 6;
  const CheckReport th = check_three_halves(cfg);
  EXPECT_TRUE(th.pass) << th.max_violation;
  EXPECT_LE(th.metrics.at("max_eta"), 0.1);
  cfg.dim = 3;
  EXPECT_TRUE(check_isometry_extraction(cfg).pass);
  EXPECT_TRUE(check_fcc(cfg).pass);
}

}  // namespace
}  // namespace qfid
