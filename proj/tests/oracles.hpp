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

// Independent reference computations used only by the tests. They avoid the
// library code paths they are compared against.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace qfid_test {

using C = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// -p log2 p - (1-p) log2 (1-p), scalar form.
inline double h2(double p) {
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Typical weight of diag(p, 1-p)^{(x) n}: sum over k (count of the p factor)
/// of C(n,k) p^k (1-p)^(n-k), for k whose per-symbol surprisal lies within eps of h(p).
struct BinomialOracle {
  double weight = 0.0;
  double dim = 0.0;
  std::vector<double> eigenvalues;  // with multiplicity, unsorted
};

inline BinomialOracle binomial_typical(double p, int n, double eps) {
  BinomialOracle o;
  const double s = h2(p);
  for (int k = 0; k <= n; ++k) {
    const double logp = k * std::log2(p) + (n - k) * std::log2(1.0 - p);
    if (std::abs(-logp / n - s) <= eps + 1e-12) {
      const double mult = binomial(n, k);
      const double v = std::pow(p, k) * std::pow(1.0 - p, n - k);
      o.weight += mult * v;
      o.dim += mult;
      for (int m = 0; m < static_cast<int>(mult); ++m) o.eigenvalues.push_back(v);
    }
  }
  return o;
}

/// Fibonacci lattice on the Bloch sphere, returned as qubit state vectors.
inline std::vector<Vec> fibonacci_sphere(int count) {
  std::vector<Vec> out;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double theta = std::acos(z);
    const double phi = golden * i;
    Vec v(2);
    v << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
    out.push_back(v);
  }
  return out;
}

/// sum_i |<psi|A_i|psi>|^2 evaluated entry by entry.
inline double pure_fidelity(const std::vector<Mat>& kraus, const Vec& psi) {
  double f = 0.0;
  for (const Mat& a : kraus) {
    C z = 0.0;
    for (int r = 0; r < a.rows(); ++r) {
      for (int c = 0; c < a.cols(); ++c) z += std::conj(psi(r)) * a(r, c) * psi(c);
    }
    f += std::norm(z);
  }
  return f;
}

/// Minimum pure-state fidelity over random unit vectors in span(basis).
inline double sampled_min_fidelity(const std::vector<Mat>& kraus, const Mat& basis, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = 1e300;
  for (int s = 0; s < samples; ++s) {
    Vec c(basis.cols());
    for (int i = 0; i < c.size(); ++i) c(i) = C(g(rng), g(rng));
    c.normalize();
    best = std::min(best, pure_fidelity(kraus, basis * c));
  }
  return best;
}

/// Entropy in bits of a Hermitian matrix's spectrum (independent eigen solve).
inline double entropy_bits(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double x = es.eigenvalues()(i);
    if (x > 1e-13) s -= x * std::log2(x);
  }
  return s;
}

/// Coherent information of amplitude damping at diag(1-q, q), written out:
/// output diag(1-(1-p)q, (1-p)q), environment diag(1-pq, pq) (Kraus Gram).
inline double amplitude_damping_ic(double p, double q) {
  return h2((1.0 - p) * q) - h2(p * q);
}

/// max over a q grid of the scalar amplitude damping expression.
inline double amplitude_damping_grid_max(double p, int points) {
  double best = -1e300;
  for (int i = 0; i <= points; ++i) best = std::max(best, amplitude_damping_ic(p, double(i) / points));
  return best;
}

}  // namespace qfid_test
