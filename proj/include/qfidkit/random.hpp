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

// Seeded random instances. Every stream is derived from a (seed, counter) pair so
// that a trial's operands depend only on its index, never on scheduling.

#include <cstdint>
#include <random>

#include "qfidkit/linalg.hpp"

namespace qfid {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for stream `counter` under `seed`.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t counter) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL)));
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// Matrix of i.i.d. standard complex normal entries.
inline Matrix ginibre(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  return m;
}

inline Vector random_unit_vector(Rng& rng, Index dim) {
  Vector v = ginibre(rng, dim, 1).col(0);
  return v / v.norm();
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of R removed).
inline Matrix random_unitary(Rng& rng, Index dim) {
  const Matrix g = ginibre(rng, dim, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index k = 0; k < dim; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

/// rows x cols matrix with orthonormal columns (rows >= cols).
inline Matrix random_isometry(Rng& rng, Index rows, Index cols) {
  return random_unitary(rng, rows).leftCols(cols);
}

/// Random density operator of the given rank (induced measure).
inline DensityOperator random_density(Rng& rng, Index dim, Index rank) {
  const Matrix g = ginibre(rng, dim, rank);
  const Matrix m = g * g.adjoint();
  return DensityOperator::trusted(m / m.trace().real());
}

inline DensityOperator random_density(Rng& rng, Index dim) { return random_density(rng, dim, dim); }

/// Random Hermitian matrix with unit Frobenius norm.
inline Matrix random_hermitian(Rng& rng, Index dim) {
  const Matrix g = ginibre(rng, dim, dim);
  Matrix h = hermitian_part(g);
  return h / h.norm();
}

/// Orthonormal basis of a random k-dimensional subspace.
inline Subspace random_subspace(Rng& rng, Index ambient, Index k) {
  return Subspace(random_isometry(rng, ambient, k));
}

}  // namespace qfid
