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

#include <cmath>
#include <string>

#include "qfidkit/errors.hpp"
#include "qfidkit/linalg.hpp"

namespace qfid {

/// Eigenvalues at or below this contribute nothing to an entropy.
inline constexpr double kEntropyCutoff = 1e-14;

/// -sum p log2 p with 0 log 0 = 0.
inline double shannon_entropy(const RealVector& p) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) > kEntropyCutoff) s -= p(i) * std::log2(p(i));
  }
  return s;
}

inline double binary_entropy(double p) {
  RealVector v(2);
  v << p, 1.0 - p;
  return shannon_entropy(v);
}

/// Von Neumann entropy in bits of a positive unit-trace operator.
inline double von_neumann_entropy(const Matrix& rho, const Tolerances& tol = {}) {
  require_square(rho, "von_neumann_entropy");
  const double t = rho.trace().real();
  if (std::abs(t - 1.0) > tol.trace) {
    throw PreconditionError("von_neumann_entropy: trace " + std::to_string(t) + " != 1");
  }
  const EigResult e = eig_hermitian(hermitian_part(rho), tol);
  const double lowest = e.values(e.values.size() - 1);
  if (lowest < -tol.psd) {
    throw PreconditionError("von_neumann_entropy: negative eigenvalue " + std::to_string(lowest));
  }
  return shannon_entropy(e.values);
}

inline double von_neumann_entropy(const DensityOperator& rho) { return von_neumann_entropy(rho.matrix()); }

}  // namespace qfid
