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

// I.i.d. sources, typical subspaces and the typical-subspace compression scheme.
//
// Block states of an i.i.d. source are diagonal in the product of the base
// eigenbasis, so typical subspaces are enumerated from the base spectrum
// without diagonalizing the block state.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfidkit/channels.hpp"
#include "qfidkit/entropy.hpp"
#include "qfidkit/linalg.hpp"
#include "qfidkit/serialization.hpp"

namespace qfid {

/// Largest block dimension dim^n accepted for block computations.
inline constexpr Index kBlockCap = 4096;
/// Largest block dimension for which dense block matrices are materialized.
inline constexpr Index kDenseBlockCap = 1024;
/// Largest block dimension for the compression scheme's Kraus family.
inline constexpr Index kCompressionCap = 64;
/// Base eigenvalues closer than this are treated as one degenerate level.
inline constexpr double kDegeneracyTol = 1e-12;

class IIDSource {
 public:
  IIDSource(DensityOperator base, std::string label = "iid")
      : base_(std::move(base)), label_(std::move(label)), spectrum_(base_.spectrum()) {
    // Snap near-degenerate levels to a shared value so equal products compare equal.
    for (Index k = 1; k < spectrum_.values.size(); ++k) {
      if (std::abs(spectrum_.values(k) - spectrum_.values(k - 1)) <= kDegeneracyTol) {
        spectrum_.values(k) = spectrum_.values(k - 1);
      }
    }
    entropy_ = shannon_entropy(spectrum_.values);
  }

  const DensityOperator& base() const { return base_; }
  const std::string& label() const { return label_; }
  Index dim() const { return base_.dim(); }
  /// Base eigenvalues (descending) and eigenvectors.
  const EigResult& spectrum() const { return spectrum_; }
  /// Entropy rate S = S(base) in bits.
  double entropy_rate() const { return entropy_; }

  Index block_dim(int n) const {
    if (n < 1) throw PreconditionError("IIDSource: block length must be >= 1");
    Index d = 1;
    for (int k = 0; k < n; ++k) {
      if (d > kBlockCap / dim()) {
        throw ResourceError("IIDSource: dim^n exceeds " + std::to_string(kBlockCap));
      }
      d *= dim();
    }
    return d;
  }

 private:
  DensityOperator base_;
  std::string label_;
  EigResult spectrum_;
  double entropy_ = 0.0;
};

inline DensityOperator block_state(const IIDSource& src, int n) {
  src.block_dim(n);
  return DensityOperator::trusted(tensor_power(src.base().matrix(), n));
}

/// Product basis vector |v_{j1}> (x) ... (x) |v_{jn}> for the base-d digits of
/// index (first factor most significant).
inline Vector product_eigenvector(const IIDSource& src, int n, Index index) {
  const Index d = src.dim();
  std::vector<Index> digits(static_cast<size_t>(n));
  for (int t = n - 1; t >= 0; --t) {
    digits[size_t(t)] = index % d;
    index /= d;
  }
  Vector v = src.spectrum().vectors.col(digits[0]);
  for (int t = 1; t < n; ++t) {
    const Vector f = src.spectrum().vectors.col(digits[size_t(t)]);
    Vector next(v.size() * d);
    for (Index i = 0; i < v.size(); ++i) next.segment(i * d, d) = v(i) * f;
    v = std::move(next);
  }
  return v;
}

/// Applies base^{(x) n} to a block vector mode by mode.
inline Vector apply_block_state(const IIDSource& src, int n, const Vector& x) {
  const Index d = src.dim();
  const Index total = src.block_dim(n);
  if (x.size() != total) throw ShapeError("apply_block_state: vector length mismatch");
  const Matrix& b = src.base().matrix();
  Vector cur = x;
  Index outer = 1;
  Index inner = total / d;
  for (int t = 0; t < n; ++t) {
    Vector next = Vector::Zero(total);
    for (Index o = 0; o < outer; ++o) {
      for (Index i = 0; i < inner; ++i) {
        for (Index r = 0; r < d; ++r) {
          Complex acc = 0.0;
          for (Index c = 0; c < d; ++c) acc += b(r, c) * cur((o * d + c) * inner + i);
          next((o * d + r) * inner + i) = acc;
        }
      }
    }
    cur = std::move(next);
    outer *= d;
    inner /= d;
  }
  return cur;
}

/// Span of the block eigenvectors whose eigenvalues lie in
/// [2^{-n(S+eps)}, 2^{-n(S-eps)}], both ends inclusive.
class TypicalSubspace {
 public:
  int n() const { return n_; }
  double epsilon() const { return epsilon_; }
  double entropy_rate() const { return entropy_rate_; }
  /// tr(Lambda rho^(n)).
  double weight() const { return weight_; }
  /// 1 - weight.
  double delta_n() const { return 1.0 - weight_; }
  Index dim() const { return static_cast<Index>(indices_.size()); }
  Index block_dim() const { return block_dim_; }
  bool empty() const { return indices_.empty(); }

  /// Product-basis indices of the typical eigenvectors, by eigenvalue
  /// descending then index ascending.
  const std::vector<Index>& indices() const { return indices_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// Product-basis indices outside the window (including zero eigenvalues).
  const std::vector<Index>& complement_indices() const { return complement_; }

  double dim_upper_bound() const { return std::exp2(n_ * (entropy_rate_ + epsilon_)); }
  double dim_lower_bound(double delta) const { return (1.0 - delta) * std::exp2(n_ * (entropy_rate_ - epsilon_)); }
  /// The dimension bounds; the lower one is only claimed when weight >= 1 - delta.
  bool dim_bounds_hold(double delta) const {
    const double dimd = static_cast<double>(dim());
    if (dimd > dim_upper_bound() * (1.0 + 1e-12)) return false;
    if (weight_ >= 1.0 - delta && dimd < dim_lower_bound(delta) * (1.0 - 1e-12)) return false;
    return true;
  }

  Vector vector(Index k) const { return product_eigenvector(*src_, n_, indices_[size_t(k)]); }

  Matrix basis_matrix() const {
    require_dense();
    Matrix b(block_dim_, std::max<Index>(dim(), 0));
    for (Index k = 0; k < dim(); ++k) b.col(k) = vector(k);
    return b;
  }
  Subspace basis() const {
    if (empty()) throw DegenerateInputError("TypicalSubspace: empty subspace has no basis");
    return Subspace(basis_matrix());
  }
  Matrix projector() const {
    const Matrix b = basis_matrix();
    return b * b.adjoint();
  }

  Json to_json() const {
    Json j = Json::object();
    j["n"] = n_;
    j["epsilon"] = epsilon_;
    j["entropy_rate"] = entropy_rate_;
    j["weight"] = weight_;
    j["dim"] = dim();
    j["block_dim"] = block_dim_;
    j["dim_upper_bound"] = dim_upper_bound();
    j["delta_n"] = delta_n();
    return j;
  }

 private:
  friend TypicalSubspace typical_subspace(const IIDSource& src, int n, double epsilon);

  void require_dense() const {
    if (block_dim_ > kDenseBlockCap) {
      throw ResourceError("TypicalSubspace: block dimension " + std::to_string(block_dim_) +
                          " too large to materialize");
    }
  }

  const IIDSource* src_ = nullptr;
  int n_ = 0;
  double epsilon_ = 0.0;
  double entropy_rate_ = 0.0;
  double weight_ = 0.0;
  Index block_dim_ = 0;
  std::vector<Index> indices_;
  std::vector<double> eigenvalues_;
  std::vector<Index> complement_;
};

/// The returned object refers to src, which must outlive it.
inline TypicalSubspace typical_subspace(const IIDSource& src, int n, double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("typical_subspace: epsilon must be positive");
  TypicalSubspace t;
  t.src_ = &src;
  t.n_ = n;
  t.epsilon_ = epsilon;
  t.entropy_rate_ = src.entropy_rate();
  t.block_dim_ = src.block_dim(n);
  const Index d = src.dim();
  const RealVector& p = src.spectrum().values;

  struct Entry {
    Index index;
    double value;
  };
  std::vector<Entry> typical;
  std::vector<Index> counts(static_cast<size_t>(d));
  for (Index idx = 0; idx < t.block_dim_; ++idx) {
    std::fill(counts.begin(), counts.end(), 0);
    Index rest = idx;
    for (int k = 0; k < n; ++k) {
      ++counts[size_t(rest % d)];
      rest /= d;
    }
    // Count-based evaluation makes the value depend only on the type class.
    bool zero = false;
    double log_sum = 0.0;
    double value = 1.0;
    for (Index j = 0; j < d; ++j) {
      if (counts[size_t(j)] == 0) continue;
      if (!(p(j) > kEntropyCutoff)) {
        zero = true;
        break;
      }
      log_sum += static_cast<double>(counts[size_t(j)]) * std::log2(p(j));
      value *= std::pow(p(j), static_cast<double>(counts[size_t(j)]));
    }
    const bool inside = !zero && std::abs(-log_sum / n - t.entropy_rate_) <= epsilon + 1e-12;
    if (inside) {
      typical.push_back({idx, value});
    } else {
      t.complement_.push_back(idx);
    }
  }
  std::stable_sort(typical.begin(), typical.end(),
                   [](const Entry& a, const Entry& b) { return a.value > b.value; });
  double w = 0.0;
  for (const Entry& e : typical) {
    t.indices_.push_back(e.index);
    t.eigenvalues_.push_back(e.value);
    w += e.value;
  }
  t.weight_ = w;
  return t;
}

struct QaepRow {
  int n = 0;
  double epsilon = 0.0;
  double weight = 0.0;
  Index dim = 0;
  double log2dim_over_n = 0.0;
};

inline std::vector<QaepRow> qaep_profile(const IIDSource& src, double epsilon, int n_first, int n_last) {
  if (n_first < 1 || n_last < n_first) throw PreconditionError("qaep_profile: invalid n range");
  std::vector<QaepRow> rows;
  for (int n = n_first; n <= n_last; ++n) {
    const TypicalSubspace t = typical_subspace(src, n, epsilon);
    rows.push_back({n, epsilon, t.weight(), t.dim(),
                    t.empty() ? -INFINITY : std::log2(static_cast<double>(t.dim())) / n});
  }
  return rows;
}

inline std::string qaep_csv(const std::vector<QaepRow>& rows) {
  std::ostringstream out;
  out << "n,epsilon,weight,dim,log2dim_over_n\n";
  for (const QaepRow& r : rows) {
    out << r.n << ',' << format_real(r.epsilon) << ',' << format_real(r.weight) << ',' << r.dim << ','
        << format_real(r.log2dim_over_n) << '\n';
  }
  return out.str();
}

/// Probability a small subspace captures under rho^(n).
struct SmallSubspaceReport {
  bool skipped = false;
  std::string reason;
  double probability = 0.0;
  /// delta + 2^{-n(S-eps)} dim(Pi).
  double bound = 0.0;
  bool holds = true;
  /// The unslackened form probability <= delta, for information.
  bool delta_form_holds = true;
  Index subspace_dim = 0;
  double dim_limit = 0.0;

  Json to_json() const {
    Json j = Json::object();
    j["skipped"] = skipped;
    j["reason"] = reason;
    j["probability"] = probability;
    j["bound"] = bound;
    j["holds"] = holds;
    j["delta_form_holds"] = delta_form_holds;
    j["subspace_dim"] = subspace_dim;
    j["dim_limit"] = dim_limit;
    return j;
  }
};

inline SmallSubspaceReport small_subspace_probability_bound(const IIDSource& src, int n, double epsilon,
                                                            double delta, const Subspace& pi) {
  SmallSubspaceReport r;
  const TypicalSubspace t = typical_subspace(src, n, epsilon);
  if (pi.ambient_dim() != t.block_dim()) throw ShapeError("small_subspace_probability_bound: ambient mismatch");
  r.subspace_dim = pi.dim();
  r.dim_limit = t.dim_lower_bound(delta);
  if (!(static_cast<double>(pi.dim()) < r.dim_limit)) {
    r.skipped = true;
    r.reason = "subspace dimension is not below (1-delta) 2^{n(S-eps)}";
    return r;
  }
  if (!(t.weight() >= 1.0 - delta)) {
    r.skipped = true;
    r.reason = "typical weight below 1-delta";
    return r;
  }
  for (Index k = 0; k < pi.dim(); ++k) {
    const Vector v = pi.basis().col(k);
    r.probability += v.dot(apply_block_state(src, n, v)).real();
  }
  r.bound = delta + std::exp2(-n * (t.entropy_rate() - epsilon)) * static_cast<double>(pi.dim());
  r.holds = r.probability <= r.bound + 1e-12;
  r.delta_form_holds = r.probability <= delta + 1e-12;
  return r;
}

/// Typical-subspace projection plus a garbage map sending the complement to a
/// fixed typical state.
struct CompressionScheme {
  int n = 0;
  TypicalSubspace typical;
  /// Kraus family {|t_1><e_k|} over the complement product basis; empty when
  /// the typical subspace is everything.
  std::optional<QuantumOperation> garbage_map;
  QuantumOperation total;
};

inline CompressionScheme compression_scheme(const IIDSource& src, int n, double epsilon) {
  TypicalSubspace t = typical_subspace(src, n, epsilon);
  if (t.empty()) throw DegenerateInputError("compression_scheme: typical subspace is empty");
  if (t.block_dim() > kCompressionCap) {
    throw ResourceError("compression_scheme: block dimension above " + std::to_string(kCompressionCap));
  }
  const Vector garbage_state = t.vector(0);
  std::vector<Matrix> kraus{t.projector()};
  std::vector<Matrix> garbage;
  for (Index idx : t.complement_indices()) {
    garbage.push_back(garbage_state * product_eigenvector(src, n, idx).adjoint());
    kraus.push_back(garbage.back());
  }
  std::optional<QuantumOperation> g;
  if (!garbage.empty()) g.emplace(std::move(garbage));
  QuantumOperation total(std::move(kraus));
  return CompressionScheme{n, std::move(t), std::move(g), std::move(total)};
}

/// Lambda rho^(n) Lambda / tr(Lambda rho^(n)).
inline DensityOperator renormalized_typical_restriction(const IIDSource& src, int n, double epsilon,
                                                        const Tolerances& tol = {}) {
  const TypicalSubspace t = typical_subspace(src, n, epsilon);
  if (!(t.weight() > tol.trace)) {
    throw DegenerateInputError("renormalized_typical_restriction: typical weight " + std::to_string(t.weight()));
  }
  const Matrix b = t.basis_matrix();
  RealVector q(t.dim());
  for (Index k = 0; k < t.dim(); ++k) q(k) = t.eigenvalues()[size_t(k)] / t.weight();
  return DensityOperator::trusted(b * q.asDiagonal() * b.adjoint());
}

}  // namespace qfid
