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

// JSON encodings. Complex matrices are row-major lists of [re, im] pairs;
// doubles are written in shortest round-trip form, so decode(encode(x)) == x
// bit for bit.

#include <charconv>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfidkit/channels.hpp"

namespace qfid {

using Json = nlohmann::json;

inline Json flat_entries_to_json(const Matrix& m) {
  Json entries = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) entries.push_back({m(i, j).real(), m(i, j).imag()});
  }
  return entries;
}

inline Matrix flat_entries_from_json(const Json& entries, Index rows, Index cols) {
  if (!entries.is_array() || entries.size() != static_cast<size_t>(rows * cols)) {
    throw ShapeError("json: expected " + std::to_string(rows * cols) + " matrix entries");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Json& e = entries[static_cast<size_t>(i * cols + j)];
      if (!e.is_array() || e.size() != 2) throw ShapeError("json: entry is not a [re, im] pair");
      m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline Json matrix_to_json(const Matrix& m) {
  Json j = Json::object();
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["entries"] = flat_entries_to_json(m);
  return j;
}

inline Matrix matrix_from_json(const Json& j) {
  return flat_entries_from_json(j.at("entries"), j.at("rows").get<Index>(), j.at("cols").get<Index>());
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

inline Vector vector_from_json(const Json& j) {
  const Matrix m = flat_entries_from_json(j, static_cast<Index>(j.size()), 1);
  return m.col(0);
}

/// {dim_in, dim_out, kraus: [[[re, im], ...], ...]}
inline Json operation_to_json(const QuantumOperation& op) {
  Json kraus = Json::array();
  for (const Matrix& a : op.kraus()) kraus.push_back(flat_entries_to_json(a));
  Json j = Json::object();
  j["dim_in"] = op.dim_in();
  j["dim_out"] = op.dim_out();
  j["kraus"] = kraus;
  return j;
}

/// Decodes with the validating constructor unless `checked` is false.
inline QuantumOperation operation_from_json(const Json& j, bool checked = true) {
  const Index din = j.at("dim_in").get<Index>();
  const Index dout = j.at("dim_out").get<Index>();
  std::vector<Matrix> kraus;
  for (const Json& a : j.at("kraus")) kraus.push_back(flat_entries_from_json(a, dout, din));
  if (kraus.empty()) throw ShapeError("json: operation without Kraus operators");
  return detail::rebuild(std::move(kraus), checked);
}

inline Json density_to_json(const DensityOperator& rho) { return matrix_to_json(rho.matrix()); }

inline DensityOperator density_from_json(const Json& j) { return DensityOperator(matrix_from_json(j)); }

/// Shortest round-trip decimal form, as used in CSV output.
inline std::string format_real(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline Json real_vector_to_json(const RealVector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace qfid
