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

#include <stdexcept>
#include <string>

namespace qfid {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input is valid but degenerate for the requested quantity
/// (zero output trace, zero fidelity, empty subspace, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A Kraus family whose sum of A^dagger A exceeds the identity.
class InvalidOperationError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (tensor power, block dimension) was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Premises that cannot hold simultaneously (e.g. pigeonhole arithmetic fails).
class InconsistentInputError : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace qfid
