// Copyright 2026 The qfb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qfb {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a structural precondition (odd dimension, non-square,
/// asymmetric Hamiltonian, non-symplectic gain, shape mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular or too badly conditioned.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The static network has a unit eigenvalue, so the feedback loop cannot be
/// eliminated.
class AlgebraicLoopError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Too few interconnection channels for the requested interaction.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, long minimum_channels)
      : Error(what), minimum_channels_(minimum_channels) {}

  long minimum_channels() const { return minimum_channels_; }

 private:
  long minimum_channels_;
};

/// A free-parameter choice makes the scalar channel equations unsolvable.
class SingularParameterError : public Error {
 public:
  using Error::Error;
};

/// Moment integration produced a non-finite value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace qfb
