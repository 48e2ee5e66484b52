// Copyright 2026 The drlqr Authors
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

namespace drlqr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Closed loop is not Schur stable; carries the offending spectral radius.
class Unstable : public Error {
 public:
  explicit Unstable(double spectral_radius)
      : Error("closed loop is unstable (spectral radius " +
              std::to_string(spectral_radius) + ")"),
        spectral_radius_(spectral_radius) {}
  double spectral_radius() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

class NotStabilizable : public Error {
 public:
  using Error::Error;
};

// An iterative linear-algebra routine failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  RankDeficient(int rank, int required, double condition)
      : Error("regressor Gram matrix is rank deficient (numerical rank " +
              std::to_string(rank) + " of " + std::to_string(required) +
              ", condition number " + std::to_string(condition) + ")"),
        rank_(rank),
        required_(required) {}
  int rank() const { return rank_; }
  int required() const { return required_; }

 private:
  int rank_;
  int required_;
};

class SingularFisher : public Error {
 public:
  using Error::Error;
};

class InvalidDelta : public Error {
 public:
  using Error::Error;
};

class AllScenariosUnstable : public Error {
 public:
  using Error::Error;
};

class NoStabilizingCandidate : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class IdentificationFailed : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace drlqr
