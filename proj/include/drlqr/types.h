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

#include <compare>
#include <limits>
#include <ostream>

#include <Eigen/Dense>

namespace drlqr {

using Gain = Eigen::MatrixXd;

// Model parameter theta = vec([A B]) with column stacking.
struct SystemParams {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  SystemParams() = default;
  // Throws DimensionMismatch unless A is square and B has A.rows() rows.
  SystemParams(Eigen::MatrixXd a, Eigen::MatrixXd b);

  int dx() const { return static_cast<int>(A.rows()); }
  int du() const { return static_cast<int>(B.cols()); }
  int param_dim() const { return dx() * (dx() + du()); }

  // The block matrix [A B].
  Eigen::MatrixXd Stacked() const;

  bool operator==(const SystemParams& other) const {
    return A == other.A && B == other.B;
  }
};

Eigen::VectorXd FlattenParams(const SystemParams& theta);
SystemParams UnflattenParams(const Eigen::VectorXd& v, int dx, int du);

// LQR weights and process-noise covariance. Validated on construction:
// Q symmetric PSD, R symmetric PD, noise covariance symmetric PD.
class CostModel {
 public:
  CostModel(Eigen::MatrixXd Q, Eigen::MatrixXd R, Eigen::MatrixXd noise_cov);

  // Q = q_scale * I, R = I, noise covariance = I.
  static CostModel Identity(int dx, int du, double q_scale = 1.0);

  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::MatrixXd& noise_cov() const { return noise_cov_; }
  int dx() const { return static_cast<int>(Q_.rows()); }
  int du() const { return static_cast<int>(R_.rows()); }

 private:
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd R_;
  Eigen::MatrixXd noise_cov_;
};

// Average LQR cost. Destabilizing gains map to a dedicated Infinite value
// that orders above every finite cost.
class Cost {
 public:
  constexpr Cost() = default;
  constexpr explicit Cost(double value) : value_(value) {}
  static constexpr Cost Infinite() {
    Cost c;
    c.infinite_ = true;
    return c;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }
  // Finite value; +inf for the Infinite sentinel.
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const Cost& a, const Cost& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(const Cost& a,
                                                     const Cost& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

std::ostream& operator<<(std::ostream& os, const Cost& c);

struct RiccatiSolution {
  Eigen::MatrixXd P;
  Gain K;
  double residual = 0.0;
  int iterations = 0;
};

// Small dense helpers shared across modules.
Eigen::MatrixXd Kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& m);
// Spectral (operator 2-) norm.
double OpNorm(const Eigen::MatrixXd& m);
// Smallest eigenvalue of the symmetric part.
double MinEigenvalue(const Eigen::MatrixXd& m);
bool IsSymmetric(const Eigen::MatrixXd& m, double tol = 1e-10);
Eigen::VectorXd Vec(const Eigen::MatrixXd& m);
Eigen::MatrixXd Unvec(const Eigen::VectorXd& v, int rows);
// Symmetric PSD square root via eigendecomposition; negative eigenvalues
// are clipped to zero.
Eigen::MatrixXd PsdSqrt(const Eigen::MatrixXd& m);

}  // namespace drlqr
