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


// Shared fixtures and independent reference computations for the tests.

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "drlqr/lqr.h"
#include "drlqr/rng.h"
#include "drlqr/types.h"

namespace drlqr::testing {

inline SystemParams PaperSystem() {
  Eigen::Matrix3d A;
  A << 1.01, 0.01, 0.0, 0.01, 1.01, 0.01, 0.0, 0.01, 1.01;
  return SystemParams(A, Eigen::Matrix3d::Identity());
}

inline CostModel PaperCost() { return CostModel::Identity(3, 3, 1e-3); }

inline SystemParams Scalar(double a, double b) {
  return SystemParams(Eigen::MatrixXd::Constant(1, 1, a),
                      Eigen::MatrixXd::Constant(1, 1, b));
}

inline CostModel ScalarCost(double q, double r, double w = 1.0) {
  return CostModel(Eigen::MatrixXd::Constant(1, 1, q),
                   Eigen::MatrixXd::Constant(1, 1, r),
                   Eigen::MatrixXd::Constant(1, 1, w));
}

inline Eigen::MatrixXd RandomMatrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.Normal();
  }
  return m;
}

inline Eigen::MatrixXd RandomSpd(int n, Rng& rng) {
  const Eigen::MatrixXd g = RandomMatrix(n, n, rng);
  return g * g.transpose() + Eigen::MatrixXd::Identity(n, n);
}

// P = sum_t (A^T)^t Q A^t, truncated once the terms are negligible.
inline Eigen::MatrixXd TruncatedLyapunovSum(const Eigen::MatrixXd& acl,
                                            const Eigen::MatrixXd& q) {
  Eigen::MatrixXd total = q;
  Eigen::MatrixXd term = q;
  for (int t = 0; t < 200000; ++t) {
    term = acl.transpose() * term * acl;
    total += term;
    if (term.norm() <= 1e-18 * total.norm()) break;
  }
  return total;
}

// Backward finite-horizon Riccati recursion run until it stops moving.
inline Eigen::MatrixXd RiccatiRecursion(const SystemParams& th,
                                        const CostModel& cm) {
  const Eigen::MatrixXd& A = th.A;
  const Eigen::MatrixXd& B = th.B;
  Eigen::MatrixXd P = cm.Q();
  for (int t = 0; t < 2000000; ++t) {
    const Eigen::MatrixXd S = cm.R() + B.transpose() * P * B;
    const Eigen::MatrixXd next =
        cm.Q() + A.transpose() * P * A -
        A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A);
    const double step = (next - P).norm();
    P = 0.5 * (next + next.transpose());
    if (step <= 1e-14 * P.norm()) break;
  }
  return P;
}

inline Gain GainFromP(const SystemParams& th, const CostModel& cm,
                      const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd S = cm.R() + th.B.transpose() * P * th.B;
  return -S.ldlt().solve(th.B.transpose() * P * th.A);
}

// Gaussian (A, B) with A rescaled to a spectral radius drawn from [lo, hi].
inline SystemParams RandomSystem(int dx, int du, Rng& rng, double lo = 0.2,
                                 double hi = 1.2) {
  Eigen::MatrixXd A = RandomMatrix(dx, dx, rng);
  const double rho = SpectralRadius(A);
  if (rho > 0) A *= (lo + (hi - lo) * rng.Uniform01()) / rho;
  return SystemParams(A, RandomMatrix(dx, du, rng));
}

inline double RelErr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace drlqr::testing
