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

#include <Eigen/Dense>

#include "drlqr/types.h"

namespace drlqr {

// A matrix is treated as Schur stable when its spectral radius is below
// 1 - kStabilityMargin.
inline constexpr double kStabilityMargin = 1e-9;

// Largest eigenvalue magnitude. Throws SolverError if the eigensolver does
// not converge.
double SpectralRadius(const Eigen::MatrixXd& m);
bool IsSchurStable(const Eigen::MatrixXd& m);

// A + B K.
Eigen::MatrixXd ClosedLoop(const SystemParams& theta, const Gain& K);

// Solves P = Acl^T P Acl + Qrhs. Uses a Kronecker linear solve for small
// systems and Smith squaring above 30 states. Throws Unstable when Acl is not
// Schur stable, SolverError when the defect check fails.
Eigen::MatrixXd Dlyap(const Eigen::MatrixXd& acl, const Eigen::MatrixXd& qrhs);

// Operator norm of the DARE defect at P.
double DareResidual(const SystemParams& theta, const CostModel& cm,
                    const Eigen::MatrixXd& P);

// Stabilizing solution of the discrete algebraic Riccati equation and the
// LQR gain K = -(B^T P B + R)^{-1} B^T P A (so that U = K X).
//
// Structure-preserving doubling, falling back to the plain Riccati
// recursion if doubling fails to converge. Throws NotStabilizable when the
// iteration diverges, exhausts its budget, or produces a non-stabilizing
// gain.
RiccatiSolution SolveDare(const SystemParams& theta, const CostModel& cm);

// Psi = B^T P B + R.
Eigen::MatrixXd InputWeight(const SystemParams& theta, const CostModel& cm,
                            const Eigen::MatrixXd& P);

// Stationary state covariance under K: dlyap((A + B K)^T, noise_cov).
Eigen::MatrixXd StateCovariance(const Gain& K, const SystemParams& theta,
                                const CostModel& cm);

// trace(P_K * noise_cov) with P_K = dlyap(A + B K, Q + K^T R K); Infinite when
// K does not stabilize theta.
Cost LqrCost(const Gain& K, const SystemParams& theta, const CostModel& cm);

// LqrCost(K) - LqrCost(K(theta)), clamped at zero. Infinite for
// destabilizing K.
Cost ExcessCost(const Gain& K, const SystemParams& theta, const CostModel& cm);

// trace((K - K(theta)) Sigma^K (K - K(theta))^T Psi(theta)). Exact excess
// cost; throws Unstable for destabilizing K.
double PerformanceDifference(const Gain& K, const SystemParams& theta,
                             const CostModel& cm);

// Gradient of LqrCost in K: 2 ((R + B^T P_K B) K + B^T P_K A) Sigma^K.
Eigen::MatrixXd PolicyGradient(const Gain& K, const SystemParams& theta,
                               const CostModel& cm);

// Cost and (optionally) gradient in one pass, sharing the two Lyapunov
// solves. Used by the synthesis loops.
struct GainEvaluation {
  Cost cost = Cost::Infinite();
  Eigen::MatrixXd gradient;  // empty unless requested and stable
  double spectral_radius = 0.0;
};
GainEvaluation EvaluateGain(const Gain& K, const SystemParams& theta,
                            const CostModel& cm, bool with_gradient);

}  // namespace drlqr
