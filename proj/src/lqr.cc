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

#include "drlqr/lqr.h"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "drlqr/errors.h"

namespace drlqr {
namespace {

constexpr int kKroneckerMaxStates = 30;
constexpr double kLyapDefectTol = 1e-8;
constexpr int kSmithMaxIters = 200;

constexpr int kDoublingMaxIters = 500;
constexpr int kRecursionMaxIters = 100000;
constexpr double kRiccatiStepTol = 1e-12;
constexpr double kRiccatiOverflow = 1e150;
constexpr double kDareResidualTol = 1e-8;

void CheckDims(const Gain& K, const SystemParams& theta) {
  if (K.rows() != theta.du() || K.cols() != theta.dx()) {
    throw DimensionMismatch("gain is " + std::to_string(K.rows()) + "x" +
                            std::to_string(K.cols()) + ", expected " +
                            std::to_string(theta.du()) + "x" +
                            std::to_string(theta.dx()));
  }
}

void CheckDims(const SystemParams& theta, const CostModel& cm) {
  if (cm.dx() != theta.dx() || cm.du() != theta.du()) {
    throw DimensionMismatch("cost model dimensions do not match the system");
  }
}

double LyapDefect(const Eigen::MatrixXd& acl, const Eigen::MatrixXd& qrhs,
                  const Eigen::MatrixXd& P) {
  return (P - acl.transpose() * P * acl - qrhs).norm();
}

Eigen::MatrixXd DlyapKronecker(const Eigen::MatrixXd& acl,
                               const Eigen::MatrixXd& qrhs) {
  const Eigen::Index n = acl.rows();
  const Eigen::MatrixXd at = acl.transpose();
  Eigen::MatrixXd lhs = -Kron(at, at);
  lhs.diagonal().array() += 1.0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  const Eigen::VectorXd rhs = Vec(qrhs);
  Eigen::VectorXd x = lu.solve(rhs);
  // One step of iterative refinement; cheap and tightens near-marginal cases.
  x += lu.solve(rhs - lhs * x);
  return Unvec(x, static_cast<int>(n));
}

Eigen::MatrixXd DlyapSmith(const Eigen::MatrixXd& acl,
                           const Eigen::MatrixXd& qrhs) {
  Eigen::MatrixXd P = qrhs;
  Eigen::MatrixXd power = acl;
  for (int i = 0; i < kSmithMaxIters; ++i) {
    const Eigen::MatrixXd step = power.transpose() * P * power;
    P += step;
    power = power * power;
    if (step.norm() <= 1e-16 * (1.0 + P.norm())) return P;
  }
  throw SolverError("Smith iteration for the Lyapunov equation did not converge");
}

Eigen::MatrixXd DlyapStable(const Eigen::MatrixXd& acl,
                            const Eigen::MatrixXd& qrhs) {
  Eigen::MatrixXd P = acl.rows() <= kKroneckerMaxStates
                          ? DlyapKronecker(acl, qrhs)
                          : DlyapSmith(acl, qrhs);
  P = Symmetrize(P);
  const double defect = LyapDefect(acl, qrhs, P);
  if (!std::isfinite(defect) || defect > kLyapDefectTol * (1.0 + P.norm())) {
    throw SolverError("Lyapunov solve defect " + std::to_string(defect) +
                      " exceeds tolerance");
  }
  return P;
}

// Value matrix P = acl^T P acl + qrhs and covariance S = acl S acl^T + srhs
// from one factorization: the covariance system matrix is the transpose of
// the value system matrix.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> DlyapPair(
    const Eigen::MatrixXd& acl, const Eigen::MatrixXd& qrhs,
    const Eigen::MatrixXd& srhs) {
  if (acl.rows() > kKroneckerMaxStates) {
    return {DlyapStable(acl, qrhs), DlyapStable(acl.transpose(), srhs)};
  }
  const Eigen::Index n = acl.rows();
  const Eigen::MatrixXd at = acl.transpose();
  Eigen::MatrixXd lhs = -Kron(at, at);
  lhs.diagonal().array() += 1.0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  auto solve = [&](const Eigen::MatrixXd& rhs_mat, bool transposed) {
    const Eigen::VectorXd rhs = Vec(rhs_mat);
    Eigen::VectorXd x =
        transposed ? lu.transpose().solve(rhs) : lu.solve(rhs).eval();
    const Eigen::VectorXd r =
        rhs - (transposed ? (lhs.transpose() * x).eval() : (lhs * x).eval());
    x += transposed ? lu.transpose().solve(r) : lu.solve(r).eval();
    return Symmetrize(Unvec(x, static_cast<int>(n)));
  };
  Eigen::MatrixXd P = solve(qrhs, false);
  Eigen::MatrixXd S = solve(srhs, true);
  const double dp = LyapDefect(acl, qrhs, P);
  const double ds = LyapDefect(at, srhs, S);
  if (!std::isfinite(dp) || dp > kLyapDefectTol * (1.0 + P.norm()) ||
      !std::isfinite(ds) || ds > kLyapDefectTol * (1.0 + S.norm())) {
    throw SolverError("Lyapunov solve defect exceeds tolerance");
  }
  return {std::move(P), std::move(S)};
}

Eigen::MatrixXd GainFromP(const SystemParams& theta, const CostModel& cm,
                          const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd psi = InputWeight(theta, cm, P);
  return -psi.ldlt().solve(theta.B.transpose() * P * theta.A);
}

Eigen::MatrixXd RiccatiMap(const SystemParams& theta, const CostModel& cm,
                           const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd& A = theta.A;
  const Eigen::MatrixXd& B = theta.B;
  const Eigen::MatrixXd bpa = B.transpose() * P * A;
  const Eigen::MatrixXd psi = InputWeight(theta, cm, P);
  return Symmetrize(A.transpose() * P * A -
                    bpa.transpose() * psi.ldlt().solve(bpa) + cm.Q());
}

// Structure-preserving doubling. Returns false if it fails to converge to
// a finite limit.
bool SolveByDoubling(const SystemParams& theta, const CostModel& cm,
                     Eigen::MatrixXd* P, int* iterations) {
  const int n = theta.dx();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Ak = theta.A;
  Eigen::MatrixXd Gk =
      theta.B * cm.R().ldlt().solve(theta.B.transpose());
  Eigen::MatrixXd Hk = cm.Q();
  for (int i = 1; i <= kDoublingMaxIters; ++i) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> w(I + Gk * Hk);
    const Eigen::MatrixXd w_ak = w.solve(Ak);
    const Eigen::MatrixXd w_gk = w.solve(Gk);
    const Eigen::MatrixXd h_next =
        Symmetrize(Hk + Ak.transpose() * Hk * w_ak);
    Gk = Symmetrize(Gk + Ak * w_gk * Ak.transpose());
    Ak = Ak * w_ak;
    const double step = (h_next - Hk).norm();
    Hk = h_next;
    if (!Hk.allFinite() || Hk.trace() > kRiccatiOverflow) return false;
    if (step <= kRiccatiStepTol * (1.0 + Hk.norm())) {
      *P = Hk;
      *iterations = i;
      return true;
    }
  }
  return false;
}

bool SolveByRecursion(const SystemParams& theta, const CostModel& cm,
                      Eigen::MatrixXd* P, int* iterations) {
  Eigen::MatrixXd Pk = cm.Q();
  for (int i = 1; i <= kRecursionMaxIters; ++i) {
    const Eigen::MatrixXd next = RiccatiMap(theta, cm, Pk);
    const double step = (next - Pk).norm();
    Pk = next;
    if (!Pk.allFinite() || Pk.trace() > kRiccatiOverflow) return false;
    if (step <= kRiccatiStepTol * (1.0 + Pk.norm())) {
      *P = Pk;
      *iterations = i;
      return true;
    }
  }
  return false;
}

bool Accept(const SystemParams& theta, const CostModel& cm,
            const Eigen::MatrixXd& P, RiccatiSolution* out) {
  const double residual = DareResidual(theta, cm, P);
  if (!std::isfinite(residual) ||
      residual > kDareResidualTol * (1.0 + OpNorm(P))) {
    return false;
  }
  Gain K = GainFromP(theta, cm, P);
  if (!IsSchurStable(ClosedLoop(theta, K))) return false;
  out->P = P;
  out->K = std::move(K);
  out->residual = residual;
  return true;
}

}  // namespace

double SpectralRadius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("spectral radius needs a square matrix");
  }
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1) return std::abs(m(0, 0));
  if (!m.allFinite()) {
    throw SolverError("spectral radius of a matrix with non-finite entries");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw SolverError("eigenvalue solver did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool IsSchurStable(const Eigen::MatrixXd& m) {
  return SpectralRadius(m) < 1.0 - kStabilityMargin;
}

Eigen::MatrixXd ClosedLoop(const SystemParams& theta, const Gain& K) {
  CheckDims(K, theta);
  return theta.A + theta.B * K;
}

Eigen::MatrixXd Dlyap(const Eigen::MatrixXd& acl, const Eigen::MatrixXd& qrhs) {
  if (acl.rows() != acl.cols() || qrhs.rows() != acl.rows() ||
      qrhs.cols() != acl.cols()) {
    throw DimensionMismatch("dlyap operands have inconsistent shapes");
  }
  const double rho = SpectralRadius(acl);
  if (!(rho < 1.0 - kStabilityMargin)) throw Unstable(rho);
  return DlyapStable(acl, qrhs);
}

double DareResidual(const SystemParams& theta, const CostModel& cm,
                    const Eigen::MatrixXd& P) {
  return OpNorm(P - RiccatiMap(theta, cm, P));
}

RiccatiSolution SolveDare(const SystemParams& theta, const CostModel& cm) {
  CheckDims(theta, cm);
  RiccatiSolution sol;
  Eigen::MatrixXd P;
  int iterations = 0;
  if (SolveByDoubling(theta, cm, &P, &iterations)) {
    // One Riccati step polishes the doubling limit.
    P = RiccatiMap(theta, cm, P);
    if (Accept(theta, cm, P, &sol)) {
      sol.iterations = iterations;
      return sol;
    }
  }
  if (SolveByRecursion(theta, cm, &P, &iterations) &&
      Accept(theta, cm, P, &sol)) {
    sol.iterations = iterations;
    return sol;
  }
  throw NotStabilizable(
      "Riccati iteration diverged or produced no stabilizing gain; (A, B) "
      "appears not to be stabilizable");
}

Eigen::MatrixXd InputWeight(const SystemParams& theta, const CostModel& cm,
                            const Eigen::MatrixXd& P) {
  return Symmetrize(theta.B.transpose() * P * theta.B + cm.R());
}

Eigen::MatrixXd StateCovariance(const Gain& K, const SystemParams& theta,
                                const CostModel& cm) {
  CheckDims(theta, cm);
  return Dlyap(ClosedLoop(theta, K).transpose(), cm.noise_cov());
}

GainEvaluation EvaluateGain(const Gain& K, const SystemParams& theta,
                            const CostModel& cm, bool with_gradient) {
  CheckDims(theta, cm);
  GainEvaluation ev;
  const Eigen::MatrixXd acl = ClosedLoop(theta, K);
  ev.spectral_radius = SpectralRadius(acl);
  if (!(ev.spectral_radius < 1.0 - kStabilityMargin)) return ev;
  const Eigen::MatrixXd qk = cm.Q() + K.transpose() * cm.R() * K;
  if (!with_gradient) {
    ev.cost = Cost((DlyapStable(acl, qk) * cm.noise_cov()).trace());
  } else {
    const auto [PK, sigma] = DlyapPair(acl, qk, cm.noise_cov());
    ev.cost = Cost((PK * cm.noise_cov()).trace());
    const Eigen::MatrixXd& B = theta.B;
    ev.gradient = 2.0 *
                  ((cm.R() + B.transpose() * PK * B) * K +
                   B.transpose() * PK * theta.A) *
                  sigma;
  }
  return ev;
}

Cost LqrCost(const Gain& K, const SystemParams& theta, const CostModel& cm) {
  return EvaluateGain(K, theta, cm, /*with_gradient=*/false).cost;
}

Cost ExcessCost(const Gain& K, const SystemParams& theta, const CostModel& cm) {
  const Cost cost = LqrCost(K, theta, cm);
  if (cost.is_infinite()) return cost;
  const RiccatiSolution opt = SolveDare(theta, cm);
  const double optimal = (opt.P * cm.noise_cov()).trace();
  return Cost(std::max(0.0, cost.value() - optimal));
}

double PerformanceDifference(const Gain& K, const SystemParams& theta,
                             const CostModel& cm) {
  const RiccatiSolution opt = SolveDare(theta, cm);
  const Eigen::MatrixXd sigma = StateCovariance(K, theta, cm);
  const Eigen::MatrixXd dK = K - opt.K;
  const Eigen::MatrixXd psi = InputWeight(theta, cm, opt.P);
  return (dK * sigma * dK.transpose() * psi).trace();
}

Eigen::MatrixXd PolicyGradient(const Gain& K, const SystemParams& theta,
                               const CostModel& cm) {
  GainEvaluation ev = EvaluateGain(K, theta, cm, /*with_gradient=*/true);
  if (ev.cost.is_infinite()) throw Unstable(ev.spectral_radius);
  return ev.gradient;
}

}  // namespace drlqr
