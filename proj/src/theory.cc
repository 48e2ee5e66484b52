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

#include "drlqr/theory.h"

#include <cmath>
#include <fstream>

#include "drlqr/errors.h"
#include "drlqr/lqr.h"

namespace drlqr {
namespace {

Eigen::VectorXd VecGainAt(const Eigen::VectorXd& v, int dx, int du,
                          const CostModel& cm) {
  return Vec(SolveDare(UnflattenParams(v, dx, du), cm).K);
}

Eigen::MatrixXd CentralJacobian(const SystemParams& theta, const CostModel& cm,
                                double h) {
  const int dx = theta.dx();
  const int du = theta.du();
  const Eigen::VectorXd v = FlattenParams(theta);
  Eigen::MatrixXd J(dx * du, v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Eigen::VectorXd plus = v, minus = v;
    plus(i) += h;
    minus(i) -= h;
    J.col(i) = (VecGainAt(plus, dx, du, cm) - VecGainAt(minus, dx, du, cm)) /
               (2.0 * h);
  }
  return J;
}

Eigen::MatrixXd RichardsonJacobian(const SystemParams& theta,
                                   const CostModel& cm, double h) {
  const Eigen::MatrixXd coarse = CentralJacobian(theta, cm, h);
  const Eigen::MatrixXd fine = CentralJacobian(theta, cm, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

// g(v') = C(K(v'), theta).
double CeCost(const Eigen::VectorXd& v, const SystemParams& theta,
              const CostModel& cm) {
  const Gain K = SolveDare(UnflattenParams(v, theta.dx(), theta.du()), cm).K;
  const Cost c = LqrCost(K, theta, cm);
  if (c.is_infinite()) {
    throw NotStabilizable(
        "certainty-equivalent gain at a perturbed parameter destabilizes the "
        "nominal system; reduce the finite-difference step");
  }
  return c.value();
}

Eigen::MatrixXd SecondDifferences(const SystemParams& theta,
                                  const CostModel& cm, double h) {
  const Eigen::VectorXd v = FlattenParams(theta);
  const Eigen::Index d = v.size();
  const double g0 = CeCost(v, theta, cm);
  auto at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    Eigen::VectorXd w = v;
    w(i) += si * h;
    if (j >= 0) w(j) += sj * h;
    return CeCost(w, theta, cm);
  };
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out(i, i) = (at(i, 1, -1, 0) - 2.0 * g0 + at(i, -1, -1, 0)) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double value = (at(i, 1, j, 1) - at(i, 1, j, -1) -
                            at(i, -1, j, 1) + at(i, -1, j, -1)) /
                           (4.0 * h * h);
      out(i, j) = value;
      out(j, i) = value;
    }
  }
  return out;
}

double Step(const SystemParams& theta, double rel_step) {
  return rel_step * std::max(1.0, FlattenParams(theta).norm());
}

InequalityCheck MakeCheck(std::string name, double lhs, double rhs) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = (rhs - lhs) / std::max(std::abs(rhs), 1e-300);
  c.pass = std::isfinite(lhs) && lhs <= rhs * (1.0 + 1e-9);
  return c;
}

InequalityCheck MakeFlag(std::string name, bool ok, double margin) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = ok ? 1.0 : 0.0;
  c.rhs = 1.0;
  c.margin = margin;
  c.pass = ok;
  return c;
}

Eigen::VectorXd RandomDirection(int dim, Rng& rng) {
  Eigen::VectorXd d = rng.StandardNormal(dim);
  while (d.norm() == 0.0) d = rng.StandardNormal(dim);
  return d.normalized();
}

}  // namespace

Eigen::MatrixXd GainJacobian(const SystemParams& theta, const CostModel& cm,
                             double rel_step) {
  SolveDare(theta, cm);
  const double h = Step(theta, rel_step);
  try {
    return RichardsonJacobian(theta, cm, h);
  } catch (const NotStabilizable&) {
    return RichardsonJacobian(theta, cm, 0.1 * h);
  }
}

Eigen::MatrixXd GainCostWeight(const SystemParams& theta, const CostModel& cm) {
  const RiccatiSolution sol = SolveDare(theta, cm);
  const Eigen::MatrixXd sigma = StateCovariance(sol.K, theta, cm);
  return Kron(sigma, InputWeight(theta, cm, sol.P));
}

ModelTaskHessian ModelTaskHessianAnalytic(const SystemParams& theta,
                                          const CostModel& cm) {
  const Eigen::MatrixXd J = GainJacobian(theta, cm);
  const Eigen::MatrixXd weight = GainCostWeight(theta, cm);
  return ModelTaskHessian{Symmetrize(J.transpose() * weight * J),
                          ModelTaskHessian::Method::kAnalytic};
}

Eigen::MatrixXd CertaintyEquivalenceCostHessian(const SystemParams& theta,
                                                const CostModel& cm,
                                                double rel_step) {
  SolveDare(theta, cm);
  const double h = Step(theta, rel_step);
  const Eigen::MatrixXd coarse = SecondDifferences(theta, cm, h);
  const Eigen::MatrixXd fine = SecondDifferences(theta, cm, 0.5 * h);
  return Symmetrize((4.0 * fine - coarse) / 3.0);
}

ModelTaskHessian ModelTaskHessianFiniteDifference(const SystemParams& theta,
                                                  const CostModel& cm,
                                                  double rel_step) {
  return ModelTaskHessian{
      0.5 * CertaintyEquivalenceCostHessian(theta, cm, rel_step),
      ModelTaskHessian::Method::kFiniteDifference};
}

PopulationFisher EstimatePopulationFisher(const SystemParams& theta,
                                          const Eigen::MatrixXd& noise_cov,
                                          int T,
                                          const Eigen::MatrixXd& input_cov,
                                          int trajectories, const Rng& rng) {
  if (trajectories < 1) throw InvalidArgument("need at least one trajectory");
  const int p = theta.dx() + theta.du();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(p, p);
  for (int n = 0; n < trajectories; ++n) {
    Rng sub = rng.Split(static_cast<std::uint64_t>(n));
    const Eigen::MatrixXd g =
        TrajectoryGram(Simulate(theta, noise_cov, T, input_cov, sub));
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  PopulationFisher out;
  out.samples = trajectories;
  out.mean_gram = sum / trajectories;
  if (trajectories > 1) {
    const Eigen::MatrixXd var =
        ((sum_sq / trajectories - out.mean_gram.cwiseProduct(out.mean_gram)) *
         (static_cast<double>(trajectories) / (trajectories - 1)))
            .cwiseMax(0.0);
    out.gram_std_error = (var / trajectories).cwiseSqrt();
  } else {
    out.gram_std_error = Eigen::MatrixXd::Zero(p, p);
  }
  if (MinEigenvalue(noise_cov) > 0.0) {
    out.fisher = FisherFromGram(out.mean_gram, noise_cov);
  }
  return out;
}

double ScalarTransientStateMoment(double a, double b, double input_var,
                                  double noise_var, int T) {
  double moment = 0.0;  // E X_1^2
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    total += moment;
    moment = a * a * moment + b * b * input_var + noise_var;
  }
  return total;
}

LeadingTerms ComputeLeadingTerms(const Eigen::MatrixXd& H,
                                 const Eigen::MatrixXd& fisher, int N) {
  if (H.rows() != fisher.rows() || H.cols() != fisher.cols() ||
      H.rows() != H.cols()) {
    throw DimensionMismatch("H and FI must be square of equal size");
  }
  if (N < 1) throw InvalidArgument("N must be positive");
  const Eigen::LLT<Eigen::MatrixXd> llt(Symmetrize(fisher));
  if (llt.info() != Eigen::Success) {
    throw SingularFisher("Fisher information is not positive definite");
  }
  // X = FI^{-1} H = (H FI^{-1})^T, so trace and operator norm carry over.
  const Eigen::MatrixXd X = llt.solve(H);
  LeadingTerms out;
  out.N = N;
  out.param_dim = static_cast<int>(H.rows());
  out.ce_dr_term = X.trace() / N;
  out.rc_term = out.param_dim * OpNorm(X) / N;
  return out;
}

bool InequalityReport::AllPass() const {
  for (const InequalityCheck& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

bool InequalityReport::AllPass(const std::vector<std::string>& prefixes) const {
  for (const InequalityCheck& c : checks) {
    for (const std::string& p : prefixes) {
      if (c.name.rfind(p, 0) == 0 && !c.pass) return false;
    }
  }
  return true;
}

InequalityReport RunInequalitySuite(const SystemParams& theta,
                                    const CostModel& cm, Rng& rng,
                                    const InequalitySuiteOptions& opts) {
  const int dx = theta.dx();
  const int du = theta.du();
  if (MinEigenvalue(cm.Q() - Eigen::MatrixXd::Identity(dx, dx)) < -1e-10) {
    throw PreconditionViolated("inequality suite requires Q >= I");
  }
  if (!cm.R().isApprox(Eigen::MatrixXd::Identity(du, du), 1e-12)) {
    throw PreconditionViolated("inequality suite requires R = I");
  }
  if (!cm.noise_cov().isApprox(Eigen::MatrixXd::Identity(dx, dx), 1e-12)) {
    throw PreconditionViolated("inequality suite requires noise covariance I");
  }

  InequalityReport report;
  auto& checks = report.checks;
  const RiccatiSolution sol = SolveDare(theta, cm);
  const double p_norm = OpNorm(sol.P);
  const double tau = std::max(1.0, OpNorm(theta.B));
  const Eigen::MatrixXd sigma = StateCovariance(sol.K, theta, cm);
  const Eigen::MatrixXd psi = InputWeight(theta, cm, sol.P);

  checks.push_back(MakeCheck("simplify.P_geq_I", 1.0, MinEigenvalue(sol.P)));
  checks.push_back(MakeCheck("simplify.sigma_le_P", OpNorm(sigma), p_norm));
  checks.push_back(MakeCheck("simplify.closed_loop_le_sqrtP",
                             OpNorm(ClosedLoop(theta, sol.K)),
                             std::sqrt(p_norm)));
  checks.push_back(
      MakeCheck("simplify.K_le_sqrtP", OpNorm(sol.K), std::sqrt(p_norm)));
  checks.push_back(
      MakeCheck("simplify.psi_le_2tau2P", OpNorm(psi), 2 * tau * tau * p_norm));
  checks.push_back(MakeCheck("simplify.psi_kron_sigma_le_2tau2P2",
                             OpNorm(psi) * OpNorm(sigma),
                             2 * tau * tau * p_norm * p_norm));

  const Eigen::VectorXd v = FlattenParams(theta);
  const int d = theta.param_dim();

  // Certainty-equivalent stabilization at ||theta2 - theta1|| = ||P||^-5/256.
  const double ce_radius = std::pow(p_norm, -5.0) / 256.0;
  for (int k = 0; k < opts.perturbations; ++k) {
    const std::string tag = "[" + std::to_string(k) + "]";
    const SystemParams theta2 =
        UnflattenParams(v + ce_radius * RandomDirection(d, rng), dx, du);
    RiccatiSolution sol2;
    bool stabilizable = true;
    try {
      sol2 = SolveDare(theta2, cm);
    } catch (const NotStabilizable&) {
      stabilizable = false;
    }
    checks.push_back(MakeFlag("ce_stabilization.perturbed_stabilizable" + tag,
                              stabilizable, stabilizable ? 1.0 : -1.0));
    if (!stabilizable) continue;
    const double rho = SpectralRadius(ClosedLoop(theta, sol2.K));
    const bool stabilizes = rho < 1.0 - kStabilityMargin;
    checks.push_back(MakeFlag("ce_stabilization.gain_stabilizes" + tag,
                              stabilizes, 1.0 - rho));
    if (!stabilizes) continue;
    checks.push_back(MakeCheck("ce_stabilization.sigma_le_2P" + tag,
                               OpNorm(StateCovariance(sol2.K, theta, cm)),
                               2.0 * p_norm));
  }

  // Riccati perturbation at ||theta2 - theta1|| = ||P||^-2/16.
  const double ric_radius = std::pow(p_norm, -2.0) / 16.0;
  for (int k = 0; k < opts.perturbations; ++k) {
    const std::string tag = "[" + std::to_string(k) + "]";
    const SystemParams theta2 =
        UnflattenParams(v + ric_radius * RandomDirection(d, rng), dx, du);
    RiccatiSolution sol2;
    try {
      sol2 = SolveDare(theta2, cm);
    } catch (const NotStabilizable&) {
      checks.push_back(
          MakeFlag("riccati.perturbed_stabilizable" + tag, false, -1.0));
      continue;
    }
    checks.push_back(
        MakeFlag("riccati.perturbed_stabilizable" + tag, true, 1.0));
    checks.push_back(MakeCheck("riccati.P_le_sqrt2P" + tag, OpNorm(sol2.P),
                               std::sqrt(2.0) * p_norm));
    const Eigen::MatrixXd dK = sol2.K - sol.K;
    checks.push_back(MakeCheck(
        "riccati.gain_shift" + tag,
        std::max(OpNorm(dK), OpNorm(theta.B * dK)),
        32.0 * std::pow(p_norm, 3.5) * ric_radius));
    checks.push_back(MakeCheck("riccati.P_shift" + tag, OpNorm(sol2.P - sol.P),
                               8.0 * std::sqrt(2.0) * std::pow(p_norm, 3.0) *
                                   ric_radius));
  }

  if (opts.include_jacobian_bound) {
    checks.push_back(MakeCheck("jacobian.gain_jacobian_le_24P72",
                               OpNorm(GainJacobian(theta, cm)),
                               24.0 * std::pow(p_norm, 3.5)));
  }
  return report;
}

SystemParams RandomStabilizableSystem(int dx, int du, Rng& rng,
                                      double rho_min, double rho_max) {
  if (dx < 1 || du < 1 || !(rho_min > 0.0) || rho_max < rho_min) {
    throw InvalidArgument("need dx, du >= 1 and 0 < rho_min <= rho_max");
  }
  const CostModel cm = CostModel::Identity(dx, du);
  for (;;) {
    Eigen::MatrixXd A(dx, dx);
    Eigen::MatrixXd B(dx, du);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = rng.Normal();
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = rng.Normal();
    const double rho = SpectralRadius(A);
    if (!(rho > 1e-8)) continue;
    A *= (rho_min + (rho_max - rho_min) * rng.Uniform01()) / rho;
    SystemParams theta(A, B);
    try {
      SolveDare(theta, cm);
      return theta;
    } catch (const NotStabilizable&) {
    } catch (const SolverError&) {
    }
  }
}

void WriteInequalityCsv(const InequalityReport& report,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "check_name,margin,pass\n";
  for (const InequalityCheck& c : report.checks) {
    out << c.name << ',' << c.margin << ',' << (c.pass ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace drlqr
