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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drlqr/rng.h"
#include "drlqr/sysid.h"
#include "drlqr/types.h"

namespace drlqr {

// D_theta vec K(theta) by central differences with one Richardson level,
// step = rel_step * max(1, ||theta||). Shape (du*dx) x d_theta, column
// stacking throughout. If the Riccati solve fails at a perturbed point the
// step is reduced tenfold once before giving up with NotStabilizable.
Eigen::MatrixXd GainJacobian(const SystemParams& theta, const CostModel& cm,
                             double rel_step = 1e-6);

// Sigma^{K(theta)}(theta) (x) Psi(theta). This order satisfies
// trace(M Sigma M^T Psi) = vec(M)^T (Sigma (x) Psi) vec(M) under column
// stacking.
Eigen::MatrixXd GainCostWeight(const SystemParams& theta, const CostModel& cm);

struct ModelTaskHessian {
  enum class Method { kAnalytic, kFiniteDifference };
  Eigen::MatrixXd H;
  Method method = Method::kAnalytic;
};

// H = J^T (Sigma (x) Psi) J with J = GainJacobian. H is the quadratic
// coefficient of the certainty-equivalence gap:
//   C(K(theta + d), theta) - C(K(theta), theta) = d^T H d + O(||d||^3),
// i.e. one half of the second derivative of theta' -> C(K(theta'), theta).
ModelTaskHessian ModelTaskHessianAnalytic(const SystemParams& theta,
                                          const CostModel& cm);

// Full second derivative of g(theta') = C(K(theta'), theta) at theta' = theta
// by central second differences with one Richardson level, step =
// rel_step * max(1, ||theta||).
Eigen::MatrixXd CertaintyEquivalenceCostHessian(const SystemParams& theta,
                                                const CostModel& cm,
                                                double rel_step = 1e-4);

// Finite-difference counterpart of ModelTaskHessianAnalytic: one half of
// CertaintyEquivalenceCostHessian, symmetrized.
ModelTaskHessian ModelTaskHessianFiniteDifference(const SystemParams& theta,
                                                  const CostModel& cm,
                                                  double rel_step = 1e-4);

struct PopulationFisher {
  // Monte Carlo mean of sum_t z z^T and its elementwise standard error.
  Eigen::MatrixXd mean_gram;
  Eigen::MatrixXd gram_std_error;
  // mean_gram (x) noise_cov^{-1}; empty when noise_cov is singular.
  FisherEstimate fisher;
  int samples = 0;
};

// Trajectory n uses rng.Split(n), exactly as CollectDataset does, so the
// result equals EstimateFisher on the corresponding dataset.
PopulationFisher EstimatePopulationFisher(const SystemParams& theta,
                                          const Eigen::MatrixXd& noise_cov,
                                          int T,
                                          const Eigen::MatrixXd& input_cov,
                                          int trajectories, const Rng& rng);

// Exact sum_{t=1}^{T} E[X_t^2] for the scalar system started at zero.
double ScalarTransientStateMoment(double a, double b, double input_var,
                                  double noise_var, int T);

struct LeadingTerms {
  double ce_dr_term = 0.0;  // trace(H FI^{-1}) / N
  double rc_term = 0.0;     // d_theta ||H FI^{-1}|| / N
  int N = 0;
  int param_dim = 0;
};

// Throws SingularFisher unless FI is positive definite.
LeadingTerms ComputeLeadingTerms(const Eigen::MatrixXd& H,
                                 const Eigen::MatrixXd& fisher, int N);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  // (rhs - lhs) / max(|rhs|, 1e-300); nonnegative when the check passes.
  double margin = 0.0;
  bool pass = false;
};

struct InequalityReport {
  std::vector<InequalityCheck> checks;
  bool AllPass() const;
  // Passes every check whose name starts with one of the prefixes.
  bool AllPass(const std::vector<std::string>& prefixes) const;
};

struct InequalitySuiteOptions {
  // Random perturbation directions per perturbation lemma.
  int perturbations = 4;
  bool include_jacobian_bound = true;
};

// Evaluates the perturbation-analysis inequalities at theta and at sampled
// perturbations on the boundary of their admissible radii. Check names are
// prefixed "simplify.", "ce_stabilization.", "riccati." and "jacobian.".
// Failures are reported, not thrown. Throws PreconditionViolated unless
// Q >= I, R = I and the noise covariance is I.
InequalityReport RunInequalitySuite(const SystemParams& theta,
                                    const CostModel& cm, Rng& rng,
                                    const InequalitySuiteOptions& opts = {});

// Random instance with Gaussian B and Gaussian A rescaled to a spectral
// radius drawn from [rho_min, rho_max]; redrawn until the Riccati equation is
// solvable.
SystemParams RandomStabilizableSystem(int dx, int du, Rng& rng,
                                      double rho_min = 0.3,
                                      double rho_max = 1.3);

// Columns: check_name,margin,pass.
void WriteInequalityCsv(const InequalityReport& report,
                        const std::string& path);

}  // namespace drlqr
