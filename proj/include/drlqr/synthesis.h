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

#include "drlqr/rng.h"
#include "drlqr/sysid.h"
#include "drlqr/types.h"

namespace drlqr {

struct DrOptions {
  int n_scenarios = 30;
  int max_iters = 10000;
  double step_size = 0.0005;
  // Early stop once the summed masked gradient has at most this norm.
  double grad_tol = 1e-6;
  // Consecutive iterations with an infinite objective, or with a finite one
  // that does not improve on the best so far, before the step is halved and
  // the iterate reset to the best one seen. The run ends once stalls have
  // shrunk the step below 1e-8 of step_size.
  int divergence_patience = 50;

  void Validate() const;
};

struct RcOptions {
  int n_scenarios = 30;
  int max_iters = 2000;
  double step_size = 0.01;
  // Step halvings allowed after an iterate destabilizes a scenario.
  int restarts = 30;
  // Stop when the best worst-case gap has not improved for this many
  // iterations.
  int stall_iters = 300;
  // Candidates also include K(center) and K(theta_j) computed with the state
  // weight scaled by 10^k, k = 1..weight_decades.
  int weight_decades = 6;
  // When no certainty-equivalent candidate stabilizes every scenario, try
  // the masked scenario-gradient descent (default DrOptions) from K(center)
  // as one more candidate.
  bool feasibility_descent = true;

  void Validate() const;
};

struct SynthesisReport {
  Gain gain;
  // Per-iteration objective at the current iterate; +inf when infinite.
  std::vector<double> objective_trace;
  std::vector<double> stabilized_fraction_trace;
  bool converged = false;
  Cost objective = Cost::Infinite();
};

// K(theta_hat) from the Riccati equation.
Gain SynthesizeCertaintyEquivalent(const SystemParams& theta_hat,
                                   const CostModel& cm);

// Mean LQR cost over the scenarios; Infinite if any scenario is destabilized.
Cost DrObjective(const Gain& K, const std::vector<SystemParams>& scenarios,
                 const CostModel& cm);

// Masked policy-gradient descent from `init` on the fixed scenario set:
//   K <- K - step * sum_j grad C(K, theta_j) 1(rho(A_j + B_j K) < 1).
// Returns the best iterate on DrObjective; if no iterate stabilizes every
// scenario, the iterate stabilizing the largest share. Throws
// AllScenariosUnstable if no iterate stabilizes any scenario.
SynthesisReport SynthesizeDomainRandomized(
    const std::vector<SystemParams>& scenarios, const Gain& init,
    const CostModel& cm, const DrOptions& opts);

// Samples opts.n_scenarios scenarios uniformly from G, then runs the descent
// above initialized at the certainty-equivalent gain for G's center.
SynthesisReport SynthesizeDomainRandomized(const ConfidenceEllipsoid& G,
                                           const CostModel& cm,
                                           const DrOptions& opts, Rng& rng);

// max_j (C(K, theta_j) - C(K(theta_j), theta_j)). Throws NotStabilizable if a
// scenario has no stabilizing solution.
Cost RcObjective(const Gain& K, const std::vector<SystemParams>& scenarios,
                 const CostModel& cm);

// Subgradient descent on the sampled worst-case suboptimality gap. Starts from
// the best of the candidates {K(center)} U {K(theta_j)} and their inflated
// state-weight variants, extended by the feasibility descent when enabled; throws NoStabilizingCandidate if none of
// them stabilizes every scenario.
SynthesisReport SynthesizeRobust(const std::vector<SystemParams>& scenarios,
                                 const SystemParams& center,
                                 const CostModel& cm, const RcOptions& opts);

SynthesisReport SynthesizeRobust(const ConfidenceEllipsoid& G,
                                 const CostModel& cm, const RcOptions& opts,
                                 Rng& rng);

// Columns: iter,objective,stabilized_fraction.
void WriteReportCsv(const SynthesisReport& report, const std::string& path);

}  // namespace drlqr
