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

#include "drlqr/synthesis.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "drlqr/errors.h"
#include "drlqr/lqr.h"

namespace drlqr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cost/gradient at K; solver failures at near-marginal scenarios count as
// unstable.
GainEvaluation SafeEvaluate(const Gain& K, const SystemParams& theta,
                            const CostModel& cm, bool with_gradient) {
  try {
    return EvaluateGain(K, theta, cm, with_gradient);
  } catch (const SolverError&) {
    return GainEvaluation{};
  }
}

void RequireScenarios(const std::vector<SystemParams>& scenarios) {
  if (scenarios.empty()) throw InvalidArgument("scenario set is empty");
}

struct RobustScenarios {
  std::vector<SystemParams> scenarios;
  std::vector<double> optimal_cost;
  std::vector<Gain> optimal_gain;
};

RobustScenarios PrepareRobust(const std::vector<SystemParams>& scenarios,
                              const CostModel& cm) {
  RequireScenarios(scenarios);
  RobustScenarios rs;
  rs.scenarios = scenarios;
  for (const SystemParams& s : scenarios) {
    const RiccatiSolution sol = SolveDare(s, cm);
    rs.optimal_cost.push_back((sol.P * cm.noise_cov()).trace());
    rs.optimal_gain.push_back(sol.K);
  }
  return rs;
}

// Worst-case gap and the lowest index attaining it; index -1 when some
// scenario is destabilized.
std::pair<Cost, int> WorstGap(const Gain& K, const RobustScenarios& rs,
                              const CostModel& cm, int* stabilized) {
  double worst = -kInf;
  int arg = -1;
  bool infinite = false;
  int stable = 0;
  for (std::size_t j = 0; j < rs.scenarios.size(); ++j) {
    const GainEvaluation ev = SafeEvaluate(K, rs.scenarios[j], cm, false);
    if (ev.cost.is_infinite()) {
      infinite = true;
      continue;
    }
    ++stable;
    const double gap = std::max(0.0, ev.cost.value() - rs.optimal_cost[j]);
    if (gap > worst) {
      worst = gap;
      arg = static_cast<int>(j);
    }
  }
  if (stabilized != nullptr) *stabilized = stable;
  if (infinite) return {Cost::Infinite(), -1};
  return {Cost(worst), arg};
}

}  // namespace

void DrOptions::Validate() const {
  if (n_scenarios < 1 || max_iters < 1 || !(step_size > 0.0) ||
      !(grad_tol >= 0.0) || divergence_patience < 1) {
    throw InvalidArgument(
        "DR options need n_scenarios >= 1, max_iters >= 1, step_size > 0");
  }
}

void RcOptions::Validate() const {
  if (n_scenarios < 1 || max_iters < 0 || !(step_size > 0.0) || restarts < 0 ||
      stall_iters < 1 || weight_decades < 0) {
    throw InvalidArgument(
        "RC options need n_scenarios >= 1, max_iters >= 0, step_size > 0");
  }
}

Gain SynthesizeCertaintyEquivalent(const SystemParams& theta_hat,
                                   const CostModel& cm) {
  return SolveDare(theta_hat, cm).K;
}

Cost DrObjective(const Gain& K, const std::vector<SystemParams>& scenarios,
                 const CostModel& cm) {
  RequireScenarios(scenarios);
  double sum = 0.0;
  for (const SystemParams& s : scenarios) {
    const Cost c = LqrCost(K, s, cm);
    if (c.is_infinite()) return c;
    sum += c.value();
  }
  return Cost(sum / static_cast<double>(scenarios.size()));
}

// Below this fraction of the configured step the iterate no longer moves.
constexpr double kMinStepRatio = 1e-8;

SynthesisReport SynthesizeDomainRandomized(
    const std::vector<SystemParams>& scenarios, const Gain& init,
    const CostModel& cm, const DrOptions& opts) {
  opts.Validate();
  RequireScenarios(scenarios);
  const double n = static_cast<double>(scenarios.size());

  SynthesisReport report;
  Gain K = init;
  double step = opts.step_size;
  int infinite_run = 0;
  int stall_run = 0;

  bool have_best = false;
  Gain best;
  double best_value = kInf;
  // Fallback when no iterate stabilizes every scenario: most scenarios
  // stabilized, then lowest mean cost over the stabilized ones.
  int fallback_stable = 0;
  double fallback_cost = kInf;
  Gain fallback;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(K.rows(), K.cols());
    double cost_sum = 0.0;
    int stable = 0;
    for (const SystemParams& s : scenarios) {
      const GainEvaluation ev = SafeEvaluate(K, s, cm, true);
      if (ev.cost.is_infinite()) continue;
      ++stable;
      cost_sum += ev.cost.value();
      grad += ev.gradient;
    }
    const bool all_stable = stable == static_cast<int>(scenarios.size());
    const double objective = all_stable ? cost_sum / n : kInf;
    report.objective_trace.push_back(objective);
    report.stabilized_fraction_trace.push_back(stable / n);

    if (all_stable) {
      infinite_run = 0;
      if (objective < best_value) {
        best_value = objective;
        best = K;
        have_best = true;
        stall_run = 0;
      } else if (++stall_run >= opts.divergence_patience) {
        // Finite but non-improving iterates: the step overshoots.
        step *= 0.5;
        stall_run = 0;
        K = best;
        if (step < kMinStepRatio * opts.step_size) break;
        continue;
      }
    } else {
      if (stable > 0) {
        const double mean = cost_sum / stable;
        if (stable > fallback_stable ||
            (stable == fallback_stable && mean < fallback_cost)) {
          fallback_stable = stable;
          fallback_cost = mean;
          fallback = K;
        }
      }
      if (++infinite_run >= opts.divergence_patience) {
        step *= 0.5;
        infinite_run = 0;
        K = have_best ? best : init;
        continue;
      }
    }

    if (stable > 0 && grad.norm() <= opts.grad_tol) {
      report.converged = all_stable;
      if (all_stable) break;
    }
    K -= step * grad;
    if (!K.allFinite()) {
      step *= 0.5;
      K = have_best ? best : init;
    }
  }

  if (have_best) {
    report.gain = best;
    report.objective = Cost(best_value);
  } else if (fallback_stable > 0) {
    report.gain = fallback;
    report.objective = Cost::Infinite();
  } else {
    throw AllScenariosUnstable(
        "no iterate stabilized any domain-randomization scenario");
  }
  return report;
}

SynthesisReport SynthesizeDomainRandomized(const ConfidenceEllipsoid& G,
                                           const CostModel& cm,
                                           const DrOptions& opts, Rng& rng) {
  opts.Validate();
  const Gain init = SynthesizeCertaintyEquivalent(G.center_params(), cm);
  const std::vector<SystemParams> scenarios =
      SampleUniform(G, opts.n_scenarios, rng);
  return SynthesizeDomainRandomized(scenarios, init, cm, opts);
}

Cost RcObjective(const Gain& K, const std::vector<SystemParams>& scenarios,
                 const CostModel& cm) {
  const RobustScenarios rs = PrepareRobust(scenarios, cm);
  return WorstGap(K, rs, cm, nullptr).first;
}

SynthesisReport SynthesizeRobust(const std::vector<SystemParams>& scenarios,
                                 const SystemParams& center,
                                 const CostModel& cm, const RcOptions& opts) {
  opts.Validate();
  const RobustScenarios rs = PrepareRobust(scenarios, cm);
  const double n = static_cast<double>(scenarios.size());

  std::vector<Gain> candidates;
  try {
    candidates.push_back(SolveDare(center, cm).K);
  } catch (const NotStabilizable&) {
  }
  candidates.insert(candidates.end(), rs.optimal_gain.begin(),
                    rs.optimal_gain.end());
  // Higher-gain certainty-equivalent policies tolerate larger model errors.
  for (int k = 1; k <= opts.weight_decades; ++k) {
    const CostModel inflated(std::pow(10.0, k) * cm.Q(), cm.R(), cm.noise_cov());
    std::vector<SystemParams> sources{center};
    sources.insert(sources.end(), scenarios.begin(), scenarios.end());
    for (const SystemParams& s : sources) {
      try {
        candidates.push_back(SolveDare(s, inflated).K);
      } catch (const NotStabilizable&) {
      }
    }
  }

  Gain best;
  Cost best_value = Cost::Infinite();
  for (const Gain& c : candidates) {
    const Cost v = WorstGap(c, rs, cm, nullptr).first;
    if (v < best_value) {
      best_value = v;
      best = c;
    }
  }
  if (best_value.is_infinite() && opts.feasibility_descent &&
      !candidates.empty()) {
    // Masked descent on the summed scenario cost, started from the first
    // candidate, often reaches a gain that stabilizes every scenario.
    try {
      const SynthesisReport dr =
          SynthesizeDomainRandomized(rs.scenarios, candidates.front(), cm,
                                     DrOptions{});
      if (dr.objective.is_finite()) {
        best = dr.gain;
        best_value = WorstGap(best, rs, cm, nullptr).first;
      }
    } catch (const AllScenariosUnstable&) {
    }
  }
  if (best_value.is_infinite()) {
    throw NoStabilizingCandidate(
        "no candidate initialization stabilizes every scenario");
  }

  SynthesisReport report;
  Gain K = best;
  double step = opts.step_size;
  int restarts = 0;
  int since_improvement = 0;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    int stable = 0;
    const auto [value, worst] = WorstGap(K, rs, cm, &stable);
    report.objective_trace.push_back(value.value());
    report.stabilized_fraction_trace.push_back(stable / n);
    if (value.is_infinite()) {
      if (++restarts > opts.restarts) break;
      step *= 0.5;
      K = best;
      continue;
    }
    if (value < best_value) {
      best_value = value;
      best = K;
      since_improvement = 0;
    } else if (++since_improvement >= opts.stall_iters) {
      report.converged = true;
      break;
    }
    const GainEvaluation ev = SafeEvaluate(K, rs.scenarios[worst], cm, true);
    if (ev.cost.is_infinite()) {
      step *= 0.5;
      K = best;
      continue;
    }
    K -= step * ev.gradient;
  }
  report.gain = best;
  report.objective = best_value;
  return report;
}

SynthesisReport SynthesizeRobust(const ConfidenceEllipsoid& G,
                                 const CostModel& cm, const RcOptions& opts,
                                 Rng& rng) {
  opts.Validate();
  const std::vector<SystemParams> scenarios =
      SampleUniform(G, opts.n_scenarios, rng);
  return SynthesizeRobust(scenarios, G.center_params(), cm, opts);
}

void WriteReportCsv(const SynthesisReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "iter,objective,stabilized_fraction\n";
  for (std::size_t i = 0; i < report.objective_trace.size(); ++i) {
    out << i << ',';
    const double v = report.objective_trace[i];
    if (std::isinf(v)) out << "inf";
    else out << v;
    out << ',' << report.stabilized_fraction_trace[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace drlqr
