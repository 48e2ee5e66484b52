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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drlqr/rng.h"

namespace drlqr {

// Pole mass (kg), length (m) and gravity (m/s^2).
struct PendulumParams {
  double m = 1.0;
  double l = 1.0;
  double g = 9.81;

  // Throws InvalidArgument unless all three are finite and positive.
  void Validate() const;
  Eigen::Vector3d AsVector() const { return {m, l, g}; }
  static PendulumParams FromVector(const Eigen::Vector3d& v) {
    return {v(0), v(1), v(2)};
  }
};

// Angle psi (rad, 0 upright) and angular velocity (rad/s).
struct PendulumState {
  double psi = 0.0;
  double psi_dot = 0.0;
};

constexpr double kPendulumDt = 0.05;

// Wraps to (-pi, pi].
double WrapAngle(double psi);

// Semi-implicit Euler step of psi'' = (g/l) sin(psi) + torque / (m l^2).
PendulumState PendulumStep(const PendulumState& s, double torque,
                           const PendulumParams& p, double dt = kPendulumDt);

// psi^2 + 0.1 psi_dot^2 + 2 torque^2 while |wrap(psi)| <= pi/4, else 50.
double StageCost(const PendulumState& s, double torque);

struct PendulumTrajectory {
  std::vector<PendulumState> states;  // length T + 1
  std::vector<double> torques;        // commanded torque, length T
};

struct PendulumDataset {
  std::vector<PendulumTrajectory> trajectories;
  double dt = kPendulumDt;
};

// n_traj trajectories of length T from the downward rest state (pi, 0).
// Commanded torques are N(0, input_std^2); the plant receives them plus
// N(0, noise_std^2) noise. Trajectory n uses rng.Split(n).
PendulumDataset CollectPendulumData(const PendulumParams& truth, int n_traj,
                                    int T, const Rng& rng,
                                    double input_std = 1.0,
                                    double noise_std = 1.0,
                                    double dt = kPendulumDt);

struct IdentifyOptions {
  PendulumParams init{1.5, 1.5, 5.0};
  int max_iters = 200;
  double step_tol = 1e-12;
  // Relative singular-value threshold for the Jacobian rank.
  double rank_tol = 1e-7;
};

struct PendulumFit {
  PendulumParams params;
  double residual_norm = 0.0;
  int iterations = 0;
  // Numerical rank of the residual Jacobian in log-parameters at the
  // solution. The model depends on (m, l, g) only through g/l and 1/(m l^2),
  // so well-excited data gives rank 2.
  int jacobian_rank = 0;
};

// Nonlinear least squares over one-step transitions, Gauss-Newton in
// log(m, l, g) with a central-difference Jacobian and minimum-norm steps.
// Throws IdentificationFailed when the data excite fewer than two directions
// at the initial guess or when the iteration does not converge (message
// carries the last iterate). An iterate that runs to the positivity boundary
// of g/l or 1/(m l^2) is returned with jacobian_rank < 2.
PendulumFit IdentifyPendulum(const PendulumDataset& ds,
                             const IdentifyOptions& opts = {});

struct CemOptions {
  int horizon = 30;
  int population = 64;
  int elites = 8;
  int iterations = 8;
  double init_std = 1.0;
  int model_samples = 15;
  double torque_limit = 3.0;
  // Workers used to score the population.
  int threads = 1;

  void Validate() const;
};

struct CemResult {
  std::vector<double> plan;
  // Mean elite score after each iteration.
  std::vector<double> elite_cost_trace;
};

// Mean over models of the noiseless rollout cost sum_t c(s_{t+1}, u_t).
double RolloutCost(const PendulumState& s, const std::vector<double>& plan,
                   const std::vector<PendulumParams>& models,
                   double dt = kPendulumDt);

// Cross-entropy planning. Each iteration scores the current mean, the
// previous elites and fresh Gaussian samples, all clamped to the torque
// limit, and refits mean and per-step std to the best `elites` (stable sort by
// score, then index). `warm_start` seeds the mean; zeros otherwise.
CemResult CemPlan(const PendulumState& s,
                  const std::vector<PendulumParams>& models,
                  const CemOptions& opts, Rng& rng,
                  const std::vector<double>* warm_start = nullptr,
                  double dt = kPendulumDt);

// Uniform draws from the solid ball of the given radius around center in
// (m, l, g); draws with a non-positive coordinate are rejected.
std::vector<PendulumParams> SamplePendulumModels(const PendulumParams& center,
                                                 double radius, int count,
                                                 Rng& rng);

enum class PlannerKind { kCE, kDR };

struct EpisodeRow {
  int t = 0;
  double psi = 0.0;
  double psi_dot = 0.0;
  double torque = 0.0;
  double cost = 0.0;
};

struct EpisodeResult {
  double total_cost = 0.0;
  std::vector<EpisodeRow> log;
};

// Receding-horizon episode from the upright rest state. CE plans with
// {estimate}; DR plans with opts.model_samples draws of radius `radius`
// around the estimate, sampled once per episode. Each step applies the first
// planned torque plus N(0, 1) noise to the truth and accrues c(s_{t+1}, u_t).
// Planning and plant noise use separate splits of rng, so both planners see
// the same noise sequence for a given rng.
EpisodeResult RunEpisode(PlannerKind kind, const PendulumParams& truth,
                         const PendulumParams& estimate, double radius,
                         int length, const CemOptions& opts, const Rng& rng,
                         double dt = kPendulumDt);

// Columns: t,psi,psi_dot,torque,cost.
void WriteEpisodeCsv(const EpisodeResult& episode, const std::string& path);

struct PendulumExperimentConfig {
  PendulumParams truth;
  std::vector<int> traj_grid{1, 2, 4, 8, 16, 32};
  int traj_length = 10;
  int episode_length = 100;
  int seeds = 20;
  // DR radius = radius_scale / number of trajectories.
  double radius_scale = 2.0;
  std::uint64_t master_seed = 0;
  CemOptions cem;

  void Validate() const;
};

struct PendulumTrial {
  int seed = 0;
  int n_traj = 0;
  double ce_cost = 0.0;
  double dr_cost = 0.0;
  // False when identification failed; both costs are then NaN.
  bool identified = true;
};

struct PairedEpisodes {
  PendulumFit fit;
  EpisodeResult ce;
  EpisodeResult dr;
};

// Dataset from Rng(master_seed).Split({seed, n_traj}), identification, then
// CE and DR episodes sharing Rng(master_seed).Split({seed, n_traj, 7}). Throws
// IdentificationFailed.
PairedEpisodes RunPendulumTrial(const PendulumExperimentConfig& cfg, int seed,
                                int n_traj);

// One paired (CE, DR) episode per seed and budget, sharing the dataset, the
// estimate and the plant noise. Sorted by n_traj, then seed.
std::vector<PendulumTrial> RunPendulumExperiment(
    const PendulumExperimentConfig& cfg, int threads = 1);

struct PendulumSummaryRow {
  int n_traj = 0;
  double ce_mean = 0.0;
  double ce_se = 0.0;
  double dr_mean = 0.0;
  double dr_se = 0.0;
  int samples = 0;
};

std::vector<PendulumSummaryRow> SummarizePendulum(
    const std::vector<PendulumTrial>& trials);

// Columns: seed,n_traj,ce_cost,dr_cost,identified.
void WritePendulumTrialsCsv(const std::vector<PendulumTrial>& trials,
                            const std::string& path);
// Columns: n_traj,ce_mean,ce_se,dr_mean,dr_se,samples.
void WritePendulumSummaryCsv(const std::vector<PendulumSummaryRow>& rows,
                             const std::string& path);

}  // namespace drlqr
