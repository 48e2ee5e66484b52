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

#include "drlqr/pendulum.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "drlqr/errors.h"
#include "drlqr/thread_pool.h"

namespace drlqr {
namespace {

constexpr double kOutsideCost = 50.0;

double Clamp(double u, double limit) { return std::clamp(u, -limit, limit); }

// Stacked one-step prediction residuals of every transition in ds.
Eigen::VectorXd Residuals(const PendulumDataset& ds, const PendulumParams& p) {
  std::size_t count = 0;
  for (const auto& tr : ds.trajectories) count += tr.torques.size();
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(count));
  Eigen::Index k = 0;
  for (const auto& tr : ds.trajectories) {
    for (std::size_t t = 0; t < tr.torques.size(); ++t) {
      const PendulumState pred = PendulumStep(tr.states[t], tr.torques[t], p, ds.dt);
      r(k++) = tr.states[t + 1].psi - pred.psi;
      r(k++) = tr.states[t + 1].psi_dot - pred.psi_dot;
    }
  }
  return r;
}

PendulumParams FromLog(const Eigen::Vector3d& phi) {
  return PendulumParams::FromVector(phi.array().exp().matrix());
}

Eigen::MatrixXd LogJacobian(const PendulumDataset& ds,
                            const Eigen::Vector3d& phi, Eigen::Index rows) {
  constexpr double h = 1e-6;
  Eigen::MatrixXd J(rows, 3);
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d plus = phi, minus = phi;
    plus(i) += h;
    minus(i) -= h;
    J.col(i) = (Residuals(ds, FromLog(plus)) - Residuals(ds, FromLog(minus))) /
               (2.0 * h);
  }
  return J;
}

int NumericalRank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, double tol) {
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0)) ++rank;
  }
  return rank;
}

std::string Describe(const PendulumParams& p) {
  std::ostringstream os;
  os.precision(10);
  os << "(m=" << p.m << ", l=" << p.l << ", g=" << p.g << ")";
  return os.str();
}

bool AllSame(const std::vector<PendulumParams>& models) {
  for (const PendulumParams& p : models) {
    if (p.m != models.front().m || p.l != models.front().l ||
        p.g != models.front().g) {
      return false;
    }
  }
  return true;
}

double SingleRollout(PendulumState s, const std::vector<double>& plan,
                     const PendulumParams& p, double dt) {
  double total = 0.0;
  for (double u : plan) {
    s = PendulumStep(s, u, p, dt);
    total += StageCost(s, u);
  }
  return total;
}

std::pair<double, double> MeanAndStdError(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

void PendulumParams::Validate() const {
  for (double v : {m, l, g}) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw InvalidArgument("pendulum parameters must be positive and finite");
    }
  }
}

double WrapAngle(double psi) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(psi + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  w -= pi;  // now in [-pi, pi)
  return w == -pi ? pi : w;
}

PendulumState PendulumStep(const PendulumState& s, double torque,
                           const PendulumParams& p, double dt) {
  const double accel =
      (p.g / p.l) * std::sin(s.psi) + torque / (p.m * p.l * p.l);
  PendulumState next;
  next.psi_dot = s.psi_dot + dt * accel;
  next.psi = s.psi + dt * next.psi_dot;
  return next;
}

double StageCost(const PendulumState& s, double torque) {
  const double psi = WrapAngle(s.psi);
  if (std::abs(psi) > std::numbers::pi / 4.0) return kOutsideCost;
  return psi * psi + 0.1 * s.psi_dot * s.psi_dot + 2.0 * torque * torque;
}

PendulumDataset CollectPendulumData(const PendulumParams& truth, int n_traj,
                                    int T, const Rng& rng, double input_std,
                                    double noise_std, double dt) {
  truth.Validate();
  if (n_traj < 1 || T < 1) {
    throw InvalidArgument("need at least one trajectory of positive length");
  }
  PendulumDataset ds;
  ds.dt = dt;
  for (int n = 0; n < n_traj; ++n) {
    Rng sub = rng.Split(static_cast<std::uint64_t>(n));
    PendulumTrajectory tr;
    PendulumState s{std::numbers::pi, 0.0};
    tr.states.push_back(s);
    for (int t = 0; t < T; ++t) {
      const double u = input_std * sub.Normal();
      const double w = noise_std * sub.Normal();
      s = PendulumStep(s, u + w, truth, dt);
      tr.torques.push_back(u);
      tr.states.push_back(s);
    }
    ds.trajectories.push_back(std::move(tr));
  }
  return ds;
}

PendulumFit IdentifyPendulum(const PendulumDataset& ds,
                             const IdentifyOptions& opts) {
  opts.init.Validate();
  std::size_t transitions = 0;
  for (const auto& tr : ds.trajectories) {
    if (tr.states.size() != tr.torques.size() + 1) {
      throw InvalidArgument("trajectory needs one more state than torques");
    }
    transitions += tr.torques.size();
  }
  if (transitions < 3) {
    throw IdentificationFailed("need at least 3 transitions, got " +
                               std::to_string(transitions));
  }

  Eigen::Vector3d phi = opts.init.AsVector().array().log().matrix();
  Eigen::VectorXd r = Residuals(ds, FromLog(phi));
  double cost = r.squaredNorm();
  const Eigen::Index rows = r.size();

  auto finish = [&](int it, int rank) {
    PendulumFit fit;
    fit.params = FromLog(phi);
    for (double v : fit.params.AsVector()) {
      if (!std::isfinite(v) || v <= 0.0) {
        // exp() of the log iterate under- or overflowed.
        throw IdentificationFailed("fit left the representable range: " +
                                   Describe(fit.params));
      }
    }
    fit.residual_norm = std::sqrt(cost);
    fit.iterations = it;
    fit.jacobian_rank = rank;
    return fit;
  };

  for (int it = 1; it <= opts.max_iters; ++it) {
    const Eigen::MatrixXd J = LogJacobian(ds, phi, rows);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU |
                                                 Eigen::ComputeThinV);
    const int rank = NumericalRank(svd, opts.rank_tol);
    if (rank < 2 && it == 1) {
      throw IdentificationFailed(
          "data do not excite the dynamics: residual Jacobian rank " +
          std::to_string(rank) + " < 2");
    }
    if (rank < 2) {
      // The iterate has run to the boundary g/l -> 0 or 1/(m l^2) -> 0,
      // which happens when the unconstrained fit of that ratio is <= 0.
      return finish(it, rank);
    }
    // Minimum-norm Gauss-Newton step on the numerically excited subspace.
    const Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
    const Eigen::MatrixXd V = svd.matrixV().leftCols(rank);
    const Eigen::VectorXd s = svd.singularValues().head(rank);
    const Eigen::Vector3d step =
        -V * (U.transpose() * r).cwiseQuotient(s);

    double alpha = 1.0;
    bool improved = false;
    Eigen::Vector3d trial_phi;
    Eigen::VectorXd trial_r;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      trial_phi = phi + alpha * step;
      trial_r = Residuals(ds, FromLog(trial_phi));
      if (trial_r.squaredNorm() < cost) {
        improved = true;
        break;
      }
    }
    const bool tiny = step.norm() <= opts.step_tol * (1.0 + phi.norm());
    if (improved) {
      phi = trial_phi;
      r = trial_r;
      cost = r.squaredNorm();
    }
    if (tiny || !improved) {
      return finish(it, rank);
    }
  }
  throw IdentificationFailed("Gauss-Newton did not converge in " +
                             std::to_string(opts.max_iters) +
                             " iterations; last iterate " +
                             Describe(FromLog(phi)));
}

void CemOptions::Validate() const {
  if (horizon < 1 || population < 1 || elites < 1 || elites > population ||
      iterations < 1 || !(init_std >= 0.0) || model_samples < 1 ||
      !(torque_limit > 0.0) || threads < 1) {
    throw InvalidArgument(
        "CEM options need horizon, population, iterations, model_samples >= 1 "
        "and 1 <= elites <= population");
  }
}

double RolloutCost(const PendulumState& s, const std::vector<double>& plan,
                   const std::vector<PendulumParams>& models, double dt) {
  if (models.empty()) throw InvalidArgument("model list is empty");
  if (AllSame(models)) return SingleRollout(s, plan, models.front(), dt);
  double total = 0.0;
  for (const PendulumParams& p : models) total += SingleRollout(s, plan, p, dt);
  return total / static_cast<double>(models.size());
}

CemResult CemPlan(const PendulumState& s,
                  const std::vector<PendulumParams>& models,
                  const CemOptions& opts, Rng& rng,
                  const std::vector<double>* warm_start, double dt) {
  opts.Validate();
  if (models.empty()) throw InvalidArgument("model list is empty");
  const int H = opts.horizon;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(H);
  if (warm_start != nullptr) {
    for (int t = 0; t < H && t < static_cast<int>(warm_start->size()); ++t) {
      mean(t) = (*warm_start)[t];
    }
  }
  Eigen::VectorXd stddev = Eigen::VectorXd::Constant(H, opts.init_std);
  std::vector<std::vector<double>> carried;

  CemResult result;
  for (int it = 0; it < opts.iterations; ++it) {
    std::vector<std::vector<double>> candidates;
    candidates.reserve(opts.population);
    std::vector<double> center(H);
    for (int t = 0; t < H; ++t) center[t] = Clamp(mean(t), opts.torque_limit);
    candidates.push_back(std::move(center));
    for (const auto& e : carried) {
      if (static_cast<int>(candidates.size()) >= opts.population) break;
      candidates.push_back(e);
    }
    while (static_cast<int>(candidates.size()) < opts.population) {
      std::vector<double> u(H);
      for (int t = 0; t < H; ++t) {
        u[t] = Clamp(mean(t) + stddev(t) * rng.Normal(), opts.torque_limit);
      }
      candidates.push_back(std::move(u));
    }

    std::vector<double> scores(candidates.size());
    auto score = [&](std::size_t i) {
      scores[i] = RolloutCost(s, candidates[i], models, dt);
    };
    if (opts.threads > 1) {
      ParallelFor(candidates.size(), opts.threads, score);
    } else {
      for (std::size_t i = 0; i < candidates.size(); ++i) score(i);
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b];
    });
    const int k = std::min<int>(opts.elites, static_cast<int>(order.size()));

    Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(H);
    double elite_score = 0.0;
    carried.clear();
    for (int e = 0; e < k; ++e) {
      const auto& c = candidates[order[e]];
      new_mean += Eigen::Map<const Eigen::VectorXd>(c.data(), H);
      elite_score += scores[order[e]];
      carried.push_back(c);
    }
    new_mean /= k;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(H);
    for (const auto& c : carried) {
      var += (Eigen::Map<const Eigen::VectorXd>(c.data(), H) - new_mean)
                 .cwiseAbs2();
    }
    mean = new_mean;
    stddev = (var / k).cwiseSqrt();
    result.elite_cost_trace.push_back(elite_score / k);
  }
  result.plan.resize(H);
  for (int t = 0; t < H; ++t) result.plan[t] = Clamp(mean(t), opts.torque_limit);
  return result;
}

std::vector<PendulumParams> SamplePendulumModels(const PendulumParams& center,
                                                 double radius, int count,
                                                 Rng& rng) {
  center.Validate();
  if (!(radius >= 0.0) || count < 1) {
    throw InvalidArgument("need radius >= 0 and count >= 1");
  }
  std::vector<PendulumParams> out;
  const Eigen::Vector3d c = center.AsVector();
  constexpr int kMaxAttempts = 1000000;
  for (int attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt >= kMaxAttempts) {
      throw InvalidArgument(
          "sampling ball around the estimate has almost no positive part");
    }
    Eigen::Vector3d d = rng.StandardNormal(3);
    while (d.norm() == 0.0) d = rng.StandardNormal(3);
    const double u = std::cbrt(rng.Uniform01());
    const Eigen::Vector3d v = c + radius * u * d.normalized();
    if ((v.array() > 0.0).all()) out.push_back(PendulumParams::FromVector(v));
  }
  return out;
}

EpisodeResult RunEpisode(PlannerKind kind, const PendulumParams& truth,
                         const PendulumParams& estimate, double radius,
                         int length, const CemOptions& opts, const Rng& rng,
                         double dt) {
  truth.Validate();
  opts.Validate();
  if (length < 1) throw InvalidArgument("episode length must be >= 1");
  Rng plan_rng = rng.Split(1);
  Rng noise_rng = rng.Split(2);
  Rng model_rng = rng.Split(3);

  std::vector<PendulumParams> models{estimate};
  if (kind == PlannerKind::kDR) {
    models = SamplePendulumModels(estimate, radius, opts.model_samples, model_rng);
  }

  EpisodeResult ep;
  PendulumState s{0.0, 0.0};
  std::vector<double> warm;
  for (int t = 0; t < length; ++t) {
    const CemResult plan =
        CemPlan(s, models, opts, plan_rng, warm.empty() ? nullptr : &warm, dt);
    const double u = plan.plan.front();
    const double w = noise_rng.Normal();
    s = PendulumStep(s, u + w, truth, dt);
    const double c = StageCost(s, u);
    ep.total_cost += c;
    ep.log.push_back({t, s.psi, s.psi_dot, u, c});
    warm.assign(plan.plan.begin() + 1, plan.plan.end());
    warm.push_back(0.0);
  }
  return ep;
}

void WriteEpisodeCsv(const EpisodeResult& episode, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "t,psi,psi_dot,torque,cost\n";
  for (const EpisodeRow& r : episode.log) {
    out << r.t << ',' << r.psi << ',' << r.psi_dot << ',' << r.torque << ','
        << r.cost << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

void PendulumExperimentConfig::Validate() const {
  truth.Validate();
  cem.Validate();
  if (traj_grid.empty()) throw InvalidArgument("traj_grid: must not be empty");
  for (std::size_t i = 0; i < traj_grid.size(); ++i) {
    if (traj_grid[i] < 1 || (i > 0 && traj_grid[i] <= traj_grid[i - 1])) {
      throw InvalidArgument("traj_grid: must be positive and strictly increasing");
    }
  }
  if (traj_length < 1) throw InvalidArgument("traj_length: must be >= 1");
  if (episode_length < 1) throw InvalidArgument("episode_length: must be >= 1");
  if (seeds < 1) throw InvalidArgument("seeds: must be >= 1");
  if (!(radius_scale >= 0.0)) throw InvalidArgument("radius_scale: must be >= 0");
}

PairedEpisodes RunPendulumTrial(const PendulumExperimentConfig& cfg, int seed,
                                int n_traj) {
  const Rng root(cfg.master_seed);
  const auto s = static_cast<std::uint64_t>(seed);
  const auto n = static_cast<std::uint64_t>(n_traj);
  const PendulumDataset ds =
      CollectPendulumData(cfg.truth, n_traj, cfg.traj_length, root.Split({s, n}));
  PairedEpisodes out;
  out.fit = IdentifyPendulum(ds);
  const Rng episode_rng = root.Split({s, n, 7});
  const double radius = cfg.radius_scale / static_cast<double>(n_traj);
  out.ce = RunEpisode(PlannerKind::kCE, cfg.truth, out.fit.params, radius,
                      cfg.episode_length, cfg.cem, episode_rng);
  out.dr = RunEpisode(PlannerKind::kDR, cfg.truth, out.fit.params, radius,
                      cfg.episode_length, cfg.cem, episode_rng);
  return out;
}

std::vector<PendulumTrial> RunPendulumExperiment(
    const PendulumExperimentConfig& cfg, int threads) {
  cfg.Validate();
  std::vector<PendulumTrial> trials;
  for (int n : cfg.traj_grid) {
    for (int seed = 0; seed < cfg.seeds; ++seed) {
      PendulumTrial t;
      t.seed = seed;
      t.n_traj = n;
      trials.push_back(t);
    }
  }
  ParallelFor(trials.size(), threads, [&](std::size_t i) {
    PendulumTrial& t = trials[i];
    try {
      const PairedEpisodes ep = RunPendulumTrial(cfg, t.seed, t.n_traj);
      t.ce_cost = ep.ce.total_cost;
      t.dr_cost = ep.dr.total_cost;
    } catch (const IdentificationFailed&) {
      t.identified = false;
      t.ce_cost = t.dr_cost = std::nan("");
    }
  });
  return trials;
}

std::vector<PendulumSummaryRow> SummarizePendulum(
    const std::vector<PendulumTrial>& trials) {
  std::vector<int> budgets;
  for (const PendulumTrial& t : trials) budgets.push_back(t.n_traj);
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  std::vector<PendulumSummaryRow> rows;
  for (int n : budgets) {
    std::vector<double> ce, dr;
    for (const PendulumTrial& t : trials) {
      if (t.n_traj != n || !t.identified) continue;
      ce.push_back(t.ce_cost);
      dr.push_back(t.dr_cost);
    }
    PendulumSummaryRow row;
    row.n_traj = n;
    std::tie(row.ce_mean, row.ce_se) = MeanAndStdError(ce);
    std::tie(row.dr_mean, row.dr_se) = MeanAndStdError(dr);
    row.samples = static_cast<int>(ce.size());
    rows.push_back(row);
  }
  return rows;
}

void WritePendulumTrialsCsv(const std::vector<PendulumTrial>& trials,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "seed,n_traj,ce_cost,dr_cost,identified\n";
  for (const PendulumTrial& t : trials) {
    out << t.seed << ',' << t.n_traj << ',' << t.ce_cost << ',' << t.dr_cost
        << ',' << (t.identified ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

void WritePendulumSummaryCsv(const std::vector<PendulumSummaryRow>& rows,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "n_traj,ce_mean,ce_se,dr_mean,dr_se,samples\n";
  for (const PendulumSummaryRow& r : rows) {
    out << r.n_traj << ',' << r.ce_mean << ',' << r.ce_se << ',' << r.dr_mean
        << ',' << r.dr_se << ',' << r.samples << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace drlqr
