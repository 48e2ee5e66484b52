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

#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "drlqr/bench.h"
#include "drlqr/dataset_io.h"
#include "drlqr/errors.h"
#include "drlqr/lqr.h"
#include "drlqr/pendulum.h"
#include "drlqr/sysid.h"
#include "drlqr/theory.h"
#include "drlqr/thread_pool.h"

namespace drlqr::cli {
namespace {

namespace fs = std::filesystem;

// Keyed sub-streams of the master seed, one per command purpose.
enum StreamKey : std::uint64_t { kDataStream = 1, kSynthStream = 2, kTheoryStream = 3 };

std::string OutPath(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  return (fs::path(cfg.out) / name).string();
}

int Threads(const RunConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : DefaultThreadCount();
}

void WriteMatrixCsv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

void WriteParamsCsv(const SystemParams& theta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(17);
  out << "param,i,j,value\n";
  auto dump = [&](const char* name, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << name << ',' << i << ',' << j << ',' << m(i, j) << '\n';
      }
    }
  };
  dump("A", theta.A);
  dump("B", theta.B);
  if (!out) throw IoError("write failed for " + path);
}

nlohmann::json MatrixJson(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void WriteJson(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

// Simulates per config, or reads the configured dataset file.
Dataset ObtainDataset(const RunConfig& cfg, bool save_copy) {
  if (!cfg.data.dataset.empty()) {
    const fs::path p(cfg.data.dataset);
    return p.extension() == ".bin" ? ReadDatasetBinary(p.string())
                                   : ReadDatasetCsv(p.string());
  }
  const SystemParams theta = cfg.theta_star();
  const Eigen::MatrixXd noise =
      cfg.data.noiseless
          ? Eigen::MatrixXd::Zero(theta.dx(), theta.dx()).eval()
          : cfg.system.noise_cov;
  Dataset ds = CollectDataset(theta, noise, cfg.data.N, cfg.data.T,
                              cfg.system.input_cov,
                              Rng(cfg.seed).Split(kDataStream));
  if (save_copy) WriteDatasetCsv(ds, OutPath(cfg, "dataset.csv"));
  return ds;
}

struct Identified {
  Dataset ds;
  SystemParams theta_hat;
  FisherEstimate fisher;
};

Identified Identify(const RunConfig& cfg, bool save_copy) {
  Identified id;
  id.ds = ObtainDataset(cfg, save_copy);
  id.theta_hat = LeastSquares(id.ds);
  id.fisher = EstimateFisher(id.ds, cfg.cost_model());
  return id;
}

void PrintSynthesisOptions(Method m, const RunConfig& cfg) {
  if (m == Method::kDR) {
    std::printf("dr options: M=%d eta=%g scenarios=%d grad_tol=%g\n",
                cfg.dr.max_iters, cfg.dr.step_size, cfg.dr.n_scenarios,
                cfg.dr.grad_tol);
  } else if (m == Method::kRC) {
    std::printf("rc options: scenarios=%d max_iters=%d step=%g restarts=%d\n",
                cfg.rc.n_scenarios, cfg.rc.max_iters, cfg.rc.step_size,
                cfg.rc.restarts);
  }
}

}  // namespace

int CmdIdentify(const RunConfig& cfg) {
  const Identified id = Identify(cfg, cfg.data.dataset.empty());
  const SystemParams truth = cfg.theta_star();
  const ConfidenceEllipsoid G = BuildConfidenceEllipsoid(
      id.theta_hat, id.fisher, id.ds.size(), cfg.synth.delta);

  WriteParamsCsv(id.theta_hat, OutPath(cfg, "theta_hat.csv"));
  WriteMatrixCsv(id.fisher.matrix, OutPath(cfg, "fisher.csv"));
  nlohmann::json ell;
  ell["dx"] = G.dx();
  ell["du"] = G.du();
  ell["N"] = id.ds.size();
  ell["delta"] = cfg.synth.delta;
  ell["radius2"] = G.radius2();
  ell["center"] = std::vector<double>(G.center().data(),
                                      G.center().data() + G.center().size());
  ell["shape"] = MatrixJson(G.shape());
  ell["contains_truth"] = G.Contains(truth);
  WriteJson(ell, OutPath(cfg, "ellipsoid.json"));

  const double err = (FlattenParams(id.theta_hat) - FlattenParams(truth)).norm();
  std::printf("trajectories N=%d, length T=%d\n", id.ds.size(), id.ds.horizon());
  std::printf("||theta_hat - theta_star|| = %.6e\n", err);
  std::printf("ellipsoid radius^2 = %.6g (delta=%g), contains theta_star: %s\n",
              G.radius2(), cfg.synth.delta,
              G.Contains(truth) ? "yes" : "no");
  return kExitOk;
}

int CmdSynth(const RunConfig& cfg) {
  const Method method = cfg.synth.method;
  const CostModel cm = cfg.cost_model();
  const SystemParams truth = cfg.theta_star();
  const Identified id = Identify(cfg, false);
  const SystemParams model =
      cfg.synth.model == "truth" ? truth : id.theta_hat;

  PrintSynthesisOptions(method, cfg);
  SynthesisReport report;
  if (method == Method::kCE) {
    report.gain = SynthesizeCertaintyEquivalent(model, cm);
    report.objective = LqrCost(report.gain, model, cm);
    report.converged = true;
  } else {
    const ConfidenceEllipsoid G = BuildConfidenceEllipsoid(
        model, id.fisher, id.ds.size(), cfg.synth.delta);
    Rng rng = Rng(cfg.seed).Split(kSynthStream);
    report = method == Method::kDR
                 ? SynthesizeDomainRandomized(G, cm, cfg.dr, rng)
                 : SynthesizeRobust(G, cm, cfg.rc, rng);
  }
  WriteMatrixCsv(report.gain, OutPath(cfg, "gain.csv"));
  WriteReportCsv(report, OutPath(cfg, "synthesis_report.csv"));

  const Cost excess = ExcessCost(report.gain, truth, cm);
  std::printf("method %s: objective %s, converged %s\n",
              MethodName(method).c_str(),
              report.objective.is_finite()
                  ? std::to_string(report.objective.value()).c_str()
                  : "inf",
              report.converged ? "yes" : "no");
  std::printf("closed-loop spectral radius on theta_star: %.6f\n",
              SpectralRadius(ClosedLoop(truth, report.gain)));
  if (excess.is_finite()) {
    std::printf("excess cost on theta_star: %.6e\n", excess.value());
  } else {
    std::printf("excess cost on theta_star: inf\n");
  }
  if (report.objective.is_infinite()) {
    std::fprintf(stderr,
                 "no gain stabilizing every scenario was found; the gain "
                 "written is the best partial one\n");
    return kExitNotStabilizing;
  }
  return kExitOk;
}

int CmdBench(const RunConfig& cfg, bool resume) {
  const SweepConfig sweep = cfg.sweep();
  const std::string trials_path = OutPath(cfg, "trials.csv");

  std::vector<TrialResult> existing;
  if (resume && fs::exists(trials_path)) {
    existing = ReadTrialsCsv(trials_path);
    std::fprintf(stderr, "resuming: %zu trials already present\n",
                 existing.size());
  }
  // Completed trials are appended as they finish so that an interrupted
  // sweep can be resumed.
  {
    std::vector<TrialResult> sorted = existing;
    SortTrials(sorted);
    WriteTrialsCsv(sorted, trials_path);
  }
  std::ofstream append(trials_path, std::ios::app);
  append.precision(17);

  SweepOptions opts;
  opts.threads = Threads(cfg);
  opts.existing = resume ? &existing : nullptr;
  std::size_t last_percent = 101;
  opts.progress = [&](std::size_t done, std::size_t total) {
    const std::size_t percent = 100 * done / total;
    if (percent != last_percent) {
      last_percent = percent;
      std::fprintf(stderr, "\r[%zu/%zu] %zu%%", done, total, percent);
      if (done == total) std::fprintf(stderr, "\n");
    }
  };
  opts.on_trial = [&](const TrialResult& t) {
    append << t.seed << ',' << t.N << ',' << MethodName(t.method) << ',';
    if (t.excess_cost.is_finite()) {
      append << t.excess_cost.value();
    } else {
      append << "inf";
    }
    append << ',' << (t.stable ? 1 : 0) << ',' << t.wall_time << '\n';
    append.flush();
  };
  const std::vector<TrialResult> table = RunSweep(sweep, opts);
  append.close();

  WriteTrialsCsv(table, trials_path);
  const std::vector<SummaryRow> summary = Summarize(table);
  WriteSummaryCsv(summary, OutPath(cfg, "summary.csv"));
  EmitPlot(summary, OutPath(cfg, "fig2.svg"));

  std::printf("%8s %4s %14s %14s %14s %9s\n", "N", "meth", "median", "q25",
              "q75", "unstable");
  for (const SummaryRow& r : summary) {
    auto fmt = [](const Cost& c) {
      char buf[32];
      if (c.is_infinite()) return std::string("inf");
      std::snprintf(buf, sizeof buf, "%.4e", c.value());
      return std::string(buf);
    };
    std::printf("%8d %4s %14s %14s %14s %9.2f\n", r.N,
                MethodName(r.method).c_str(), fmt(r.median).c_str(),
                fmt(r.q25).c_str(), fmt(r.q75).c_str(), r.unstable_fraction);
  }
  return kExitOk;
}

int CmdPendulum(const RunConfig& cfg) {
  PendulumExperimentConfig pc = cfg.pendulum;
  pc.master_seed = cfg.seed;
  const std::vector<PendulumTrial> trials =
      RunPendulumExperiment(pc, Threads(cfg));
  const std::vector<PendulumSummaryRow> rows = SummarizePendulum(trials);
  WritePendulumTrialsCsv(trials, OutPath(cfg, "pendulum_trials.csv"));
  WritePendulumSummaryCsv(rows, OutPath(cfg, "pendulum_summary.csv"));

  // Episode logs for the first seed at the smallest budget.
  try {
    const PairedEpisodes ep = RunPendulumTrial(pc, 0, pc.traj_grid.front());
    WriteEpisodeCsv(ep.ce, OutPath(cfg, "episode_ce.csv"));
    WriteEpisodeCsv(ep.dr, OutPath(cfg, "episode_dr.csv"));
  } catch (const IdentificationFailed& e) {
    std::fprintf(stderr, "episode log skipped: %s\n", e.what());
  }

  std::printf("%8s %12s %10s %12s %10s %8s\n", "n_traj", "ce_mean", "ce_se",
              "dr_mean", "dr_se", "samples");
  for (const PendulumSummaryRow& r : rows) {
    std::printf("%8d %12.4f %10.4f %12.4f %10.4f %8d\n", r.n_traj, r.ce_mean,
                r.ce_se, r.dr_mean, r.dr_se, r.samples);
  }
  return kExitOk;
}

int CmdTheory(const RunConfig& cfg) {
  const SystemParams theta = cfg.theta_star();
  const CostModel cm = cfg.cost_model();
  const Rng root = Rng(cfg.seed).Split(kTheoryStream);

  const ModelTaskHessian analytic = ModelTaskHessianAnalytic(theta, cm);
  const ModelTaskHessian fd =
      ModelTaskHessianFiniteDifference(theta, cm, cfg.theory.fd_rel_step);
  const double deviation =
      (analytic.H - fd.H).norm() / std::max(analytic.H.norm(), 1e-300);
  WriteMatrixCsv(analytic.H, OutPath(cfg, "hessian.csv"));
  WriteMatrixCsv(fd.H, OutPath(cfg, "hessian_fd.csv"));
  std::printf("model-task Hessian: dim %ld, ||H||_F = %.6e\n",
              static_cast<long>(analytic.H.rows()), analytic.H.norm());
  std::printf("analytic vs finite-difference relative Frobenius deviation: "
              "%.3e\n",
              deviation);

  const PopulationFisher pf = EstimatePopulationFisher(
      theta, cm.noise_cov(), cfg.data.T, cfg.system.input_cov,
      cfg.theory.fisher_trajectories, root.Split(1));
  WriteMatrixCsv(pf.fisher.matrix, OutPath(cfg, "fisher_population.csv"));

  {
    const std::string path = OutPath(cfg, "leading_terms.csv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(17);
    out << "N,ce_dr_term,rc_term,trace_le_dtheta_opnorm\n";
    bool ordered = true;
    for (int N : cfg.bench.n_grid) {
      const LeadingTerms lt = ComputeLeadingTerms(analytic.H, pf.fisher.matrix, N);
      const bool ok = lt.ce_dr_term <= lt.rc_term * (1.0 + 1e-12);
      ordered = ordered && ok;
      out << N << ',' << lt.ce_dr_term << ',' << lt.rc_term << ','
          << (ok ? 1 : 0) << '\n';
    }
    const LeadingTerms unit = ComputeLeadingTerms(analytic.H, pf.fisher.matrix, 1);
    std::printf("leading terms x N: CE/DR trace(H FI^-1) = %.6e, "
                "RC d_theta ||H FI^-1|| = %.6e (T=%d, %d trajectories)\n",
                unit.ce_dr_term, unit.rc_term, cfg.data.T, pf.samples);
    std::printf("trace <= d_theta * opnorm on every N: %s\n",
                ordered ? "true" : "false");
  }

  // Inequality suite on random instances with Q = R = noise = I.
  InequalityReport all;
  int failing_instances = 0;
  Rng inst_rng = root.Split(2);
  InequalitySuiteOptions opts;
  opts.perturbations = cfg.theory.perturbations;
  for (int k = 0; k < cfg.theory.instances; ++k) {
    const int dx = 1 + static_cast<int>(inst_rng.Uniform01() * cfg.theory.max_dim);
    const int du = 1 + static_cast<int>(inst_rng.Uniform01() * cfg.theory.max_dim);
    const SystemParams inst = RandomStabilizableSystem(dx, du, inst_rng);
    InequalityReport r =
        RunInequalitySuite(inst, CostModel::Identity(dx, du), inst_rng, opts);
    if (!r.AllPass()) ++failing_instances;
    for (InequalityCheck& c : r.checks) {
      c.name = "instance" + std::to_string(k) + "/" + c.name;
      all.checks.push_back(std::move(c));
    }
  }
  WriteInequalityCsv(all, OutPath(cfg, "inequalities.csv"));
  std::size_t passed = 0;
  for (const InequalityCheck& c : all.checks) passed += c.pass ? 1 : 0;
  std::printf("inequality suite: %zu/%zu checks pass over %d instances "
              "(%d instances with a failing check)\n",
              passed, all.checks.size(), cfg.theory.instances,
              failing_instances);
  return kExitOk;
}

}  // namespace drlqr::cli
