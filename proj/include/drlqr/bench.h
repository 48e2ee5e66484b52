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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drlqr/synthesis.h"
#include "drlqr/types.h"

namespace drlqr {

enum class Method { kCE, kDR, kRC };

// "ce", "dr", "rc".
std::string MethodName(Method m);
// Case-insensitive inverse of MethodName; throws InvalidArgument.
Method ParseMethod(const std::string& name);

struct SweepConfig {
  SystemParams theta_star;
  CostModel cm = CostModel::Identity(1, 1);
  std::vector<int> n_grid;
  int T = 10;
  Eigen::MatrixXd input_cov;
  double delta = 0.1;
  std::vector<Method> methods{Method::kCE, Method::kDR, Method::kRC};
  int seeds = 100;
  std::uint64_t master_seed = 0;
  // Identification data is collected without process noise when set; the
  // cost model keeps its noise covariance for evaluation.
  bool noiseless = false;
  DrOptions dr;
  RcOptions rc;

  // Throws InvalidArgument naming the offending field.
  void Validate() const;
};

struct TrialResult {
  int seed = 0;
  int N = 0;
  Method method = Method::kCE;
  Cost excess_cost;
  bool stable = true;
  // Seconds; the only field that is not a function of the configuration.
  double wall_time = 0.0;
};

// Equality ignoring wall_time.
bool SameOutcome(const TrialResult& a, const TrialResult& b);

// The dataset for (seed, N) is drawn from Rng(master_seed).Split({seed, N})
// and shared by every method; scenario sampling uses a further split keyed by
// the method. Identification or synthesis failures yield an unstable trial.
TrialResult RunTrial(const SweepConfig& cfg, int seed, int N, Method method);

struct SweepOptions {
  int threads = 1;
  // Trials already present here (matched on seed, N, method) are reused.
  const std::vector<TrialResult>* existing = nullptr;
  // Called after each finished trial with (done, total). May be invoked from
  // worker threads, serialized by the harness.
  std::function<void(std::size_t, std::size_t)> progress;
  // Called with each freshly computed trial, serialized like `progress`.
  std::function<void(const TrialResult&)> on_trial;
};

// Every (N, method, seed) in the grid, sorted by N, then method, then seed.
std::vector<TrialResult> RunSweep(const SweepConfig& cfg,
                                  const SweepOptions& opts = {});

void SortTrials(std::vector<TrialResult>& table);

struct SummaryRow {
  int N = 0;
  Method method = Method::kCE;
  Cost median;
  Cost q25;
  Cost q75;
  double unstable_fraction = 0.0;
};

// Nearest-rank quantile of values sorted with Infinite last: the element at
// rank ceil(p * n), 1-based, clamped to [1, n]. Throws InvalidArgument on an
// empty input.
Cost NearestRankQuantile(std::vector<Cost> values, double p);

// One row per (N, method) cell in the table, ordered like the trials.
std::vector<SummaryRow> Summarize(const std::vector<TrialResult>& table);

// Throws InvalidArgument naming the cell when no trial matches.
SummaryRow SummarizeCell(const std::vector<TrialResult>& table, int N,
                         Method method);

void WriteTrialsCsv(const std::vector<TrialResult>& table,
                    const std::string& path);
std::vector<TrialResult> ReadTrialsCsv(const std::string& path);
void WriteSummaryCsv(const std::vector<SummaryRow>& summary,
                     const std::string& path);
std::vector<SummaryRow> ReadSummaryCsv(const std::string& path);

// Log-log SVG chart: median excess cost against N per method with a shaded
// interquartile band. Infinite quantiles are left out of the drawn series.
void EmitPlot(const std::vector<SummaryRow>& summary, const std::string& path,
              const std::string& title = "Excess cost vs number of trajectories");

}  // namespace drlqr
