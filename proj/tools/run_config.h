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
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drlqr/bench.h"
#include "drlqr/pendulum.h"
#include "drlqr/synthesis.h"

namespace drlqr::cli {

// Invalid or unknown configuration entry; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemSection {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd noise_cov;
  Eigen::MatrixXd input_cov;
};

struct DataSection {
  int N = 400;
  int T = 10;
  // Simulate without process noise (the cost model keeps noise_cov).
  bool noiseless = false;
  // Optional dataset file (.csv or .bin) used instead of simulation.
  std::string dataset;
};

struct SynthSection {
  Method method = Method::kCE;
  double delta = 0.1;
  // "estimate": identify from data; "truth": use the true parameters as the
  // model (the confidence shape still comes from the data).
  std::string model = "estimate";
};

struct BenchSection {
  std::vector<int> n_grid{20, 100, 500, 2500, 15000, 100000};
  int seeds = 100;
  double delta = 0.1;
  std::vector<Method> methods{Method::kCE, Method::kDR, Method::kRC};
};

struct TheorySection {
  int fisher_trajectories = 20000;
  double fd_rel_step = 1e-4;
  // Random instances (Q = R = noise = I) for the inequality suite.
  int instances = 20;
  int max_dim = 4;
  int perturbations = 4;
};

struct RunConfig {
  SystemSection system;
  DataSection data;
  SynthSection synth;
  BenchSection bench;
  DrOptions dr;
  RcOptions rc;
  PendulumExperimentConfig pendulum;
  TheorySection theory;
  std::uint64_t seed = 0;
  std::string out = "out";
  int threads = 0;  // 0: hardware concurrency

  // Paper 3-state system and every other default.
  static RunConfig Defaults();

  SystemParams theta_star() const;
  CostModel cost_model() const;
  SweepConfig sweep() const;
  // Throws ConfigError naming the offending field.
  void Validate() const;
};

// Parses an INI file over the defaults. Unknown sections or keys, malformed
// values and failed validation throw ConfigError.
RunConfig LoadConfig(const std::string& path);

// Writes every setting with defaults resolved; loading the file back yields
// an identical RunConfig.
void WriteConfig(const RunConfig& cfg, const std::string& path);

// Matrix syntax: rows separated by ';', entries by spaces or commas, or
// "eye(n)" optionally scaled as "c*eye(n)". Throws std::invalid_argument;
// LoadConfig rethrows it as ConfigError naming the key.
Eigen::MatrixXd ParseMatrix(const std::string& text);
std::string FormatMatrix(const Eigen::MatrixXd& m);

}  // namespace drlqr::cli
