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

// drlqr: identification, controller synthesis, benchmarks and theory reports
// for linear-quadratic control with uncertain models.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.h"
#include "drlqr/errors.h"
#include "run_config.h"

namespace {

using namespace drlqr;
using namespace drlqr::cli;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> method;
  std::optional<int> seeds;
  bool resume = false;
};

void AddCommonFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "INI configuration file");
  cmd->add_option("--seed", f.seed, "master seed (overrides run.seed)");
  cmd->add_option("--out", f.out, "output directory (overrides run.out)");
  cmd->add_option("--threads", f.threads,
                  "worker threads, 0 = hardware concurrency");
}

RunConfig Resolve(const Flags& f, const std::string& command) {
  RunConfig cfg = f.config.empty() ? RunConfig::Defaults() : LoadConfig(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.threads) cfg.threads = *f.threads;
  if (f.method) {
    try {
      cfg.synth.method = ParseMethod(*f.method);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("--method: ") + e.what());
    }
  }
  if (f.seeds) {
    if (command == "pendulum") {
      cfg.pendulum.seeds = *f.seeds;
    } else {
      cfg.bench.seeds = *f.seeds;
    }
  }
  cfg.Validate();
  std::filesystem::create_directories(cfg.out);
  WriteConfig(cfg, (std::filesystem::path(cfg.out) / "effective_config.cfg").string());
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certainty-equivalent, domain-randomized and robust LQR synthesis"};
  app.require_subcommand(1);
  Flags flags;

  CLI::App* identify = app.add_subcommand("identify", "least-squares fit, Fisher estimate and confidence ellipsoid");
  CLI::App* synth = app.add_subcommand("synth", "synthesize a gain with ce, dr or rc");
  CLI::App* bench = app.add_subcommand("bench", "Monte Carlo excess-cost sweep");
  CLI::App* pendulum = app.add_subcommand("pendulum", "pendulum CE vs DR planning experiment");
  CLI::App* theory = app.add_subcommand("theory", "model-task Hessian, leading terms and inequality checks");
  for (CLI::App* cmd : {identify, synth, bench, pendulum, theory}) {
    AddCommonFlags(cmd, flags);
  }
  synth->add_option("--method", flags.method, "ce, dr or rc");
  bench->add_flag("--resume", flags.resume, "reuse rows already in trials.csv");
  bench->add_option("--seeds", flags.seeds, "seeds per cell (overrides bench.seeds)");
  pendulum->add_option("--seeds", flags.seeds, "seeds per budget (overrides pendulum.seeds)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = Resolve(flags, command);
    if (command == "identify") return CmdIdentify(cfg);
    if (command == "synth") return CmdSynth(cfg);
    if (command == "bench") return CmdBench(cfg, flags.resume);
    if (command == "pendulum") return CmdPendulum(cfg);
    return CmdTheory(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const RankDeficient& e) {
    std::fprintf(stderr, "identification failed: %s\n", e.what());
    return kExitRankDeficient;
  } catch (const NotStabilizable& e) {
    std::fprintf(stderr, "no stabilizing solution: %s\n", e.what());
    return kExitNotStabilizing;
  } catch (const AllScenariosUnstable& e) {
    std::fprintf(stderr, "no stabilizing solution: %s\n", e.what());
    return kExitNotStabilizing;
  } catch (const NoStabilizingCandidate& e) {
    std::fprintf(stderr, "no stabilizing solution: %s\n", e.what());
    return kExitNotStabilizing;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
}
