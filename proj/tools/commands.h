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

#include "run_config.h"

namespace drlqr::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRankDeficient = 3;
inline constexpr int kExitNotStabilizing = 4;

int CmdIdentify(const RunConfig& cfg);
int CmdSynth(const RunConfig& cfg);
int CmdBench(const RunConfig& cfg, bool resume);
int CmdPendulum(const RunConfig& cfg);
int CmdTheory(const RunConfig& cfg);

}  // namespace drlqr::cli
