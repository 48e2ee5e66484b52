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

#include "drlqr/sysid.h"

namespace drlqr {

// CSV layout: header "traj,t,x_0,...,x_{dx-1},u_0,...,u_{du-1}", one row per
// stored state. t runs 0..T; the final row of each trajectory has empty input
// fields because X_{T+1} has no paired input.
void WriteDatasetCsv(const Dataset& ds, const std::string& path);
Dataset ReadDatasetCsv(const std::string& path);

// Binary container, little-endian:
//   bytes 0-7   magic "DRLQRDS\0"
//   bytes 8-11  uint32 format version (1)
//   bytes 12-15 uint32 reserved (0)
//   uint32 N, T, dx, du; uint64 seed
//   du*du float64 input covariance (column-major)
//   per trajectory: (T+1)*dx float64 states then T*du float64 inputs, both
//   column-major.
inline constexpr char kDatasetMagic[8] = {'D', 'R', 'L', 'Q',
                                          'R', 'D', 'S', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;

void WriteDatasetBinary(const Dataset& ds, const std::string& path);
Dataset ReadDatasetBinary(const std::string& path);

}  // namespace drlqr
