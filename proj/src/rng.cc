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

#include "drlqr/rng.h"

namespace drlqr {

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (key + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(MixSeed(seed, 0)) {}

Rng Rng::Split(std::uint64_t key) const {
  return Rng(MixSeed(seed_ ^ 0xd1b54a32d192ed03ULL, key));
}

Rng Rng::Split(std::initializer_list<std::uint64_t> keys) const {
  Rng out = *this;
  for (std::uint64_t k : keys) out = out.Split(k);
  return out;
}

double Rng::Normal() { return normal_(engine_); }

double Rng::Uniform01() {
  boost::random::uniform_01<double> u;
  return u(engine_);
}

Eigen::VectorXd Rng::StandardNormal(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = Normal();
  return v;
}

Eigen::VectorXd Rng::Gaussian(const Eigen::MatrixXd& factor) {
  return factor * StandardNormal(static_cast<int>(factor.cols()));
}

}  // namespace drlqr
