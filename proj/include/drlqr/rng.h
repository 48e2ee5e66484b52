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
#include <initializer_list>

#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace drlqr {

// SplitMix64-style mixing of a seed with a key.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t key);

// Seeded random stream. Child streams are derived from the seed and a key
// only (never from the current engine state), so Split(k) is the same no
// matter how many draws the parent has made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng Split(std::uint64_t key) const;
  Rng Split(std::initializer_list<std::uint64_t> keys) const;

  std::uint64_t seed() const { return seed_; }

  double Normal();
  double Uniform01();
  Eigen::VectorXd StandardNormal(int n);
  // Sample N(0, L L^T) given a factor L.
  Eigen::VectorXd Gaussian(const Eigen::MatrixXd& factor);

 private:
  std::uint64_t seed_;
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace drlqr
