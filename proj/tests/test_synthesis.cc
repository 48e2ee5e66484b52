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


#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <gtest/gtest.h>

#include "drlqr/errors.h"
#include "drlqr/lqr.h"
#include "drlqr/synthesis.h"
#include "drlqr/sysid.h"
#include "test_util.h"

namespace drlqr {
namespace {

using testing::PaperCost;
using testing::PaperSystem;
using testing::Scalar;
using testing::ScalarCost;

Gain ScalarGain(double k) { return Eigen::MatrixXd::Constant(1, 1, k); }

std::vector<SystemParams> ScalarGrid(double lo, double hi, int n) {
  std::vector<SystemParams> out;
  for (int j = 0; j < n; ++j) {
    out.push_back(Scalar(lo + (hi - lo) * j / (n - 1), 1.0));
  }
  return out;
}

TEST(CertaintyEquivalence, ExactModelHasNoExcess) {
  const Gain K = SynthesizeCertaintyEquivalent(PaperSystem(), PaperCost());
  EXPECT_LE(ExcessCost(K, PaperSystem(), PaperCost()).value(), 1e-8);
  EXPECT_LT(SpectralRadius(ClosedLoop(PaperSystem(), K)), 1.0);
}

TEST(CertaintyEquivalence, ScalarEstimateFailsOnTruth) {
  const Gain K =
      SynthesizeCertaintyEquivalent(Scalar(1.01, 1), ScalarCost(1, 1000));
  EXPECT_NEAR(K(0, 0), -0.0424, 5e-4);
  EXPECT_GT(SpectralRadius(ClosedLoop(Scalar(1.05, 1), K)), 1.0);
}

TEST(DrObjective, Examples) {
  const CostModel cm = PaperCost();
  const Gain K = SolveDare(PaperSystem(), cm).K;
  EXPECT_EQ(DrObjective(K, {PaperSystem()}, cm), LqrCost(K, PaperSystem(), cm));
  const SystemParams doubled(PaperSystem().A * 2.0, PaperSystem().B);
  EXPECT_TRUE(DrObjective(K, {PaperSystem(), doubled}, cm).is_infinite());
  EXPECT_THROW(DrObjective(K, {}, cm), InvalidArgument);
}

TEST(DomainRandomized, DegenerateEllipsoidKeepsCertaintyEquivalentGain) {
  const CostModel cm = PaperCost();
  const ConfidenceEllipsoid G(FlattenParams(PaperSystem()),
                              Eigen::MatrixXd::Identity(18, 18), 0.0, 3, 3);
  Rng rng(1);
  const SynthesisReport rep = SynthesizeDomainRandomized(G, cm, DrOptions{}, rng);
  EXPECT_LT((rep.gain - SolveDare(PaperSystem(), cm).K).norm(), 1e-4);
}

TEST(DomainRandomized, ScalarMatchesGridOracle) {
  const CostModel cm = ScalarCost(1, 1000);
  const std::vector<SystemParams> scenarios = ScalarGrid(1.0, 1.2, 21);
  auto avg = [&](double k) {
    const Cost c = DrObjective(ScalarGain(k), scenarios, cm);
    return c.is_finite() ? c.value() : 1e300;
  };
  // Grid over [-1, 0], then golden-section refinement around the best point.
  double best_k = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double k = -1.0 + i * 1e-3;
    if (avg(k) < avg(best_k)) best_k = k;
  }
  const auto refined = boost::math::tools::brent_find_minima(
      avg, best_k - 2e-3, best_k + 2e-3, 40);
  const double k_oracle = refined.first;

  DrOptions opts;
  opts.step_size = 1e-5;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-9;
  const SynthesisReport rep = SynthesizeDomainRandomized(
      scenarios, SolveDare(Scalar(1.1, 1), cm).K, cm, opts);
  EXPECT_NEAR(rep.gain(0, 0), k_oracle, 1e-3);
}

TEST(DomainRandomized, NeverWorseThanStabilizingInit) {
  Rng rng(2);
  const CostModel cm = PaperCost();
  const ConfidenceEllipsoid G = BuildConfidenceEllipsoid(
      PaperSystem(), FisherEstimate{Eigen::MatrixXd::Identity(18, 18) * 20.0},
      20000, 0.1);
  const std::vector<SystemParams> scenarios = SampleUniform(G, 30, rng);
  const Gain init = SolveDare(PaperSystem(), cm).K;
  DrOptions opts;
  opts.max_iters = 2000;
  const SynthesisReport rep =
      SynthesizeDomainRandomized(scenarios, init, cm, opts);
  const Cost start = DrObjective(init, scenarios, cm);
  ASSERT_TRUE(start.is_finite());
  EXPECT_LE(DrObjective(rep.gain, scenarios, cm), start);
  EXPECT_EQ(rep.objective, DrObjective(rep.gain, scenarios, cm));
}

TEST(DomainRandomized, SingleScenarioConvergesToCertaintyEquivalence) {
  const CostModel cm = CostModel::Identity(3, 3);
  const Gain init = -0.5 * Gain::Identity(3, 3);
  DrOptions opts;
  opts.step_size = 0.05;
  opts.grad_tol = 1e-10;
  const SynthesisReport rep =
      SynthesizeDomainRandomized({PaperSystem()}, init, cm, opts);
  EXPECT_LT((rep.gain - SolveDare(PaperSystem(), cm).K).norm(), 1e-4);
}

TEST(DomainRandomized, NoStabilizedScenarioThrows) {
  const std::vector<SystemParams> scenarios{Scalar(1.5, 1.0), Scalar(1.5, -1.0)};
  EXPECT_THROW(SynthesizeDomainRandomized(scenarios, ScalarGain(0.0),
                                          ScalarCost(1, 1), DrOptions{}),
               AllScenariosUnstable);
}

TEST(RcObjective, SingletonIsMinimizedByOwnGain) {
  const CostModel cm = PaperCost();
  const Gain K = SolveDare(PaperSystem(), cm).K;
  EXPECT_LE(RcObjective(K, {PaperSystem()}, cm).value(), 1e-8);
  EXPECT_GT(RcObjective(K * 1.1, {PaperSystem()}, cm).value(), 0.0);
}

TEST(RcObjective, WorstCaseDominatesMeanExcess) {
  Rng rng(3);
  const CostModel cm = PaperCost();
  const ConfidenceEllipsoid G = BuildConfidenceEllipsoid(
      PaperSystem(), FisherEstimate{Eigen::MatrixXd::Identity(18, 18) * 20.0},
      20000, 0.1);
  const std::vector<SystemParams> scenarios = SampleUniform(G, 20, rng);
  const Gain K = SolveDare(PaperSystem(), cm).K;
  double mean_excess = 0.0;
  for (const SystemParams& s : scenarios) {
    mean_excess += ExcessCost(K, s, cm).value() / scenarios.size();
  }
  double offsets = 0.0;
  for (const SystemParams& s : scenarios) {
    offsets += LqrCost(SolveDare(s, cm).K, s, cm).value() / scenarios.size();
  }
  EXPECT_GE(RcObjective(K, scenarios, cm).value(), mean_excess);
  EXPECT_NEAR(DrObjective(K, scenarios, cm).value() - offsets, mean_excess,
              1e-9 * DrObjective(K, scenarios, cm).value());
}

TEST(Robust, SingletonReturnsOwnGain) {
  const CostModel cm = PaperCost();
  const SynthesisReport rep =
      SynthesizeRobust({PaperSystem()}, PaperSystem(), cm, RcOptions{});
  EXPECT_LT((rep.gain - SolveDare(PaperSystem(), cm).K).norm(), 1e-4);
}

TEST(Robust, ScalarIntervalIsStabilized) {
  const CostModel cm = ScalarCost(1, 1000);
  const std::vector<SystemParams> scenarios = ScalarGrid(0.3, 1.8, 16);
  const SynthesisReport rep =
      SynthesizeRobust(scenarios, Scalar(1.05, 1), cm, RcOptions{});
  double worst = 0.0;
  for (const SystemParams& s : scenarios) {
    worst = std::max(worst, std::abs(s.A(0, 0) + rep.gain(0, 0)));
  }
  EXPECT_LT(worst, 1.0);
}

TEST(Robust, NeverWorseThanBestCandidate) {
  Rng rng(4);
  const CostModel cm = PaperCost();
  const ConfidenceEllipsoid G = BuildConfidenceEllipsoid(
      PaperSystem(), FisherEstimate{Eigen::MatrixXd::Identity(18, 18) * 20.0},
      200, 0.1);
  const std::vector<SystemParams> scenarios = SampleUniform(G, 15, rng);
  RcOptions opts;
  opts.max_iters = 300;
  opts.restarts = 3;
  const SynthesisReport rep =
      SynthesizeRobust(scenarios, PaperSystem(), cm, opts);
  Cost best = RcObjective(SolveDare(PaperSystem(), cm).K, scenarios, cm);
  for (const SystemParams& s : scenarios) {
    best = std::min(best, RcObjective(SolveDare(s, cm).K, scenarios, cm),
                    [](const Cost& a, const Cost& b) { return a < b; });
  }
  ASSERT_TRUE(rep.objective.is_finite());
  EXPECT_LE(rep.objective, best);
  for (const SystemParams& s : scenarios) {
    EXPECT_TRUE(IsSchurStable(ClosedLoop(s, rep.gain)));
  }
}

TEST(Robust, NoCommonStabilizerThrows) {
  const std::vector<SystemParams> scenarios{Scalar(1.5, 1.0), Scalar(1.5, -1.0)};
  EXPECT_THROW(SynthesizeRobust(scenarios, Scalar(1.5, 1.0), ScalarCost(1, 1),
                                RcOptions{}),
               NoStabilizingCandidate);
}

TEST(Options, InvalidValuesAreRejected) {
  DrOptions dr;
  dr.step_size = 0.0;
  EXPECT_THROW(dr.Validate(), InvalidArgument);
  RcOptions rc;
  rc.n_scenarios = 0;
  EXPECT_THROW(rc.Validate(), InvalidArgument);
}

}  // namespace
}  // namespace drlqr
