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

#include <gtest/gtest.h>

#include "drlqr/errors.h"
#include "drlqr/sysid.h"
#include "drlqr/theory.h"
#include "test_util.h"

namespace drlqr {
namespace {

using testing::PaperSystem;

const Eigen::MatrixXd kI3 = Eigen::MatrixXd::Identity(3, 3);

TEST(Simulate, ZeroExcitationStaysAtOrigin) {
  Rng rng(1);
  const Trajectory tr = Simulate(PaperSystem(), Eigen::MatrixXd::Zero(3, 3), 8,
                                 Eigen::MatrixXd::Zero(3, 3), rng);
  EXPECT_EQ(tr.states.rows(), 9);
  EXPECT_EQ(tr.inputs.rows(), 8);
  EXPECT_EQ(tr.states.norm(), 0.0);
}

TEST(Simulate, FixedSeedIsBitIdentical) {
  Rng r1(42), r2(42);
  const Trajectory a = Simulate(PaperSystem(), kI3, 10, kI3, r1);
  const Trajectory b = Simulate(PaperSystem(), kI3, 10, kI3, r2);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.states.row(0).norm(), 0.0);
}

TEST(Simulate, ScalarStationaryMoment) {
  const SystemParams th = testing::Scalar(0.5, 1.0);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const Rng root(7);
  double sum = 0.0;
  int count = 0;
  for (int n = 0; n < 10000; ++n) {
    Rng rng = root.Split(n);
    const Trajectory tr = Simulate(th, one, 40, one, rng);
    for (int t = 20; t <= 40; ++t) {
      sum += tr.states(t, 0) * tr.states(t, 0);
      ++count;
    }
  }
  EXPECT_NEAR(sum / count, 8.0 / 3.0, 0.05 * 8.0 / 3.0);
}

TEST(CollectDataset, SingleTrajectoryMatchesSimulate) {
  const Rng root(3);
  const Dataset ds = CollectDataset(PaperSystem(), kI3, 1, 6, kI3, root);
  Rng rng = root.Split(0);
  const Trajectory tr = Simulate(PaperSystem(), kI3, 6, kI3, rng);
  EXPECT_EQ(ds.trajectories[0].states, tr.states);
  EXPECT_EQ(ds.trajectories[0].inputs, tr.inputs);
}

TEST(CollectDataset, TrajectoriesDiffer) {
  const Dataset ds = CollectDataset(PaperSystem(), kI3, 5, 4, kI3, Rng(9));
  ASSERT_EQ(ds.size(), 5);
  for (int n = 1; n < ds.size(); ++n) {
    EXPECT_NE(ds.trajectories[n].states.row(1),
              ds.trajectories[0].states.row(1));
  }
}

TEST(LeastSquares, NoiselessRecoveryIsExact) {
  const SystemParams th = PaperSystem();
  const Dataset ds =
      CollectDataset(th, Eigen::MatrixXd::Zero(3, 3), 4, 10, kI3, Rng(5));
  const SystemParams est = LeastSquares(ds);
  EXPECT_LE((FlattenParams(est) - FlattenParams(th)).norm(), 1e-8);
}

TEST(LeastSquares, ResidualIsOrthogonalToRegressors) {
  const Dataset ds = CollectDataset(PaperSystem(), kI3, 20, 10, kI3, Rng(6));
  const SystemParams est = LeastSquares(ds);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(3, 6);
  double scale = 0.0;
  for (const Trajectory& tr : ds.trajectories) {
    for (int t = 0; t < tr.length(); ++t) {
      Eigen::VectorXd z(6);
      z << tr.states.row(t).transpose(), tr.inputs.row(t).transpose();
      const Eigen::VectorXd r =
          tr.states.row(t + 1).transpose() - est.Stacked() * z;
      cross += r * z.transpose();
      scale += r.norm() * z.norm();
    }
  }
  EXPECT_LE(cross.norm(), 1e-8 * scale);
}

TEST(LeastSquares, TooFewSamplesIsRankDeficient) {
  const Dataset ds = CollectDataset(PaperSystem(), kI3, 1, 3, kI3, Rng(1));
  try {
    LeastSquares(ds);
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.required(), 6);
    EXPECT_LT(e.rank(), 6);
  }
}

TEST(LeastSquares, ErrorShrinksWithData) {
  auto median_error = [](int N) {
    std::vector<double> errs;
    for (int s = 0; s < 50; ++s) {
      const Dataset ds =
          CollectDataset(PaperSystem(), kI3, N, 10, kI3, Rng(1000 + s));
      errs.push_back(
          (FlattenParams(LeastSquares(ds)) - FlattenParams(PaperSystem()))
              .norm());
    }
    std::nth_element(errs.begin(), errs.begin() + 25, errs.end());
    return errs[25];
  };
  EXPECT_LT(median_error(400), median_error(100));
}

TEST(LeastSquares, EquivariantUnderInputPermutation) {
  Dataset ds = CollectDataset(PaperSystem(), kI3, 10, 10, kI3, Rng(8));
  const SystemParams est = LeastSquares(ds);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  for (Trajectory& tr : ds.trajectories) tr.inputs = tr.inputs * perm;
  const SystemParams permuted = LeastSquares(ds);
  EXPECT_LT((permuted.B - est.B * perm).norm(), 1e-10);
  EXPECT_LT((permuted.A - est.A).norm(), 1e-10);
}

TEST(Fisher, SingleStepExpansion) {
  Dataset ds;
  ds.dx = 2;
  ds.du = 1;
  ds.input_cov = Eigen::MatrixXd::Ones(1, 1);
  Trajectory tr;
  tr.states = Eigen::MatrixXd::Zero(2, 2);
  tr.states.row(1) << 0.3, -0.2;
  tr.inputs = Eigen::MatrixXd::Constant(1, 1, 1.5);
  ds.trajectories.push_back(tr);
  Eigen::VectorXd z(3);
  z << 0, 0, 1.5;
  const Eigen::MatrixXd expected =
      Kron(z * z.transpose(), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LT((EstimateFisher(ds, Eigen::MatrixXd::Identity(2, 2)).matrix -
             expected)
                .norm(),
            1e-15);
}

TEST(Fisher, IdentityNoiseGivesKroneckerWithIdentity) {
  const Dataset ds = CollectDataset(PaperSystem(), kI3, 7, 5, kI3, Rng(2));
  const Eigen::MatrixXd gram = Symmetrize(RegressorGram(ds) / ds.size());
  EXPECT_EQ(EstimateFisher(ds, kI3).matrix, Kron(gram, kI3));
}

TEST(Fisher, InvariantToTrajectoryOrder) {
  Dataset ds = CollectDataset(PaperSystem(), kI3, 9, 5, kI3, Rng(3));
  const Eigen::MatrixXd before = EstimateFisher(ds, kI3).matrix;
  std::reverse(ds.trajectories.begin(), ds.trajectories.end());
  EXPECT_LT((EstimateFisher(ds, kI3).matrix - before).norm(),
            1e-12 * before.norm());
}

TEST(Fisher, LongRunAverageMatchesPopulation) {
  const PopulationFisher pop =
      EstimatePopulationFisher(PaperSystem(), kI3, 10, kI3, 100000, Rng(21));
  const Dataset ds = CollectDataset(PaperSystem(), kI3, 100000, 10, kI3, Rng(22));
  const Eigen::MatrixXd fi = EstimateFisher(ds, kI3).matrix;
  EXPECT_LT(OpNorm(fi - pop.fisher.matrix), 0.02 * OpNorm(pop.fisher.matrix));
}

TEST(Ellipsoid, RadiusFormula) {
  EXPECT_NEAR(EllipsoidRadius2(2, 2.0 / std::exp(1.0)), 48.0, 1e-12);
  EXPECT_GT(EllipsoidRadius2(18, 0.05), EllipsoidRadius2(18, 0.1));
  EXPECT_THROW(EllipsoidRadius2(18, 0.0), InvalidDelta);
  EXPECT_THROW(EllipsoidRadius2(18, 1.0), InvalidDelta);
}

TEST(Ellipsoid, MembershipAndBoundary) {
  Rng rng(4);
  const Eigen::MatrixXd fi = testing::RandomSpd(6, rng);
  const SystemParams center(testing::RandomMatrix(2, 2, rng),
                            testing::RandomMatrix(2, 1, rng));
  const ConfidenceEllipsoid G =
      BuildConfidenceEllipsoid(center, FisherEstimate{fi}, 50, 0.1);
  EXPECT_LT((G.shape() - 50.0 * fi).norm(), 1e-12 * G.shape().norm());
  EXPECT_TRUE(G.Contains(center));
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd w = rng.StandardNormal(6);
    w.normalize();
    const double m2 = G.Mahalanobis2(G.center() + G.gamma() * w);
    EXPECT_NEAR(m2, G.radius2(), 1e-10 * G.radius2());
  }
  const ConfidenceEllipsoid larger_n =
      BuildConfidenceEllipsoid(center, FisherEstimate{fi}, 500, 0.1);
  EXPECT_GT(larger_n.shape().determinant(), G.shape().determinant());
}

TEST(Ellipsoid, SingularFisherThrows) {
  const SystemParams center(Eigen::MatrixXd::Zero(1, 1),
                            Eigen::MatrixXd::Zero(1, 1));
  EXPECT_THROW(BuildConfidenceEllipsoid(
                   center, FisherEstimate{Eigen::MatrixXd::Zero(2, 2)}, 10, 0.1),
               SingularFisher);
}

TEST(SampleUniform, AllInsideWithBallMoments) {
  Rng rng(5);
  const Eigen::MatrixXd S = testing::RandomSpd(2, rng);
  Eigen::VectorXd c(2);
  c << 0.3, -1.2;
  const ConfidenceEllipsoid G(c, S, 9.0, 1, 1);
  const int n = 100000;
  const std::vector<SystemParams> samples = SampleUniform(G, n, rng);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(2, 2);
  for (const SystemParams& s : samples) {
    ASSERT_TRUE(G.Contains(s));
    const Eigen::VectorXd d = FlattenParams(s) - c;
    mean += d;
    second += d * d.transpose();
  }
  mean /= n;
  const Eigen::MatrixXd cov = second / n - mean * mean.transpose();
  const Eigen::MatrixXd expected = 9.0 * S.inverse() / 4.0;
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE(std::abs(mean(i)), 3.0 * std::sqrt(expected(i, i) / n));
  }
  EXPECT_LE(OpNorm(cov - expected), 0.05 * OpNorm(expected));
}

TEST(SampleUniform, DegenerateEllipsoidReturnsCenter) {
  Eigen::VectorXd c(2);
  c << 1.0, 2.0;
  const ConfidenceEllipsoid G(c, Eigen::MatrixXd::Identity(2, 2), 0.0, 1, 1);
  Rng rng(6);
  for (const SystemParams& s : SampleUniform(G, 10, rng)) {
    EXPECT_EQ(FlattenParams(s), c);
  }
}

TEST(Coverage, WeightedErrorBoundAndCoverageWithIdentityWeight) {
  const SystemParams th = PaperSystem();
  const PopulationFisher pop =
      EstimatePopulationFisher(th, kI3, 10, kI3, 100000, Rng(31));
  const int N = 400;
  const double delta = 0.1;
  const Eigen::MatrixXd X = pop.fisher.matrix.inverse();
  const double bound =
      4.0 * X.trace() / N + 8.0 * OpNorm(X) * std::log(2.0 / delta) / N;
  int within = 0, covered = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const Dataset ds = CollectDataset(th, kI3, N, 10, kI3, Rng(500 + s));
    const SystemParams est = LeastSquares(ds);
    const Eigen::VectorXd err = FlattenParams(est) - FlattenParams(th);
    if (err.squaredNorm() <= bound) ++within;
    const ConfidenceEllipsoid G =
        BuildConfidenceEllipsoid(est, EstimateFisher(ds, kI3), N, delta);
    if (G.Contains(th)) ++covered;
  }
  const double slack = 3.0 * std::sqrt(seeds * delta * (1 - delta));
  EXPECT_GE(within, (1 - delta) * seeds - slack);
  EXPECT_GE(covered, (1 - delta) * seeds - slack);
}

}  // namespace
}  // namespace drlqr
