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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "drlqr/errors.h"
#include "drlqr/lqr.h"
#include "drlqr/sysid.h"
#include "drlqr/theory.h"
#include "test_util.h"

namespace drlqr {
namespace {

using testing::PaperCost;
using testing::PaperSystem;
using testing::RelErr;

TEST(Kronecker, TraceIdentityFixesOrder) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int du = 1 + trial % 3, dx = 1 + trial % 4;
    const Eigen::MatrixXd M = testing::RandomMatrix(du, dx, rng);
    const Eigen::MatrixXd S = testing::RandomSpd(dx, rng);
    const Eigen::MatrixXd Psi = testing::RandomSpd(du, rng);
    const double lhs = (M * S * M.transpose() * Psi).trace();
    const Eigen::VectorXd v = Vec(M);
    const double rhs = v.dot(Kron(S, Psi) * v);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
  }
}

TEST(Kronecker, CostWeightUsesCovarianceThenInputWeight) {
  const SystemParams th = PaperSystem();
  const CostModel cm = PaperCost();
  const RiccatiSolution sol = SolveDare(th, cm);
  const Eigen::MatrixXd expected = Kron(StateCovariance(sol.K, th, cm),
                                        InputWeight(th, cm, sol.P));
  EXPECT_LT(RelErr(GainCostWeight(th, cm), expected), 1e-12);
}

double ScalarGain(double a, double b) {
  return SolveDare(testing::Scalar(a, b), testing::ScalarCost(1, 1)).K(0, 0);
}

TEST(GainJacobian, ScalarMatchesRichardsonOracle) {
  const double a = 0.5, b = 1.0;
  auto central = [&](double h) {
    return (ScalarGain(a + h, b) - ScalarGain(a - h, b)) / (2 * h);
  };
  const double oracle = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
  const Eigen::MatrixXd J =
      GainJacobian(testing::Scalar(a, b), testing::ScalarCost(1, 1));
  ASSERT_EQ(J.rows(), 1);
  ASSERT_EQ(J.cols(), 2);
  EXPECT_NEAR(J(0, 0), oracle, 1e-6);
  auto central_b = [&](double h) {
    return (ScalarGain(a, b + h) - ScalarGain(a, b - h)) / (2 * h);
  };
  EXPECT_NEAR(J(0, 1), (4.0 * central_b(5e-4) - central_b(1e-3)) / 3.0, 1e-6);
}

TEST(GainJacobian, BoundedByValueMatrixPower) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int dx = 1 + trial % 3, du = 1 + (trial / 3) % 2;
    const SystemParams th = RandomStabilizableSystem(dx, du, rng);
    const CostModel cm = CostModel::Identity(dx, du);
    const double p = OpNorm(SolveDare(th, cm).P);
    EXPECT_LE(OpNorm(GainJacobian(th, cm)), 24.0 * std::pow(p, 3.5));
  }
}

TEST(ModelTaskHessian, AnalyticMatchesFiniteDifferenceOnPaperSystem) {
  const ModelTaskHessian an = ModelTaskHessianAnalytic(PaperSystem(), PaperCost());
  const ModelTaskHessian fd =
      ModelTaskHessianFiniteDifference(PaperSystem(), PaperCost());
  EXPECT_EQ(an.method, ModelTaskHessian::Method::kAnalytic);
  EXPECT_EQ(fd.method, ModelTaskHessian::Method::kFiniteDifference);
  EXPECT_LE(RelErr(fd.H, an.H), 1e-3);
}

TEST(ModelTaskHessian, PositiveSemidefiniteOnRandomInstances) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int dx = 1 + trial % 3, du = 1 + (trial / 3) % 2;
    const SystemParams th = RandomStabilizableSystem(dx, du, rng);
    const CostModel cm = CostModel::Identity(dx, du);
    const Eigen::MatrixXd H = ModelTaskHessianAnalytic(th, cm).H;
    EXPECT_TRUE(IsSymmetric(H, 0.0));
    EXPECT_GE(MinEigenvalue(H), -1e-8 * OpNorm(H)) << "trial " << trial;
  }
}

TEST(ModelTaskHessian, QuadraticFormPredictsExcessCost) {
  const SystemParams th = PaperSystem();
  const CostModel cm = PaperCost();
  const Eigen::MatrixXd H = ModelTaskHessianAnalytic(th, cm).H;
  Rng rng(4);
  Eigen::VectorXd dir = rng.StandardNormal(18);
  dir.normalize();
  double previous_gap = 1e300;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Eigen::VectorXd d = eps * dir;
    const SystemParams moved = UnflattenParams(FlattenParams(th) + d, 3, 3);
    const double excess = ExcessCost(SolveDare(moved, cm).K, th, cm).value();
    const double gap = std::abs(excess / d.dot(H * d) - 1.0);
    EXPECT_LT(gap, previous_gap + 1e-6);
    previous_gap = gap;
  }
  EXPECT_LT(previous_gap, 1e-3);
}

TEST(PopulationFisher, ZeroExcitationGivesZeroMoments) {
  const PopulationFisher pf = EstimatePopulationFisher(
      PaperSystem(), Eigen::MatrixXd::Zero(3, 3), 5, Eigen::MatrixXd::Zero(3, 3),
      10, Rng(1));
  EXPECT_EQ(pf.mean_gram.norm(), 0.0);
  EXPECT_EQ(pf.samples, 10);
}

TEST(PopulationFisher, ScalarTransientMomentOracle) {
  const double a = 0.8, b = 1.0;
  const int T = 10;
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const PopulationFisher pf = EstimatePopulationFisher(
      testing::Scalar(a, b), one, T, one, 100000, Rng(2));
  // Recursion E X_{t+1}^2 = a^2 E X_t^2 + b^2 su + sw from X_1 = 0.
  double m = 0.0, total = 0.0;
  for (int t = 1; t <= T; ++t) {
    total += m;
    m = a * a * m + b * b + 1.0;
  }
  EXPECT_NEAR(ScalarTransientStateMoment(a, b, 1.0, 1.0, T), total, 1e-12);
  EXPECT_NEAR(pf.mean_gram(0, 0), total, 0.02 * total);
  EXPECT_NEAR(pf.mean_gram(1, 1), T, 0.02 * T);
  EXPECT_GT(pf.gram_std_error(0, 0), 0.0);
}

TEST(PopulationFisher, SameRolloutsAsDatasetEstimate) {
  const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  const Rng rng(5);
  const PopulationFisher pf =
      EstimatePopulationFisher(PaperSystem(), I3, 10, I3, 300, rng);
  const Dataset ds = CollectDataset(PaperSystem(), I3, 300, 10, I3, rng);
  EXPECT_LT(RelErr(pf.fisher.matrix, EstimateFisher(ds, I3).matrix), 1e-13);
}

TEST(LeadingTerms, Examples) {
  Rng rng(6);
  const Eigen::MatrixXd F = testing::RandomSpd(6, rng);
  const LeadingTerms same = ComputeLeadingTerms(F, F, 100);
  EXPECT_NEAR(same.ce_dr_term, 6.0 / 100, 1e-12);
  EXPECT_NEAR(same.rc_term, 6.0 / 100, 1e-12);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(6, 6);
  H(0, 0) = 1.0;
  const LeadingTerms gap =
      ComputeLeadingTerms(H, Eigen::MatrixXd::Identity(6, 6), 50);
  EXPECT_NEAR(gap.ce_dr_term, 1.0 / 50, 1e-15);
  EXPECT_NEAR(gap.rc_term, 6.0 / 50, 1e-15);
  EXPECT_THROW(ComputeLeadingTerms(H, Eigen::MatrixXd::Zero(6, 6), 10),
               SingularFisher);
}

TEST(LeadingTerms, TraceNeverExceedsDimensionTimesNorm) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 8;
    const Eigen::MatrixXd g = testing::RandomMatrix(d, d / 2 + 1, rng);
    const LeadingTerms lt = ComputeLeadingTerms(
        g * g.transpose(), testing::RandomSpd(d, rng), 1);
    EXPECT_LE(lt.ce_dr_term, lt.rc_term * (1 + 1e-12));
  }
}

TEST(LeadingTerms, PaperSystemRegressionValues) {
  const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd H = ModelTaskHessianAnalytic(PaperSystem(), PaperCost()).H;
  const PopulationFisher pf =
      EstimatePopulationFisher(PaperSystem(), I3, 10, I3, 20000, Rng(0));
  const LeadingTerms lt = ComputeLeadingTerms(H, pf.fisher.matrix, 1);
  // Frozen from this computation; Monte Carlo spread is below 1%.
  EXPECT_NEAR(lt.ce_dr_term, 1.623, 0.02);
  EXPECT_NEAR(lt.rc_term, 6.19, 0.1);
}

TEST(InequalitySuite, PaperSystemWithUnitWeightsPasses) {
  Rng rng(8);
  const InequalityReport rep =
      RunInequalitySuite(PaperSystem(), CostModel::Identity(3, 3), rng);
  for (const InequalityCheck& c : rep.checks) {
    EXPECT_TRUE(c.pass) << c.name << " lhs " << c.lhs << " rhs " << c.rhs;
  }
  EXPECT_TRUE(rep.AllPass());
}

TEST(InequalitySuite, GainBoundOnRandomInstances) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int dx = 1 + trial % 4, du = 1 + (trial / 4) % 3;
    const SystemParams th = RandomStabilizableSystem(dx, du, rng);
    const RiccatiSolution sol = SolveDare(th, CostModel::Identity(dx, du));
    EXPECT_LE(OpNorm(sol.K), std::sqrt(OpNorm(sol.P)) * (1 + 1e-10));
  }
}

TEST(InequalitySuite, CertaintyEquivalentStabilizationAtBoundaryRadius) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemParams th = RandomStabilizableSystem(2, 2, rng);
    const CostModel cm = CostModel::Identity(2, 2);
    const double p = OpNorm(SolveDare(th, cm).P);
    Eigen::VectorXd dir = rng.StandardNormal(th.param_dim());
    dir *= std::pow(p, -5.0) / 256.0 / dir.norm();
    const SystemParams moved =
        UnflattenParams(FlattenParams(th) + dir, 2, 2);
    const Gain K = SolveDare(moved, cm).K;
    ASSERT_TRUE(IsSchurStable(ClosedLoop(th, K)));
    EXPECT_LE(OpNorm(StateCovariance(K, th, cm)), 2.0 * p);
  }
}

TEST(InequalitySuite, RejectsWeightsOutsideAssumptions) {
  Rng rng(11);
  EXPECT_THROW(RunInequalitySuite(PaperSystem(), PaperCost(), rng),
               PreconditionViolated);
  const CostModel bad_r(Eigen::MatrixXd::Identity(3, 3),
                        2.0 * Eigen::MatrixXd::Identity(3, 3),
                        Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(RunInequalitySuite(PaperSystem(), bad_r, rng),
               PreconditionViolated);
}

TEST(InequalitySuite, CsvHasOneRowPerCheck) {
  Rng rng(12);
  const InequalityReport rep =
      RunInequalitySuite(PaperSystem(), CostModel::Identity(3, 3), rng);
  const auto path =
      (std::filesystem::temp_directory_path() / "drlqr_ineq.csv").string();
  WriteInequalityCsv(rep, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "check_name,margin,pass");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(rep.checks.size()));
}

}  // namespace
}  // namespace drlqr
