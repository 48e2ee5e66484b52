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
#include <vector>

#include <Eigen/Dense>

#include "drlqr/rng.h"
#include "drlqr/types.h"

namespace drlqr {

// One rollout: states X_1..X_{T+1} as rows of a (T+1) x dx array and inputs
// U_1..U_T as rows of a T x du array.
struct Trajectory {
  Eigen::MatrixXd states;
  Eigen::MatrixXd inputs;

  int length() const { return static_cast<int>(inputs.rows()); }
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  int dx = 0;
  int du = 0;
  Eigen::MatrixXd input_cov;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(trajectories.size()); }
  int horizon() const {
    return trajectories.empty() ? 0 : trajectories.front().length();
  }
  // Throws DimensionMismatch if trajectories disagree on T, dx or du.
  void Validate() const;
};

// Rollout of X_{t+1} = A X_t + B U_t + W_t from X_1 = 0 with
// U_t ~ N(0, input_cov) and W_t ~ N(0, noise_cov). Both covariances may be
// singular (zero gives a noiseless or unexcited rollout).
Trajectory Simulate(const SystemParams& theta, const Eigen::MatrixXd& noise_cov,
                    int T, const Eigen::MatrixXd& input_cov, Rng& rng);
Trajectory Simulate(const SystemParams& theta, const CostModel& cm, int T,
                    const Eigen::MatrixXd& input_cov, Rng& rng);

// N independent rollouts; trajectory n draws from rng.Split(n), so the
// result does not depend on evaluation order.
Dataset CollectDataset(const SystemParams& theta,
                       const Eigen::MatrixXd& noise_cov, int N, int T,
                       const Eigen::MatrixXd& input_cov, const Rng& rng);
Dataset CollectDataset(const SystemParams& theta, const CostModel& cm, int N,
                       int T, const Eigen::MatrixXd& input_cov, const Rng& rng);

// Condition-number threshold on the stacked regressor.
inline constexpr double kMaxRegressorCondition = 1e12;

// argmin_theta sum ||X_{t+1} - [A B] (X_t; U_t)||^2, solved by QR on the
// stacked regressor. Throws RankDeficient when the regressor condition
// number exceeds kMaxRegressorCondition.
SystemParams LeastSquares(const Dataset& ds);

// Sum over one trajectory of z z^T with z = (X_t; U_t).
Eigen::MatrixXd TrajectoryGram(const Trajectory& tr);
// Sum of TrajectoryGram over the dataset, in trajectory order.
Eigen::MatrixXd RegressorGram(const Dataset& ds);

struct FisherEstimate {
  Eigen::MatrixXd matrix;  // d_theta x d_theta
};

// mean_gram (x) noise_cov^{-1}.
FisherEstimate FisherFromGram(const Eigen::MatrixXd& mean_gram,
                              const Eigen::MatrixXd& noise_cov);

// (1/N) sum_{n,t} z z^T (x) noise_cov^{-1}.
FisherEstimate EstimateFisher(const Dataset& ds, const CostModel& cm);
FisherEstimate EstimateFisher(const Dataset& ds,
                              const Eigen::MatrixXd& noise_cov);

// G = {theta : (theta - center)^T S (theta - center) <= radius2}, with a
// cached symmetric factor gamma satisfying gamma gamma^T = radius2 S^{-1}, so
// that G = {center + gamma w : ||w|| <= 1}.
class ConfidenceEllipsoid {
 public:
  ConfidenceEllipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape,
                      double radius2, int dx, int du);

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& shape() const { return shape_; }
  const Eigen::MatrixXd& gamma() const { return gamma_; }
  double radius2() const { return radius2_; }
  int dx() const { return dx_; }
  int du() const { return du_; }
  int dim() const { return static_cast<int>(center_.size()); }

  SystemParams center_params() const {
    return UnflattenParams(center_, dx_, du_);
  }
  // (theta - center)^T S (theta - center).
  double Mahalanobis2(const Eigen::VectorXd& theta) const;
  bool Contains(const Eigen::VectorXd& theta, double rel_tol = 1e-10) const;
  bool Contains(const SystemParams& theta, double rel_tol = 1e-10) const {
    return Contains(FlattenParams(theta), rel_tol);
  }

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd shape_;
  double radius2_;
  int dx_;
  int du_;
  Eigen::MatrixXd gamma_;
};

// Radius^2 = 16 (d_theta + log(2 / delta)).
double EllipsoidRadius2(int param_dim, double delta);

// Shape N * fisher, radius from EllipsoidRadius2. Throws InvalidDelta for
// delta outside (0, 1) and SingularFisher if the Fisher estimate is not
// positive definite.
ConfidenceEllipsoid BuildConfidenceEllipsoid(const SystemParams& center,
                                             const FisherEstimate& fisher,
                                             int N, double delta);

// Uniform samples on G: center + gamma w with w uniform on the unit ball
// (uniform direction, radius u^{1/d}).
std::vector<SystemParams> SampleUniform(const ConfidenceEllipsoid& G,
                                        int count, Rng& rng);
Eigen::VectorXd SampleUnitBall(int dim, Rng& rng);

}  // namespace drlqr
