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

#include "drlqr/sysid.h"

#include <cmath>
#include <string>

#include "drlqr/errors.h"

namespace drlqr {

void Dataset::Validate() const {
  if (trajectories.empty()) throw InvalidArgument("dataset is empty");
  const int T = horizon();
  for (const Trajectory& tr : trajectories) {
    if (tr.length() != T || tr.states.rows() != T + 1 ||
        tr.states.cols() != dx || tr.inputs.cols() != du) {
      throw DimensionMismatch(
          "trajectories disagree on horizon or dimensions");
    }
  }
}

Trajectory Simulate(const SystemParams& theta, const Eigen::MatrixXd& noise_cov,
                    int T, const Eigen::MatrixXd& input_cov, Rng& rng) {
  if (T < 1) throw InvalidArgument("trajectory length must be at least 1");
  const int dx = theta.dx();
  const int du = theta.du();
  if (noise_cov.rows() != dx || noise_cov.cols() != dx ||
      input_cov.rows() != du || input_cov.cols() != du) {
    throw DimensionMismatch("covariance shapes do not match the system");
  }
  const Eigen::MatrixXd input_factor = PsdSqrt(input_cov);
  const Eigen::MatrixXd noise_factor = PsdSqrt(noise_cov);
  Trajectory tr;
  tr.states = Eigen::MatrixXd::Zero(T + 1, dx);
  tr.inputs = Eigen::MatrixXd::Zero(T, du);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dx);
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd u = rng.Gaussian(input_factor);
    const Eigen::VectorXd w = rng.Gaussian(noise_factor);
    tr.inputs.row(t) = u.transpose();
    x = theta.A * x + theta.B * u + w;
    tr.states.row(t + 1) = x.transpose();
  }
  return tr;
}

Trajectory Simulate(const SystemParams& theta, const CostModel& cm, int T,
                    const Eigen::MatrixXd& input_cov, Rng& rng) {
  return Simulate(theta, cm.noise_cov(), T, input_cov, rng);
}

Dataset CollectDataset(const SystemParams& theta,
                       const Eigen::MatrixXd& noise_cov, int N, int T,
                       const Eigen::MatrixXd& input_cov, const Rng& rng) {
  if (N < 1) throw InvalidArgument("need at least one trajectory");
  Dataset ds;
  ds.dx = theta.dx();
  ds.du = theta.du();
  ds.input_cov = input_cov;
  ds.seed = rng.seed();
  ds.trajectories.reserve(N);
  for (int n = 0; n < N; ++n) {
    Rng sub = rng.Split(static_cast<std::uint64_t>(n));
    ds.trajectories.push_back(Simulate(theta, noise_cov, T, input_cov, sub));
  }
  return ds;
}

Dataset CollectDataset(const SystemParams& theta, const CostModel& cm, int N,
                       int T, const Eigen::MatrixXd& input_cov, const Rng& rng) {
  return CollectDataset(theta, cm.noise_cov(), N, T, input_cov, rng);
}

namespace {

// Rows z_t^T = (X_t; U_t)^T and targets X_{t+1}^T.
void StackRegressors(const Dataset& ds, Eigen::MatrixXd* Z,
                     Eigen::MatrixXd* Y) {
  const int T = ds.horizon();
  const int rows = ds.size() * T;
  Z->resize(rows, ds.dx + ds.du);
  Y->resize(rows, ds.dx);
  int r = 0;
  for (const Trajectory& tr : ds.trajectories) {
    Z->block(r, 0, T, ds.dx) = tr.states.topRows(T);
    Z->block(r, ds.dx, T, ds.du) = tr.inputs;
    Y->middleRows(r, T) = tr.states.bottomRows(T);
    r += T;
  }
}

}  // namespace

Eigen::MatrixXd TrajectoryGram(const Trajectory& tr) {
  const int dx = static_cast<int>(tr.states.cols());
  const int du = static_cast<int>(tr.inputs.cols());
  const int T = tr.length();
  Eigen::MatrixXd Z(T, dx + du);
  Z << tr.states.topRows(T), tr.inputs;
  return Z.transpose() * Z;
}

Eigen::MatrixXd RegressorGram(const Dataset& ds) {
  ds.Validate();
  const int p = ds.dx + ds.du;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  for (const Trajectory& tr : ds.trajectories) gram += TrajectoryGram(tr);
  return gram;
}

SystemParams LeastSquares(const Dataset& ds) {
  ds.Validate();
  Eigen::MatrixXd Z, Y;
  StackRegressors(ds, &Z, &Y);
  const int p = ds.dx + ds.du;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double smin = sv.size() == p ? sv(p - 1) : 0.0;
  const double condition =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (Z.rows() < p || !(condition <= kMaxRegressorCondition)) {
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > smax / kMaxRegressorCondition) ++rank;
    }
    throw RankDeficient(rank, p, condition);
  }
  const Eigen::MatrixXd theta_t = Z.colPivHouseholderQr().solve(Y);
  const Eigen::MatrixXd ab = theta_t.transpose();
  return SystemParams(ab.leftCols(ds.dx), ab.rightCols(ds.du));
}

FisherEstimate FisherFromGram(const Eigen::MatrixXd& mean_gram,
                              const Eigen::MatrixXd& noise_cov) {
  const Eigen::MatrixXd noise_inv =
      Symmetrize(noise_cov.ldlt().solve(
          Eigen::MatrixXd::Identity(noise_cov.rows(), noise_cov.cols())));
  return FisherEstimate{Symmetrize(Kron(mean_gram, noise_inv))};
}

FisherEstimate EstimateFisher(const Dataset& ds,
                              const Eigen::MatrixXd& noise_cov) {
  return FisherFromGram(RegressorGram(ds) / ds.size(), noise_cov);
}

FisherEstimate EstimateFisher(const Dataset& ds, const CostModel& cm) {
  return EstimateFisher(ds, cm.noise_cov());
}

ConfidenceEllipsoid::ConfidenceEllipsoid(Eigen::VectorXd center,
                                         Eigen::MatrixXd shape, double radius2,
                                         int dx, int du)
    : center_(std::move(center)),
      shape_(Symmetrize(shape)),
      radius2_(radius2),
      dx_(dx),
      du_(du) {
  if (center_.size() != dx * (dx + du) || shape_.rows() != center_.size() ||
      shape_.cols() != center_.size()) {
    throw DimensionMismatch("ellipsoid center and shape sizes disagree");
  }
  if (!(radius2_ >= 0.0)) throw InvalidArgument("ellipsoid radius must be >= 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape_);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    throw SingularFisher("ellipsoid shape matrix is not positive definite");
  }
  const Eigen::VectorXd scale =
      (radius2_ * lambda.cwiseInverse()).cwiseSqrt();
  gamma_ = Symmetrize(es.eigenvectors() * scale.asDiagonal() *
                      es.eigenvectors().transpose());
}

double ConfidenceEllipsoid::Mahalanobis2(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd d = theta - center_;
  return d.dot(shape_ * d);
}

bool ConfidenceEllipsoid::Contains(const Eigen::VectorXd& theta,
                                   double rel_tol) const {
  return Mahalanobis2(theta) <= radius2_ * (1.0 + rel_tol);
}

double EllipsoidRadius2(int param_dim, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidDelta("delta must lie in (0, 1), got " + std::to_string(delta));
  }
  return 16.0 * (param_dim + std::log(2.0 / delta));
}

ConfidenceEllipsoid BuildConfidenceEllipsoid(const SystemParams& center,
                                             const FisherEstimate& fisher,
                                             int N, double delta) {
  const int d = center.param_dim();
  const double radius2 = EllipsoidRadius2(d, delta);
  if (N < 1) throw InvalidArgument("N must be positive");
  if (fisher.matrix.rows() != d || fisher.matrix.cols() != d) {
    throw DimensionMismatch("Fisher estimate does not match parameter size");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(fisher.matrix),
                                                    Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || !(lmin > 1e-14 * lmax)) {
    throw SingularFisher("Fisher estimate is singular (eigenvalues in [" +
                         std::to_string(lmin) + ", " + std::to_string(lmax) +
                         "])");
  }
  return ConfidenceEllipsoid(FlattenParams(center),
                             static_cast<double>(N) * fisher.matrix, radius2,
                             center.dx(), center.du());
}

Eigen::VectorXd SampleUnitBall(int dim, Rng& rng) {
  Eigen::VectorXd w = rng.StandardNormal(dim);
  double norm = w.norm();
  while (norm == 0.0) {
    w = rng.StandardNormal(dim);
    norm = w.norm();
  }
  const double radius = std::pow(rng.Uniform01(), 1.0 / dim);
  return (radius / norm) * w;
}

std::vector<SystemParams> SampleUniform(const ConfidenceEllipsoid& G,
                                        int count, Rng& rng) {
  if (count < 1) throw InvalidArgument("sample count must be positive");
  std::vector<SystemParams> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd theta =
        G.center() + G.gamma() * SampleUnitBall(G.dim(), rng);
    out.push_back(UnflattenParams(theta, G.dx(), G.du()));
  }
  return out;
}

}  // namespace drlqr
