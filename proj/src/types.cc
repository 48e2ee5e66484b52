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

#include "drlqr/types.h"

#include <string>

#include "drlqr/errors.h"

namespace drlqr {
namespace {

constexpr double kCheckTol = 1e-10;

std::string Shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

SystemParams::SystemParams(Eigen::MatrixXd a, Eigen::MatrixXd b)
    : A(std::move(a)), B(std::move(b)) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw DimensionMismatch("A must be square and nonempty, got " + Shape(A));
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw DimensionMismatch("B must have " + std::to_string(A.rows()) +
                            " rows and at least one column, got " + Shape(B));
  }
}

Eigen::MatrixXd SystemParams::Stacked() const {
  Eigen::MatrixXd ab(dx(), dx() + du());
  ab << A, B;
  return ab;
}

Eigen::VectorXd FlattenParams(const SystemParams& theta) {
  return Vec(theta.Stacked());
}

SystemParams UnflattenParams(const Eigen::VectorXd& v, int dx, int du) {
  if (dx <= 0 || du <= 0 || v.size() != dx * (dx + du)) {
    throw DimensionMismatch("parameter vector of length " +
                            std::to_string(v.size()) + " does not match dx=" +
                            std::to_string(dx) + ", du=" + std::to_string(du));
  }
  const Eigen::MatrixXd ab = Unvec(v, dx);
  return SystemParams(ab.leftCols(dx), ab.rightCols(du));
}

CostModel::CostModel(Eigen::MatrixXd Q, Eigen::MatrixXd R,
                     Eigen::MatrixXd noise_cov)
    : Q_(std::move(Q)), R_(std::move(R)), noise_cov_(std::move(noise_cov)) {
  if (Q_.rows() != Q_.cols() || R_.rows() != R_.cols() ||
      noise_cov_.rows() != noise_cov_.cols() ||
      noise_cov_.rows() != Q_.rows()) {
    throw DimensionMismatch("cost model shapes inconsistent: Q " + Shape(Q_) +
                            ", R " + Shape(R_) + ", noise " +
                            Shape(noise_cov_));
  }
  if (!IsSymmetric(Q_) || MinEigenvalue(Q_) < -kCheckTol) {
    throw InvalidArgument("Q must be symmetric positive semidefinite");
  }
  if (!IsSymmetric(R_) || MinEigenvalue(R_) <= kCheckTol) {
    throw InvalidArgument("R must be symmetric positive definite");
  }
  if (!IsSymmetric(noise_cov_) || MinEigenvalue(noise_cov_) <= kCheckTol) {
    throw InvalidArgument("noise covariance must be symmetric positive definite");
  }
  Q_ = Symmetrize(Q_);
  R_ = Symmetrize(R_);
  noise_cov_ = Symmetrize(noise_cov_);
}

CostModel CostModel::Identity(int dx, int du, double q_scale) {
  return CostModel(q_scale * Eigen::MatrixXd::Identity(dx, dx),
                   Eigen::MatrixXd::Identity(du, du),
                   Eigen::MatrixXd::Identity(dx, dx));
}

std::ostream& operator<<(std::ostream& os, const Cost& c) {
  if (c.is_infinite()) return os << "inf";
  return os << c.value();
}

Eigen::MatrixXd Kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

double OpNorm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double MinEigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(m),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool IsSymmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <=
         tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

Eigen::VectorXd Vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd Unvec(const Eigen::VectorXd& v, int rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw DimensionMismatch("cannot reshape vector of length " +
                            std::to_string(v.size()) + " into " +
                            std::to_string(rows) + " rows");
  }
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, v.size() / rows);
}

Eigen::MatrixXd PsdSqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrize(m));
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace drlqr
