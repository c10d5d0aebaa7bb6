// Copyright 2026 The ingrasp Authors.
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

#include "ingrasp/se3.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace ingrasp {
namespace {

// Below this angle the trigonometric coefficients of the (inverse) left
// Jacobian lose too many digits to cancellation, so series branches take
// over. Both branches agree to ~1e-12 at the switch.
constexpr double kSmallAngle = 1e-3;

constexpr double kPi = 3.14159265358979323846;

void check_rotation(const Eigen::Matrix3d& R) {
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-8 || R.determinant() < 0.0) {
    throw NonOrthonormalInputError(
        "rotation matrix is not orthonormal with determinant +1 "
        "(max |R'R - I| = " +
        std::to_string(ortho) + ")");
  }
}

}  // namespace

RotVec RotVec::canonical() const {
  const double theta = v.norm();
  if (theta <= kPi) return *this;
  // Wrap to the principal interval; flipping by a full turn keeps the
  // rotation but shortens the vector.
  const double wrapped = std::fmod(theta + kPi, 2.0 * kPi) - kPi;
  return RotVec(v * (wrapped / theta));
}

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return m;
}

Eigen::Matrix3d exp_so3(const RotVec& r) {
  const double theta = r.angle();
  const Eigen::Matrix3d K = skew(r.v);
  double c1, c2;  // exp = I + c1 K + c2 K^2
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    c1 = 1.0 - t2 / 6.0;
    c2 = 0.5 - t2 / 24.0;
  } else {
    c1 = std::sin(theta) / theta;
    c2 = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + c1 * K + c2 * K * K;
}

RotVec log_so3(const Eigen::Matrix3d& R) {
  check_rotation(R);
  // The quaternion conversion picks the numerically largest pivot, which
  // stays well conditioned through theta == pi.
  Eigen::Quaterniond q(R);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double sin_half = q.vec().norm();
  const double theta = 2.0 * std::atan2(sin_half, q.w());
  Eigen::Vector3d v;
  if (sin_half < 1e-12) {
    v = 2.0 * q.vec();  // theta ~ 0: vec = a * theta / 2 to leading order
  } else {
    v = (theta / sin_half) * q.vec();
  }
  if (theta > kPi - 1e-9) {
    // At (or within rounding of) pi the axis sign is a free choice; pin it
    // so the largest-magnitude component is positive.
    int idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v[idx] < 0.0) v = -v;
  }
  return RotVec(v);
}

Eigen::Matrix3d left_jacobian(const RotVec& r) {
  const double theta = r.angle();
  const Eigen::Matrix3d K = skew(r.v);
  double c1, c2;  // J_l = I + c1 K + c2 K^2
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    c1 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c2 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    c1 = (1.0 - std::cos(theta)) / (theta * theta);
    c2 = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Eigen::Matrix3d::Identity() + c1 * K + c2 * K * K;
}

Eigen::Matrix3d left_jacobian_inv(const RotVec& r) {
  const double theta = r.angle();
  const Eigen::Matrix3d K = skew(r.v);
  double c;  // J_l^-1 = I - K/2 + c K^2
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    const double half = 0.5 * theta;
    c = 1.0 / (theta * theta) -
        std::cos(half) / (2.0 * theta * std::sin(half));
  }
  return Eigen::Matrix3d::Identity() - 0.5 * K + c * K * K;
}

Matrix6d pose_coordinate_jacobian(const RotVec& r) {
  Matrix6d J = Matrix6d::Zero();
  J.topLeftCorner<3, 3>().setIdentity();
  J.bottomRightCorner<3, 3>() = left_jacobian(r);
  return J;
}

Eigen::Matrix3d Pose::rotation() const { return exp_so3(r); }

Pose Pose::inverse() const {
  const Eigen::Matrix3d Rt = rotation().transpose();
  return Pose(-(Rt * p), log_so3(Rt));
}

Eigen::Vector3d Pose::act(const Eigen::Vector3d& point) const {
  return rotation() * point + p;
}

Pose operator*(const Pose& lhs, const Pose& rhs) {
  return Pose(lhs.rotation() * rhs.p + lhs.p,
              log_so3(lhs.rotation() * rhs.rotation()));
}

PoseDistance pose_distance(const Pose& pose, const Pose& target,
                           const WeightMatrix& weights) {
  PoseDistance out;
  const Eigen::Vector3d p_e = pose.p - target.p;
  const RotVec r_e =
      log_so3(pose.rotation() * target.rotation().transpose());
  out.error.e << p_e, r_e.v;
  out.d = 0.5 * p_e.dot(weights.w_p.asDiagonal() * p_e) +
          0.5 * r_e.v.dot(weights.w_r.asDiagonal() * r_e.v);
  return out;
}

Eigen::Matrix<double, 1, 6> pose_distance_twist_grad(
    const Pose& pose, const Pose& target, const WeightMatrix& weights) {
  const PoseDistance pd = pose_distance(pose, target, weights);
  const Eigen::Vector3d p_e = pd.error.translation();
  const RotVec r_e(pd.error.rotation());
  Eigen::Matrix<double, 1, 6> row;
  row.head<3>() = (weights.w_p.asDiagonal() * p_e).transpose();
  row.tail<3>() =
      (weights.w_r.asDiagonal() * r_e.v).transpose() * left_jacobian_inv(r_e);
  return row;
}

Eigen::RowVectorXd pose_distance_grad(
    const Pose& pose, const Pose& target, const WeightMatrix& weights,
    const Eigen::Matrix<double, 6, Eigen::Dynamic>& J_x) {
  return pose_distance_twist_grad(pose, target, weights) * J_x;
}

}  // namespace ingrasp
