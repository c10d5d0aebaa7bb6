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

#ifndef INGRASP_SE3_HPP_
#define INGRASP_SE3_HPP_

#include <Eigen/Core>

#include "ingrasp/errors.hpp"

namespace ingrasp {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Axis-angle rotation vector r = theta * a with |a| = 1. The canonical
// representative keeps theta in [0, pi].
struct RotVec {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();

  RotVec() = default;
  explicit RotVec(const Eigen::Vector3d& vec) : v(vec) {}
  RotVec(double x, double y, double z) : v(x, y, z) {}

  double angle() const { return v.norm(); }

  // Maps the magnitude into [0, pi] without changing the rotation.
  RotVec canonical() const;

  static RotVec Zero() { return RotVec(); }
};

// Rigid pose as translation plus rotation vector. The rotation matrix is
// computed on demand; poses are cheap value types.
struct Pose {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  RotVec r;

  Pose() = default;
  Pose(const Eigen::Vector3d& translation, const RotVec& rotation)
      : p(translation), r(rotation) {}

  Eigen::Matrix3d rotation() const;
  Pose inverse() const;
  Eigen::Vector3d act(const Eigen::Vector3d& point) const;

  static Pose Identity() { return Pose(); }
};

// Composition T1 * T2 (apply T2 first, then T1).
Pose operator*(const Pose& lhs, const Pose& rhs);

// Pose error split into translational and rotational parts, stacked as
// [p_e; r_e].
struct SpatialError {
  Vector6d e = Vector6d::Zero();

  Eigen::Vector3d translation() const { return e.head<3>(); }
  Eigen::Vector3d rotation() const { return e.tail<3>(); }
};

// Diagonal 6x6 weight, split into translational and rotational triples.
struct WeightMatrix {
  Eigen::Vector3d w_p = Eigen::Vector3d::Zero();
  Eigen::Vector3d w_r = Eigen::Vector3d::Zero();

  WeightMatrix() = default;
  WeightMatrix(const Eigen::Vector3d& translational,
               const Eigen::Vector3d& rotational)
      : w_p(translational), w_r(rotational) {}

  Vector6d diagonal() const {
    Vector6d d;
    d << w_p, w_r;
    return d;
  }
};

// Cross-product matrix: skew(a) * b == a x b.
Eigen::Matrix3d skew(const Eigen::Vector3d& a);

// Rodrigues formula with a series branch for tiny angles.
Eigen::Matrix3d exp_so3(const RotVec& r);

// Principal logarithm; |result| <= pi. Throws NonOrthonormalInputError when
// R fails the orthonormality or determinant check. At theta == pi the axis
// sign is fixed so the largest-magnitude component is positive.
RotVec log_so3(const Eigen::Matrix3d& R);

// Left Jacobian of SO(3) and its closed-form inverse, with series branches
// near zero. They relate additive rotation-vector rates to spatial angular
// velocity: omega = J_l(r) * rdot.
Eigen::Matrix3d left_jacobian(const RotVec& r);
Eigen::Matrix3d left_jacobian_inv(const RotVec& r);

// Twist map of a pose parameterized as (p, r): block-diagonal of identity
// and the left Jacobian. Columns are spatial twists per unit coordinate
// rate under the left-perturbation convention.
Matrix6d pose_coordinate_jacobian(const RotVec& r);

struct PoseDistance {
  double d = 0.0;
  SpatialError error;
};

// Weighted squared pose error
//   d = 0.5 * p_e' W_p p_e + 0.5 * r_e' W_r r_e,
// with p_e = p1 - p2 and r_e = log(R1 * R2^-1).
PoseDistance pose_distance(const Pose& pose, const Pose& target,
                           const WeightMatrix& weights);

// Row covector mapping left-perturbation twists of `pose` to the change of
// pose_distance: e' W blockdiag(I, J_l(r_e)^-1). Multiply by a 6xn twist
// Jacobian to chain into arbitrary coordinates.
Eigen::Matrix<double, 1, 6> pose_distance_twist_grad(
    const Pose& pose, const Pose& target, const WeightMatrix& weights);

// Gradient of pose_distance with respect to coordinates x, given the 6xn
// Jacobian J_x whose columns are twists of `pose` per unit coordinate rate.
Eigen::RowVectorXd pose_distance_grad(const Pose& pose, const Pose& target,
                                      const WeightMatrix& weights,
                                      const Eigen::Matrix<double, 6,
                                                          Eigen::Dynamic>& J_x);

}  // namespace ingrasp

#endif  // INGRASP_SE3_HPP_
