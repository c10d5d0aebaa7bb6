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

#ifndef INGRASP_HAND_HPP_
#define INGRASP_HAND_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ingrasp/se3.hpp"

namespace ingrasp {

// One revolute joint: rotation axis in its own frame, plus the fixed
// transform that places this joint's frame in the previous joint's frame
// (applied before the rotation).
struct JointSpec {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Pose origin_offset;
  double lower = 0.0;
  double upper = 0.0;
};

// Serial chain from the palm frame to a spherical fingertip.
struct FingerChain {
  std::string name;
  Pose base_pose;
  std::vector<JointSpec> joints;
  Pose tip_offset;

  int dof() const { return static_cast<int>(joints.size()); }
};

// A point rigidly attached to the body that follows joint `joint` of
// finger `finger`, expressed in that joint's rotated frame. Used for
// minimum-distance constraints between fingers.
struct CollisionPoint {
  int finger = 0;
  int joint = 0;
  Eigen::Vector3d local = Eigen::Vector3d::Zero();
};

struct HandModel {
  std::string name;
  std::vector<FingerChain> fingers;
  int thumb = -1;  // index into fingers
  std::vector<CollisionPoint> collision_points;
  std::vector<std::pair<int, int>> collision_pairs;
  double min_pair_distance = 0.0;
  double tip_radius = 0.0;

  int dof() const;
  // Column offset of finger i inside a stacked joint vector.
  int finger_offset(int i) const;
  int finger_index(const std::string& name) const;

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& Q) const;
  Eigen::VectorXd mid_range() const;
};

// Grasp reference: fingertip poses expressed in the object frame at grasp
// time. Positions are the optimization targets; orientations matter only
// through nonzero rotational weights.
struct GraspState {
  Eigen::VectorXd Q0;
  Pose object_pose0;
  std::vector<Eigen::Vector3d> grasp_points;
  std::vector<RotVec> grasp_orients;
};

// Fingertip pose in the palm frame. `q` holds only this finger's joints.
Pose fk_fingertip(const HandModel& hand, int finger,
                  const Eigen::VectorXd& q);

// Geometric Jacobian of the fingertip frame, 6 x dof(finger). Rows are
// [linear; angular] spatial twists in the palm frame under the
// left-perturbation convention.
Eigen::Matrix<double, 6, Eigen::Dynamic> space_jacobian(
    const HandModel& hand, int finger, const Eigen::VectorXd& q);

// Palm-frame positions of all fingertips for a stacked joint vector.
std::vector<Eigen::Vector3d> fingertip_positions(const HandModel& hand,
                                                 const Eigen::VectorXd& Q);

// World position of a collision point and its 3 x dof(finger) point
// Jacobian with respect to that finger's joints.
Eigen::Vector3d collision_point_position(const HandModel& hand,
                                         const Eigen::VectorXd& Q,
                                         const CollisionPoint& point);
Eigen::Matrix<double, 3, Eigen::Dynamic> collision_point_jacobian(
    const HandModel& hand, const Eigen::VectorXd& Q,
    const CollisionPoint& point);

// Euclidean distances for every configured collision pair, in pair order.
Eigen::VectorXd collision_distances(const HandModel& hand,
                                    const Eigen::VectorXd& Q);

// Damped-least-squares IK for fingertip center positions, one target per
// finger. Iterates are clamped to joint limits; throws IkNotConvergedError
// (with per-finger residuals) if any residual stays above 2 mm.
Eigen::VectorXd ik_fingertips(const HandModel& hand,
                              const std::vector<Eigen::Vector3d>& targets,
                              const Eigen::VectorXd& q_seed);
Eigen::VectorXd ik_fingertips(const HandModel& hand,
                              const std::vector<Eigen::Vector3d>& targets);

// Records fingertip poses in the object frame. `inset` moves each stored
// position toward the centroid of the grasp points, emulating a grasp
// preload pressing into the object surface.
GraspState make_grasp(const HandModel& hand, const Eigen::VectorXd& Q0,
                      const Pose& object_pose0, double inset = 0.0);

// The shipped three-finger hand: thumb opposing index and ring, four
// revolute joints per finger (one abduction, three flexion).
HandModel make_synthetic_hand();

// Loads a hand description from JSON (meters / radians). Throws Error with
// the offending path or field on failure.
HandModel load_hand_model(const std::string& path);

}  // namespace ingrasp

#endif  // INGRASP_HAND_HPP_
