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

#include "ingrasp/hand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ingrasp/errors.hpp"

namespace ingrasp {
namespace {

// Rotation + translation pair used for chain walking; avoids repeated
// log/exp round trips through the Pose value type.
struct Frame {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d p = Eigen::Vector3d::Zero();

  static Frame from_pose(const Pose& pose) {
    return {pose.rotation(), pose.p};
  }
  Frame operator*(const Frame& rhs) const {
    return {R * rhs.R, R * rhs.p + p};
  }
  Pose to_pose() const { return Pose(p, log_so3(R)); }
};

// World frame of every joint (after its rotation) plus the fingertip.
struct ChainFrames {
  std::vector<Eigen::Vector3d> joint_origin;
  std::vector<Eigen::Vector3d> joint_axis;   // unit, world
  std::vector<Frame> joint_frame;            // post-rotation
  Frame tip;
};

ChainFrames walk_chain(const FingerChain& finger, const Eigen::VectorXd& q) {
  if (q.size() != finger.dof()) {
    throw DimensionMismatchError("finger '" + finger.name + "' expects " +
                                 std::to_string(finger.dof()) +
                                 " joint values, got " +
                                 std::to_string(q.size()));
  }
  ChainFrames out;
  Frame T = Frame::from_pose(finger.base_pose);
  for (int j = 0; j < finger.dof(); ++j) {
    const JointSpec& joint = finger.joints[j];
    T = T * Frame::from_pose(joint.origin_offset);
    out.joint_origin.push_back(T.p);
    out.joint_axis.push_back((T.R * joint.axis).normalized());
    T = T * Frame{exp_so3(RotVec(joint.axis * q[j])),
                  Eigen::Vector3d::Zero()};
    out.joint_frame.push_back(T);
  }
  out.tip = T * Frame::from_pose(finger.tip_offset);
  return out;
}

void check_joint_count(const HandModel& hand, const Eigen::VectorXd& Q) {
  if (Q.size() != hand.dof()) {
    throw DimensionMismatchError(
        "hand '" + hand.name + "' expects " + std::to_string(hand.dof()) +
        " joint values, got " + std::to_string(Q.size()));
  }
}

Eigen::Matrix<double, 3, Eigen::Dynamic> point_jacobian(
    const ChainFrames& frames, const Eigen::Vector3d& point, int last_joint,
    int dof) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> J =
      Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, dof);
  for (int j = 0; j <= last_joint; ++j) {
    J.col(j) = frames.joint_axis[j].cross(point - frames.joint_origin[j]);
  }
  return J;
}

// One Levenberg-style damped least squares descent for a single finger.
double dls_descend(const HandModel& hand, int finger,
                   const Eigen::Vector3d& target, Eigen::VectorXd& q,
                   int max_iters) {
  const FingerChain& chain = hand.fingers[finger];
  Eigen::VectorXd lo(chain.dof()), hi(chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    lo[j] = chain.joints[j].lower;
    hi[j] = chain.joints[j].upper;
  }
  double lambda = 1e-3;
  double err = (target - walk_chain(chain, q).tip.p).norm();
  for (int it = 0; it < max_iters && err > 1e-8; ++it) {
    const ChainFrames frames = walk_chain(chain, q);
    const Eigen::Vector3d e = target - frames.tip.p;
    const Eigen::Matrix<double, 3, Eigen::Dynamic> J =
        point_jacobian(frames, frames.tip.p, chain.dof() - 1, chain.dof());
    const Eigen::Matrix3d A =
        J * J.transpose() + lambda * Eigen::Matrix3d::Identity();
    const Eigen::VectorXd dq = J.transpose() * A.ldlt().solve(e);
    const Eigen::VectorXd q_new =
        q.cwiseMax(lo).cwiseMin(hi) + dq;  // defensive re-clamp of q
    const Eigen::VectorXd q_clamped = q_new.cwiseMax(lo).cwiseMin(hi);
    const double err_new = (target - walk_chain(chain, q_clamped).tip.p).norm();
    if (err_new < err) {
      q = q_clamped;
      err = err_new;
      lambda = std::max(1e-9, lambda * 0.5);
    } else {
      lambda *= 8.0;
      if (lambda > 1e8) break;
    }
  }
  return err;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("failed to parse JSON in " + path + ": " + e.what());
  }
  return j;
}

Eigen::Vector3d parse_vec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(what + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Pose parse_pose(const nlohmann::json& j, const std::string& what) {
  Pose pose;
  if (j.contains("p")) pose.p = parse_vec3(j["p"], what + ".p");
  if (j.contains("r")) pose.r = RotVec(parse_vec3(j["r"], what + ".r"));
  return pose;
}

}  // namespace

int HandModel::dof() const {
  int n = 0;
  for (const FingerChain& f : fingers) n += f.dof();
  return n;
}

int HandModel::finger_offset(int i) const {
  int n = 0;
  for (int k = 0; k < i; ++k) n += fingers[k].dof();
  return n;
}

int HandModel::finger_index(const std::string& finger_name) const {
  for (int i = 0; i < static_cast<int>(fingers.size()); ++i) {
    if (fingers[i].name == finger_name) return i;
  }
  throw Error("unknown finger name: " + finger_name);
}

Eigen::VectorXd HandModel::lower_limits() const {
  Eigen::VectorXd lo(dof());
  int k = 0;
  for (const FingerChain& f : fingers) {
    for (const JointSpec& j : f.joints) lo[k++] = j.lower;
  }
  return lo;
}

Eigen::VectorXd HandModel::upper_limits() const {
  Eigen::VectorXd hi(dof());
  int k = 0;
  for (const FingerChain& f : fingers) {
    for (const JointSpec& j : f.joints) hi[k++] = j.upper;
  }
  return hi;
}

Eigen::VectorXd HandModel::clamp(const Eigen::VectorXd& Q) const {
  check_joint_count(*this, Q);
  return Q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

Eigen::VectorXd HandModel::mid_range() const {
  return 0.5 * (lower_limits() + upper_limits());
}

Pose fk_fingertip(const HandModel& hand, int finger,
                  const Eigen::VectorXd& q) {
  return walk_chain(hand.fingers[finger], q).tip.to_pose();
}

Eigen::Matrix<double, 6, Eigen::Dynamic> space_jacobian(
    const HandModel& hand, int finger, const Eigen::VectorXd& q) {
  const FingerChain& chain = hand.fingers[finger];
  const ChainFrames frames = walk_chain(chain, q);
  Eigen::Matrix<double, 6, Eigen::Dynamic> J =
      Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    J.block<3, 1>(0, j) =
        frames.joint_axis[j].cross(frames.tip.p - frames.joint_origin[j]);
    J.block<3, 1>(3, j) = frames.joint_axis[j];
  }
  return J;
}

std::vector<Eigen::Vector3d> fingertip_positions(const HandModel& hand,
                                                 const Eigen::VectorXd& Q) {
  check_joint_count(hand, Q);
  std::vector<Eigen::Vector3d> out;
  out.reserve(hand.fingers.size());
  for (int i = 0; i < static_cast<int>(hand.fingers.size()); ++i) {
    const Eigen::VectorXd q =
        Q.segment(hand.finger_offset(i), hand.fingers[i].dof());
    out.push_back(walk_chain(hand.fingers[i], q).tip.p);
  }
  return out;
}

Eigen::Vector3d collision_point_position(const HandModel& hand,
                                         const Eigen::VectorXd& Q,
                                         const CollisionPoint& point) {
  check_joint_count(hand, Q);
  const FingerChain& chain = hand.fingers[point.finger];
  const Eigen::VectorXd q =
      Q.segment(hand.finger_offset(point.finger), chain.dof());
  const ChainFrames frames = walk_chain(chain, q);
  const Frame& f = frames.joint_frame[point.joint];
  return f.R * point.local + f.p;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> collision_point_jacobian(
    const HandModel& hand, const Eigen::VectorXd& Q,
    const CollisionPoint& point) {
  check_joint_count(hand, Q);
  const FingerChain& chain = hand.fingers[point.finger];
  const Eigen::VectorXd q =
      Q.segment(hand.finger_offset(point.finger), chain.dof());
  const ChainFrames frames = walk_chain(chain, q);
  const Frame& f = frames.joint_frame[point.joint];
  const Eigen::Vector3d p = f.R * point.local + f.p;
  return point_jacobian(frames, p, point.joint, chain.dof());
}

Eigen::VectorXd collision_distances(const HandModel& hand,
                                    const Eigen::VectorXd& Q) {
  check_joint_count(hand, Q);
  Eigen::VectorXd d(hand.collision_pairs.size());
  for (int k = 0; k < static_cast<int>(hand.collision_pairs.size()); ++k) {
    const auto& [a, b] = hand.collision_pairs[k];
    d[k] = (collision_point_position(hand, Q, hand.collision_points[a]) -
            collision_point_position(hand, Q, hand.collision_points[b]))
               .norm();
  }
  return d;
}

Eigen::VectorXd ik_fingertips(const HandModel& hand,
                              const std::vector<Eigen::Vector3d>& targets,
                              const Eigen::VectorXd& q_seed) {
  if (targets.size() != hand.fingers.size()) {
    throw DimensionMismatchError(
        "expected " + std::to_string(hand.fingers.size()) +
        " fingertip targets, got " + std::to_string(targets.size()));
  }
  check_joint_count(hand, q_seed);
  constexpr double kAcceptResidual = 2e-3;
  constexpr int kMaxIters = 100;

  Eigen::VectorXd Q = hand.clamp(q_seed);
  std::vector<double> residuals(hand.fingers.size(), 0.0);
  bool ok = true;
  for (int i = 0; i < static_cast<int>(hand.fingers.size()); ++i) {
    const int off = hand.finger_offset(i);
    const int dof = hand.fingers[i].dof();
    Eigen::VectorXd q = Q.segment(off, dof);
    double err = dls_descend(hand, i, targets[i], q, kMaxIters);
    // Deterministic jittered restarts rescue seeds stuck at limits.
    std::mt19937_64 rng(0x9E3779B9u + static_cast<unsigned>(i));
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (int attempt = 0; attempt < 3 && err > 1e-5; ++attempt) {
      Eigen::VectorXd q_try = Q.segment(off, dof);
      for (int j = 0; j < dof; ++j) q_try[j] += jitter(rng);
      q_try = q_try.cwiseMax(hand.lower_limits().segment(off, dof))
                  .cwiseMin(hand.upper_limits().segment(off, dof));
      const double err_try = dls_descend(hand, i, targets[i], q_try,
                                         kMaxIters);
      if (err_try < err) {
        err = err_try;
        q = q_try;
      }
    }
    Q.segment(off, dof) = q;
    residuals[i] = err;
    ok = ok && err <= kAcceptResidual;
  }
  if (!ok) {
    std::string msg = "fingertip IK did not converge; residuals (m):";
    for (double r : residuals) msg += " " + std::to_string(r);
    throw IkNotConvergedError(msg, residuals);
  }
  return Q;
}

Eigen::VectorXd ik_fingertips(const HandModel& hand,
                              const std::vector<Eigen::Vector3d>& targets) {
  return ik_fingertips(hand, targets, hand.mid_range());
}

GraspState make_grasp(const HandModel& hand, const Eigen::VectorXd& Q0,
                      const Pose& object_pose0, double inset) {
  check_joint_count(hand, Q0);
  GraspState grasp;
  grasp.Q0 = Q0;
  grasp.object_pose0 = object_pose0;
  const Pose world_to_object = object_pose0.inverse();
  for (int i = 0; i < static_cast<int>(hand.fingers.size()); ++i) {
    const Eigen::VectorXd q =
        Q0.segment(hand.finger_offset(i), hand.fingers[i].dof());
    const Pose tip = fk_fingertip(hand, i, q);
    const Pose rel = world_to_object * tip;
    grasp.grasp_points.push_back(rel.p);
    grasp.grasp_orients.push_back(rel.r);
  }
  if (inset > 0.0) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const Eigen::Vector3d& p : grasp.grasp_points) centroid += p;
    centroid /= static_cast<double>(grasp.grasp_points.size());
    for (Eigen::Vector3d& p : grasp.grasp_points) {
      const Eigen::Vector3d to_centroid = centroid - p;
      const double dist = to_centroid.norm();
      if (dist > 1e-12) p += inset * (to_centroid / dist);
    }
  }
  return grasp;
}

HandModel make_synthetic_hand() {
  constexpr double kHalfPi = 1.5707963267948966;
  const auto make_finger = [](const std::string& name,
                              const Eigen::Vector3d& base_p,
                              double base_yaw) {
    FingerChain f;
    f.name = name;
    f.base_pose = Pose(base_p, RotVec(0.0, 0.0, base_yaw));
    JointSpec abduction;
    abduction.axis = Eigen::Vector3d::UnitZ();
    abduction.lower = -0.6;
    abduction.upper = 0.6;
    f.joints.push_back(abduction);
    const double link[] = {0.0, 0.050, 0.050};
    for (int k = 0; k < 3; ++k) {
      JointSpec flexion;
      flexion.axis = Eigen::Vector3d::UnitY();
      flexion.origin_offset = Pose(Eigen::Vector3d(0.0, 0.0, link[k]),
                                   RotVec::Zero());
      flexion.lower = -0.3;
      flexion.upper = 1.8;
      f.joints.push_back(flexion);
    }
    f.tip_offset = Pose(Eigen::Vector3d(0.0, 0.0, 0.040), RotVec::Zero());
    return f;
  };

  HandModel hand;
  hand.name = "synth-3x4";
  hand.fingers.push_back(
      make_finger("index", {0.030, 0.0, 0.0}, -kHalfPi));
  hand.fingers.push_back(
      make_finger("ring", {-0.030, 0.0, 0.0}, -kHalfPi));
  hand.fingers.push_back(
      make_finger("thumb", {0.0, -0.216, 0.0}, kHalfPi));
  hand.thumb = 2;
  hand.collision_points = {
      {0, 3, {0.0, 0.0, 0.020}},
      {0, 3, {0.0, 0.0, 0.040}},
      {1, 3, {0.0, 0.0, 0.020}},
      {1, 3, {0.0, 0.0, 0.040}},
  };
  hand.collision_pairs = {{0, 2}, {0, 3}, {1, 2}, {1, 3}};
  hand.min_pair_distance = 0.012;
  hand.tip_radius = 0.008;
  return hand;
}

HandModel load_hand_model(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  HandModel hand;
  try {
    hand.name = j.value("name", "");
    for (const auto& jf : j.at("fingers")) {
      FingerChain f;
      f.name = jf.at("name").get<std::string>();
      f.base_pose = parse_pose(jf.at("base_pose"), f.name + ".base_pose");
      const auto& limits = jf.at("limits");
      const auto& joints = jf.at("joints");
      if (limits.size() != joints.size()) {
        throw Error("finger '" + f.name +
                    "': limits and joints count differ");
      }
      for (size_t k = 0; k < joints.size(); ++k) {
        JointSpec joint;
        joint.axis = parse_vec3(joints[k].at("axis"), "joint axis");
        if (std::abs(joint.axis.norm() - 1.0) > 1e-9) {
          throw Error("finger '" + f.name + "' joint " + std::to_string(k) +
                      ": axis must be a unit vector");
        }
        if (joints[k].contains("offset")) {
          joint.origin_offset = parse_pose(joints[k]["offset"], "joint offset");
        }
        joint.lower = limits[k][0].get<double>();
        joint.upper = limits[k][1].get<double>();
        if (joint.lower > joint.upper) {
          throw Error("finger '" + f.name + "' joint " + std::to_string(k) +
                      ": lower limit exceeds upper limit");
        }
        f.joints.push_back(joint);
      }
      f.tip_offset = parse_pose(jf.at("tip_offset"), f.name + ".tip_offset");
      hand.fingers.push_back(f);
    }
    hand.thumb = hand.finger_index(j.at("thumb").get<std::string>());
    for (const auto& jp : j.at("collision_points")) {
      CollisionPoint point;
      point.finger = hand.finger_index(jp.at("finger").get<std::string>());
      point.joint = jp.at("joint").get<int>();
      if (point.joint < 0 ||
          point.joint >= hand.fingers[point.finger].dof()) {
        throw Error("collision point joint index out of range");
      }
      point.local = parse_vec3(jp.at("local"), "collision point local");
      hand.collision_points.push_back(point);
    }
    for (const auto& jp : j.at("collision_pairs")) {
      const int a = jp[0].get<int>();
      const int b = jp[1].get<int>();
      const int n = static_cast<int>(hand.collision_points.size());
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
        throw Error("collision pair indices out of range");
      }
      hand.collision_pairs.emplace_back(a, b);
    }
    hand.min_pair_distance = j.at("min_pair_distance").get<double>();
    hand.tip_radius = j.value("tip_radius", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid hand file " + path + ": " + e.what());
  }
  return hand;
}

}  // namespace ingrasp
