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

#include "ingrasp/plant.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ingrasp/errors.hpp"

namespace ingrasp {

namespace {

// Distinct stream tags keep the three noise sources independent while a
// single seed still determines all of them.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                    static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(tag)};
  return std::mt19937_64(seq);
}

// Second singular value of the centered point matrix; zero for collinear or
// coincident sets.
double planarity(const std::vector<Eigen::Vector3d>& points) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3Xd centered(3, points.size());
  for (size_t i = 0; i < points.size(); ++i) centered.col(i) = points[i] - mean;
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  return svd.singularValues()(1);
}

}  // namespace

PerturbationConfig noise_preset(const std::string& name, std::uint64_t seed) {
  PerturbationConfig cfg;
  cfg.seed = seed;
  if (name == "zero") {
    return cfg;
  }
  if (name == "realistic") {
    cfg.joint_tracking_std = 0.01;
    cfg.contact_drift_std = 0.3e-3;
    cfg.sensing_std_pos = 0.5e-3;
    cfg.sensing_std_rot = 0.01;
    cfg.slip_threshold = 8e-3;
    return cfg;
  }
  throw UnknownPresetError("unknown noise preset: " + name +
                           " (expected 'zero' or 'realistic')");
}

Pose register_rigid(const std::vector<Eigen::Vector3d>& src,
                    const std::vector<Eigen::Vector3d>& dst,
                    Eigen::VectorXd* residuals) {
  if (src.size() != dst.size()) {
    throw DimensionMismatchError("register_rigid: point counts differ");
  }
  const int n = static_cast<int>(src.size());
  if (n < 3) {
    throw DegenerateConfigurationError(
        "register_rigid: need at least 3 points");
  }
  const double spread_src = planarity(src);
  const double spread_dst = planarity(dst);
  if (spread_src < 1e-12 || spread_dst < 1e-12) {
    throw DegenerateConfigurationError(
        "register_rigid: collinear or coincident points");
  }

  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= n;
  dst_mean /= n;

  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    H += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = svd.matrixV() * svd.matrixU().transpose();
  if (R.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    R = svd.matrixV() * flip * svd.matrixU().transpose();
  }
  const Eigen::Vector3d t = dst_mean - R * src_mean;

  if (residuals != nullptr) {
    residuals->resize(n);
    for (int i = 0; i < n; ++i) {
      (*residuals)(i) = (R * src[i] + t - dst[i]).norm();
    }
  }
  return Pose(t, log_so3(R));
}

Plant::Plant(const HandModel& hand, const GraspState& grasp,
             const PerturbationConfig& cfg)
    : hand_(hand),
      cfg_(cfg),
      tracking_rng_(make_stream(cfg.seed, 1)),
      drift_rng_(make_stream(cfg.seed, 2)),
      sensing_rng_(make_stream(cfg.seed, 3)) {
  if (grasp.grasp_points.size() < 3) {
    throw DegenerateConfigurationError(
        "plant: grasps need at least 3 fingers to pin down a rigid pose");
  }
  state_.Q_true = grasp.Q0;
  state_.object_pose_true = grasp.object_pose0;
  state_.grasp_points_current = grasp.grasp_points;
  drift_path_.assign(grasp.grasp_points.size(), 0.0);

  // The tracking offset is systematic: one draw per joint per reset, held
  // for the plant's lifetime, so feedback can observe and counteract it.
  tracking_offset_ = Eigen::VectorXd::Zero(hand_.dof());
  for (int i = 0; i < hand_.dof(); ++i) {
    tracking_offset_[i] = gauss3(tracking_rng_, cfg_.joint_tracking_std)[0];
  }
}

Eigen::Vector3d Plant::gauss3(std::mt19937_64& rng, double std) {
  if (std <= 0.0) return Eigen::Vector3d::Zero();
  std::normal_distribution<double> n(0.0, std);
  return Eigen::Vector3d(n(rng), n(rng), n(rng));
}

Pose Plant::sense() {
  const Pose& truth = state_.object_pose_true;
  const Eigen::Vector3d dp = gauss3(sensing_rng_, cfg_.sensing_std_pos);
  const Eigen::Vector3d dr = gauss3(sensing_rng_, cfg_.sensing_std_rot);
  const Eigen::Matrix3d R = exp_so3(RotVec(dr)) * truth.rotation();
  return Pose(truth.p + dp, log_so3(R));
}

Pose Plant::execute_step(const Eigen::VectorXd& Q_cmd) {
  if (state_.dropped) {
    throw DroppedObjectError("plant: object already dropped");
  }
  if (Q_cmd.size() != hand_.dof()) {
    throw DimensionMismatchError("plant: command size does not match hand");
  }

  state_.Q_true = hand_.clamp(Q_cmd + tracking_offset_);

  for (size_t i = 0; i < state_.grasp_points_current.size(); ++i) {
    const Eigen::Vector3d step = gauss3(drift_rng_, cfg_.contact_drift_std);
    state_.grasp_points_current[i] += step;
    drift_path_[i] += step.norm();
  }

  const std::vector<Eigen::Vector3d> tips =
      fingertip_positions(hand_, state_.Q_true);
  Eigen::VectorXd residuals;
  state_.object_pose_true =
      register_rigid(state_.grasp_points_current, tips, &residuals);

  const Pose sensed = sense();
  StepRecord record;
  record.step = static_cast<int>(log_.size());
  record.q_cmd = Q_cmd;
  record.sensed = sensed;
  record.residuals = residuals;
  log_.push_back(record);

  if ((residuals.array() > cfg_.slip_threshold).any()) {
    state_.dropped = true;
    throw DroppedObjectError("plant: grasp lost, registration residual " +
                             std::to_string(residuals.maxCoeff()) +
                             " m exceeds slip threshold");
  }

  // Quasi-static rolling: the contacts re-settle at the actual fingertip
  // locations, so the next step's residual measures that step's grasp-point
  // displacement rather than strain accumulated over the whole run.
  const Pose object_inv = state_.object_pose_true.inverse();
  for (size_t i = 0; i < state_.grasp_points_current.size(); ++i) {
    state_.grasp_points_current[i] = object_inv.act(tips[i]);
  }
  return sensed;
}

double Plant::cumulative_drift() const {
  double worst = 0.0;
  for (double d : drift_path_) worst = std::max(worst, d);
  return worst;
}

void Plant::write_event_log(std::ostream& out) const {
  out << "step";
  for (int i = 0; i < hand_.dof(); ++i) out << ",q_cmd_" << i;
  out << ",sensed_x,sensed_y,sensed_z,sensed_rx,sensed_ry,sensed_rz";
  for (size_t i = 0; i < state_.grasp_points_current.size(); ++i) {
    out << ",residual_" << i;
  }
  out << "\n";
  for (const StepRecord& r : log_) {
    out << r.step;
    for (int i = 0; i < r.q_cmd.size(); ++i) out << "," << r.q_cmd[i];
    out << "," << r.sensed.p.x() << "," << r.sensed.p.y() << ","
        << r.sensed.p.z() << "," << r.sensed.r.v.x() << "," << r.sensed.r.v.y()
        << "," << r.sensed.r.v.z();
    for (int i = 0; i < r.residuals.size(); ++i) out << "," << r.residuals[i];
    out << "\n";
  }
}

}  // namespace ingrasp
