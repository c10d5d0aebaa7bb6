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

#ifndef INGRASP_PLANT_HPP_
#define INGRASP_PLANT_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ingrasp/hand.hpp"
#include "ingrasp/se3.hpp"

namespace ingrasp {

// Noise knobs of the simulated hand-object system. A seed fully determines
// every realization; all standard deviations are >= 0.
struct PerturbationConfig {
  double joint_tracking_std = 0.0;  // rad, per-joint offset on commands
  double contact_drift_std = 0.0;   // m per step, grasp-point random walk
  double sensing_std_pos = 0.0;     // m, reported-pose translation noise
  double sensing_std_rot = 0.0;     // rad, reported-pose rotation noise
  double slip_threshold = 0.008;    // m, registration residual that drops
  std::uint64_t seed = 0;
};

// Named noise presets: "zero" disables every knob; "realistic" matches the
// default simulation profile (0.01 rad tracking, 0.3 mm/step drift, 0.5 mm /
// 0.01 rad sensing, 8 mm slip threshold). Throws UnknownPresetError.
PerturbationConfig noise_preset(const std::string& name, std::uint64_t seed);

// Least-squares rigid alignment (no scaling): returns T minimizing
// sum_i |T * src[i] - dst[i]|^2 with a proper rotation (det +1 enforced by
// the sign-correction rule). If `residuals` is non-null it receives the
// per-point alignment errors |T * src[i] - dst[i]|. Throws
// DegenerateConfigurationError when either set has fewer than three points
// or is collinear/coincident.
Pose register_rigid(const std::vector<Eigen::Vector3d>& src,
                    const std::vector<Eigen::Vector3d>& dst,
                    Eigen::VectorXd* residuals = nullptr);

// Simulator ground truth. grasp_points_current live in the object frame;
// the random walk displaces them each step and they re-settle at the
// fingertip locations after registration, wandering away from the grasp
// reference over time.
struct PlantState {
  Eigen::VectorXd Q_true;
  Pose object_pose_true;
  std::vector<Eigen::Vector3d> grasp_points_current;
  bool dropped = false;
};

// One executed command, for post-hoc inspection and CSV export.
struct StepRecord {
  int step = 0;
  Eigen::VectorXd q_cmd;
  Pose sensed;
  Eigen::VectorXd residuals;
};

// Quasi-static stand-in for the physical hand-object system. Commands move
// the joints (with a per-joint tracking offset drawn once at construction),
// the object pose follows from rigid registration of the drifting grasp
// points onto the fingertip positions, and the reported pose carries
// sensing noise. Construction is the reset operation. A plant is owned by
// one executor at a time; distinct plants run concurrently without
// coordination.
//
// Randomness uses three independent streams (tracking, drift, sensing), so
// identical (grasp, config, call sequence) triples reproduce bit-identical
// state and sensor streams.
class Plant {
 public:
  Plant(const HandModel& hand, const GraspState& grasp,
        const PerturbationConfig& cfg);

  // Moves to the commanded joints, drifts the grasp points, re-derives the
  // true object pose, and returns the sensed pose. Throws
  // DroppedObjectError (terminal) when any registration residual — the
  // per-step grasp-point displacement beyond rigid motion — exceeds the
  // slip threshold, or when called after a drop.
  Pose execute_step(const Eigen::VectorXd& Q_cmd);

  // Reported pose of the current state: true pose plus sensing noise.
  Pose sense();

  const HandModel& hand() const { return hand_; }
  const PlantState& state() const { return state_; }
  const Pose& true_pose() const { return state_.object_pose_true; }
  bool dropped() const { return state_.dropped; }
  int steps() const { return static_cast<int>(log_.size()); }

  // Largest per-finger accumulated grasp-point path length (meters). Grows
  // monotonically with executed steps whenever contact drift is enabled.
  double cumulative_drift() const;

  const std::vector<StepRecord>& log() const { return log_; }

  // Streams the event log as CSV: step, commanded joints, sensed pose,
  // registration residuals.
  void write_event_log(std::ostream& out) const;

 private:
  Eigen::Vector3d gauss3(std::mt19937_64& rng, double std);

  const HandModel& hand_;
  PerturbationConfig cfg_;
  PlantState state_;
  Eigen::VectorXd tracking_offset_;
  std::vector<double> drift_path_;  // per-finger accumulated drift length
  std::vector<StepRecord> log_;
  std::mt19937_64 tracking_rng_;
  std::mt19937_64 drift_rng_;
  std::mt19937_64 sensing_rng_;
};

}  // namespace ingrasp

#endif  // INGRASP_PLANT_HPP_
