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

#ifndef INGRASP_PIPELINE_HPP_
#define INGRASP_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ingrasp/hand.hpp"
#include "ingrasp/plant.hpp"
#include "ingrasp/se3.hpp"
#include "ingrasp/trajopt.hpp"

namespace ingrasp {

// How a scalar task error against a goal pose is measured. Position goals
// use the translation distance; full-pose goals add the rotation angle
// scaled into meters so one scalar can drive the stop condition.
enum class ErrorMetric {
  kPosition,
  kFullPose,
};

// Meters of equivalent error per radian of orientation error in the
// full-pose metric.
inline constexpr double kRotationErrorScale = 0.05;

// Rotation angle (radians) between a pose and the goal orientation.
double rotation_error(const Pose& pose, const Pose& goal);

// Scalar task error under the chosen metric; meters.
double scalar_error(const Pose& pose, const Pose& goal, ErrorMetric metric);

// Closed-loop execution knobs. Each waypoint is planned once over
// first_steps, executed, and then replanned over replan_steps from the
// sensed state until the sensed error beats the latest plan's terminal
// error, n_replan replans were spent, or the wall-clock budget runs out.
struct LoopConfig {
  int n_replan = 4;
  double time_budget = 20.0;  // seconds per waypoint, wall clock
  int first_steps = 3;
  int replan_steps = 1;
  double first_lambda = 4e-4;
  double replan_lambda = 5e-3;
  bool return_to_initial = true;
  ErrorMetric error_metric = ErrorMetric::kPosition;
  WeightMatrix W_o = default_object_weights();
  WeightMatrix W_f = default_finger_weights();
  bool collision_enabled = true;
  // Plan with the rigid-thumb variant instead of the full optimization.
  bool use_baseline = false;
};

// Per-waypoint outcome. Translation errors are meters measured on the true
// object pose; rotation errors are radians. planned_error comes from the
// first plan (not replans), open_loop_error from the state right after its
// execution, closed_loop_error from the final state. For a dropped
// waypoint every stage reports the error at the drop.
struct WaypointResult {
  Pose goal;
  double planned_error = 0.0;
  double open_loop_error = 0.0;
  double closed_loop_error = 0.0;
  double planned_rot_error = 0.0;
  double open_loop_rot_error = 0.0;
  double closed_loop_rot_error = 0.0;
  int replans_used = 0;
  bool dropped = false;
  double wall_time = 0.0;  // seconds, planning + execution
};

// Belief carried across waypoints: the joint command the hand was last
// sent (commands, not measurements, are what the controller knows) and the
// forward command leg of the current waypoint, kept for the
// return-to-initial retrace.
struct LoopState {
  Eigen::VectorXd Q_belief;
  std::vector<Eigen::VectorXd> forward_commands;
};

// Drives the plant to one absolute goal pose with the plan/execute/replan
// loop. Every plan starts from the freshly sensed object pose with grasp
// references rebuilt at the believed joints, which keeps the planning
// model consistent with the current state: replans execute as relative
// corrections, cancelling systematic tracking offsets to first order.
// Stop conditions are checked in order: replan budget, time budget,
// sensed error below the latest plan's promise.
//
// `state` carries the belief across calls; when null the belief starts at
// grasp.Q0. A drop during the loop is caught and reported through the
// `dropped` flag; calling with an already-dropped plant propagates
// DroppedObjectError. Throws PlanFailedError when the first plan fails on
// both the default solve and a jittered restart; a failed replan ends the
// loop with the current state recorded instead.
WaypointResult reach_waypoint(Plant& plant, const GraspState& grasp,
                              const Pose& goal, const LoopConfig& cfg,
                              LoopState* state = nullptr);

// One task goal relative to the initial object pose: a translation offset
// in meters plus a rotation offset applied on the world side of the
// initial orientation (R_goal = exp(offset_r) * R_0).
struct WaypointGoal {
  Eigen::Vector3d offset_p = Eigen::Vector3d::Zero();
  RotVec offset_r;
};

Pose absolute_goal(const Pose& initial, const WaypointGoal& goal);

// Runs the waypoint sequence on a fresh plant built from (hand, grasp,
// noise). Goals are interpreted relative to grasp.object_pose0. With
// return_to_initial set, the executed forward leg is retraced in reverse
// (ending at grasp.Q0) after each reached waypoint. On a drop the run
// stops and the remaining waypoints are scored at the last known pose
// with dropped = true.
std::vector<WaypointResult> run_scenario(
    const HandModel& hand, const GraspState& grasp,
    const std::vector<WaypointGoal>& waypoints, const LoopConfig& cfg,
    const PerturbationConfig& noise);

// The eight corners of an axis-aligned cube with side `side_m` centered on
// the initial object position, visited `iterations` times. Corner order is
// the binary pattern (-,-,-), (+,-,-), (-,+,-), (+,+,-), (-,-,+), ...
std::vector<WaypointGoal> cube_corner_goals(double side_m,
                                            int iterations = 1);

// One run inside an experiment preset: a goal sequence plus the loop and
// noise settings it should be executed with. `group` keys the aggregated
// summary (e.g. "T=3" or "baseline_5cm").
struct ExperimentRun {
  std::string group;
  std::vector<WaypointGoal> waypoints;
  LoopConfig loop;
  std::string noise_preset = "realistic";
};

struct ExperimentBundle {
  std::string name;
  std::vector<ExperimentRun> runs;
  std::vector<std::uint64_t> seeds;
};

// Named experiment suites:
//   traj_steps_study  open-loop horizon sweep, first_steps in {1,3,5,10}
//   replan_study      replan budget sweep, n_replan in {0,1,4,8}
//   baseline_compare  full vs rigid-thumb planner on 3 cm and 5 cm cubes
//   reachable_space   cube side sweep {1,3,5,7,9} cm, one pass per seed
//   pose_goals        three full-pose goals, zero noise
// Throws UnknownPresetError for anything else.
ExperimentBundle experiment_presets(const std::string& name);

}  // namespace ingrasp

#endif  // INGRASP_PIPELINE_HPP_
