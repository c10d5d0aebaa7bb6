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

#ifndef INGRASP_SCENARIO_HPP_
#define INGRASP_SCENARIO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ingrasp/hand.hpp"
#include "ingrasp/pipeline.hpp"

namespace ingrasp {

// A fully resolved task description: the hand, the initial grasp, the
// goal sequence, and the execution settings. Scenario files use
// centimeters and degrees (unit-suffixed field names); everything here is
// already converted to meters and radians.
struct Scenario {
  std::string name;  // scenario_id in result tables
  HandModel hand;
  GraspState grasp;
  std::vector<WaypointGoal> waypoints;
  LoopConfig loop;
  std::string noise_preset = "realistic";
  std::vector<std::uint64_t> seeds = {1};
};

// Parses a scenario JSON file. Field reference (suffix = unit at the file
// boundary):
//   name                  string, defaults to the file stem
//   hand_file             path, resolved relative to the scenario file;
//                         omit to use the built-in synthetic hand
//   object_pose0_cm_deg   [x, y, z, rx, ry, rz]
//   grasp                 {"Q0_rad": [...]} or
//                         {"fingertip_targets_cm": [[...], ...],
//                          "ik_seed_rad": [...], "inset_cm": 0}
//   waypoints_cm          [[x, y, z], ...]          (position goals)
//   waypoints_cm_deg      [[x, y, z, rx, ry, rz], ...]  (pose goals)
//   loop                  optional overrides: n_replan, time_budget_s,
//                         first_steps, replan_steps, first_lambda,
//                         replan_lambda, return_to_initial, error_metric
//                         ("position"/"full_pose"), object_weights (6),
//                         finger_weights (6), collision_enabled,
//                         use_baseline
//   noise_preset          string, default "realistic"
//   seeds                 [ints], default [1]
// Waypoint dimensionality must match the error metric: 6-vector goals
// require (and imply) "full_pose". Throws ConfigError with the offending
// path or field named.
Scenario load_scenario(const std::string& path);

// The built-in rig used by experiment presets and as the template for the
// shipped scenario files: the synthetic hand holding a 60 mm cylinder in
// front of the palm. No waypoints; default loop settings.
Scenario default_scenario();

}  // namespace ingrasp

#endif  // INGRASP_SCENARIO_HPP_
