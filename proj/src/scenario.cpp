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

#include "ingrasp/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ingrasp/errors.hpp"

namespace ingrasp {
namespace {

using nlohmann::json;

constexpr double kCm = 0.01;                   // cm -> m
constexpr double kDeg = M_PI / 180.0;          // deg -> rad

double require_number(const json& j, const std::string& field) {
  if (!j.is_number()) {
    throw ConfigError("scenario field '" + field + "' must be a number");
  }
  return j.get<double>();
}

std::vector<double> number_list(const json& j, const std::string& field,
                                size_t expected) {
  if (!j.is_array() || (expected != 0 && j.size() != expected)) {
    throw ConfigError("scenario field '" + field + "' must be an array" +
                      (expected ? " of " + std::to_string(expected) +
                                      " numbers"
                                : ""));
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(require_number(v, field));
  return out;
}

Pose pose_from_cm_deg(const std::vector<double>& v) {
  return Pose(Eigen::Vector3d(v[0] * kCm, v[1] * kCm, v[2] * kCm),
              RotVec(v[3] * kDeg, v[4] * kDeg, v[5] * kDeg));
}

WeightMatrix weights_from_list(const std::vector<double>& v) {
  return WeightMatrix(Eigen::Vector3d(v[0], v[1], v[2]),
                      Eigen::Vector3d(v[3], v[4], v[5]));
}

void apply_loop_overrides(const json& j, LoopConfig* loop) {
  if (j.contains("n_replan")) {
    loop->n_replan = j.at("n_replan").get<int>();
  }
  if (j.contains("time_budget_s")) {
    loop->time_budget = require_number(j.at("time_budget_s"), "time_budget_s");
  }
  if (j.contains("first_steps")) {
    loop->first_steps = j.at("first_steps").get<int>();
  }
  if (j.contains("replan_steps")) {
    loop->replan_steps = j.at("replan_steps").get<int>();
  }
  if (j.contains("first_lambda")) {
    loop->first_lambda = require_number(j.at("first_lambda"), "first_lambda");
  }
  if (j.contains("replan_lambda")) {
    loop->replan_lambda =
        require_number(j.at("replan_lambda"), "replan_lambda");
  }
  if (j.contains("return_to_initial")) {
    loop->return_to_initial = j.at("return_to_initial").get<bool>();
  }
  if (j.contains("collision_enabled")) {
    loop->collision_enabled = j.at("collision_enabled").get<bool>();
  }
  if (j.contains("use_baseline")) {
    loop->use_baseline = j.at("use_baseline").get<bool>();
  }
  if (j.contains("object_weights")) {
    loop->W_o = weights_from_list(
        number_list(j.at("object_weights"), "object_weights", 6));
  }
  if (j.contains("finger_weights")) {
    loop->W_f = weights_from_list(
        number_list(j.at("finger_weights"), "finger_weights", 6));
  }
  if (j.contains("error_metric")) {
    const std::string m = j.at("error_metric").get<std::string>();
    if (m == "position") {
      loop->error_metric = ErrorMetric::kPosition;
    } else if (m == "full_pose") {
      loop->error_metric = ErrorMetric::kFullPose;
    } else {
      throw ConfigError("scenario field 'error_metric' must be 'position' "
                        "or 'full_pose', got '" +
                        m + "'");
    }
  }
}

}  // namespace

Scenario default_scenario() {
  Scenario s;
  s.name = "default";
  s.hand = make_synthetic_hand();
  const std::vector<Eigen::Vector3d> targets = {
      {0.036, -0.0828, 0.072}, {-0.036, -0.0828, 0.072}, {0.0, -0.133, 0.072}};
  Eigen::VectorXd seed(12);
  seed << 0.0, 0.0, 1.03, 0.59, 0.0, 0.0, 1.03, 0.59, 0.0, 0.0, 1.03, 0.59;
  const Eigen::VectorXd Q0 = ik_fingertips(s.hand, targets, seed);
  const Pose object(Eigen::Vector3d(0.0, -0.095, 0.072), RotVec::Zero());
  s.grasp = make_grasp(s.hand, Q0, object, 0.0);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed scenario JSON in " + path + ": " + e.what());
  }

  try {
    Scenario s;
    s.name = j.contains("name")
                 ? j.at("name").get<std::string>()
                 : std::filesystem::path(path).stem().string();

    if (j.contains("hand_file")) {
      const std::filesystem::path hand_path =
          std::filesystem::path(path).parent_path() /
          j.at("hand_file").get<std::string>();
      s.hand = load_hand_model(hand_path.string());
    } else {
      s.hand = make_synthetic_hand();
    }

    if (!j.contains("object_pose0_cm_deg")) {
      throw ConfigError("scenario is missing 'object_pose0_cm_deg'");
    }
    const Pose object_pose = pose_from_cm_deg(
        number_list(j.at("object_pose0_cm_deg"), "object_pose0_cm_deg", 6));

    if (!j.contains("grasp")) {
      throw ConfigError("scenario is missing 'grasp'");
    }
    const json& jg = j.at("grasp");
    Eigen::VectorXd Q0;
    double inset = 0.0;
    if (jg.contains("inset_cm")) {
      inset = require_number(jg.at("inset_cm"), "inset_cm") * kCm;
    }
    if (jg.contains("Q0_rad")) {
      const auto q = number_list(jg.at("Q0_rad"), "Q0_rad",
                                 static_cast<size_t>(s.hand.dof()));
      Q0 = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
    } else if (jg.contains("fingertip_targets_cm")) {
      const json& jt = jg.at("fingertip_targets_cm");
      if (!jt.is_array() || jt.size() != s.hand.fingers.size()) {
        throw ConfigError(
            "'fingertip_targets_cm' must list one target per finger");
      }
      std::vector<Eigen::Vector3d> targets;
      for (const auto& t : jt) {
        const auto v = number_list(t, "fingertip_targets_cm", 3);
        targets.emplace_back(v[0] * kCm, v[1] * kCm, v[2] * kCm);
      }
      Eigen::VectorXd seed;
      if (jg.contains("ik_seed_rad")) {
        const auto q = number_list(jg.at("ik_seed_rad"), "ik_seed_rad",
                                   static_cast<size_t>(s.hand.dof()));
        seed = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
      } else {
        seed = 0.5 * (s.hand.lower_limits() + s.hand.upper_limits());
      }
      Q0 = ik_fingertips(s.hand, targets, seed);
    } else {
      throw ConfigError(
          "scenario 'grasp' needs 'Q0_rad' or 'fingertip_targets_cm'");
    }
    s.grasp = make_grasp(s.hand, Q0, object_pose, inset);

    const bool has_pos = j.contains("waypoints_cm");
    const bool has_pose = j.contains("waypoints_cm_deg");
    if (has_pos == has_pose) {
      throw ConfigError(
          "scenario needs exactly one of 'waypoints_cm' or "
          "'waypoints_cm_deg'");
    }
    if (has_pos) {
      for (const auto& w : j.at("waypoints_cm")) {
        const auto v = number_list(w, "waypoints_cm", 3);
        WaypointGoal g;
        g.offset_p = Eigen::Vector3d(v[0] * kCm, v[1] * kCm, v[2] * kCm);
        s.waypoints.push_back(g);
      }
    } else {
      for (const auto& w : j.at("waypoints_cm_deg")) {
        const auto v = number_list(w, "waypoints_cm_deg", 6);
        WaypointGoal g;
        g.offset_p = Eigen::Vector3d(v[0] * kCm, v[1] * kCm, v[2] * kCm);
        g.offset_r = RotVec(v[3] * kDeg, v[4] * kDeg, v[5] * kDeg);
        s.waypoints.push_back(g);
      }
      s.loop.error_metric = ErrorMetric::kFullPose;
    }

    if (j.contains("loop")) apply_loop_overrides(j.at("loop"), &s.loop);
    // Six-component goals only make sense under the full-pose metric and
    // three-component goals under the position metric.
    if (has_pose && s.loop.error_metric != ErrorMetric::kFullPose) {
      throw ConfigError(
          "'waypoints_cm_deg' requires error_metric 'full_pose'");
    }
    if (has_pos && s.loop.error_metric != ErrorMetric::kPosition) {
      throw ConfigError("'waypoints_cm' requires error_metric 'position'");
    }

    if (j.contains("noise_preset")) {
      s.noise_preset = j.at("noise_preset").get<std::string>();
    }
    if (j.contains("seeds")) {
      s.seeds.clear();
      for (const auto& v : j.at("seeds")) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
          throw ConfigError(
              "scenario field 'seeds' must be nonnegative integers");
        }
        s.seeds.push_back(v.get<std::uint64_t>());
      }
      if (s.seeds.empty()) {
        throw ConfigError("scenario field 'seeds' must not be empty");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError("invalid scenario " + path + ": " + e.what());
  }
}

}  // namespace ingrasp
