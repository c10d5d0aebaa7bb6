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

#include "ingrasp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "ingrasp/errors.hpp"

namespace ingrasp {
namespace {

using Clock = std::chrono::steady_clock;

// Stop tolerances of the replan loop. The sensed error must beat the
// latest plan's promise by a clear margin before the loop declares
// success: without the margin, a perfectly executed plan (sensed equal to
// planned up to registration fidelity) would count as "smaller" on a coin
// flip and freeze the error at the first plan's shortfall. The floor stops
// immediately once the goal is met to numerical precision.
constexpr double kStopMargin = 3e-4;  // m
constexpr double kErrorFloor = 1e-6;  // m

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TrajProblem make_problem(const HandModel& hand, GraspState grasp,
                         const Pose& goal, int steps, double lambda,
                         const LoopConfig& cfg) {
  TrajProblem prob;
  prob.hand = hand;
  prob.grasp = std::move(grasp);
  prob.goal = goal;
  prob.steps = steps;
  prob.lambda = lambda;
  prob.W_o = cfg.W_o;
  prob.W_f = cfg.W_f;
  prob.collision_enabled = cfg.collision_enabled;
  return prob;
}

// One planning attempt with the loop's planner choice. The full planner
// gets a second chance from a jittered initialization when the default
// solve fails; SolverFailedError propagates only after that.
TrajSolution plan_waypoint(const TrajProblem& prob, bool use_baseline,
                           std::uint64_t jitter_seed) {
  if (use_baseline) return solve_baseline(prob);
  try {
    return solve(prob);
  } catch (const SolverFailedError&) {
  }
  TrajVariables seed = default_initialization(prob);
  std::mt19937_64 rng(jitter_seed);
  std::normal_distribution<double> jitter(0.0, 1e-3);
  for (int t = 0; t < static_cast<int>(seed.xi.rows()); ++t) {
    for (int k = 0; k < 6; ++k) seed.xi(t, k) += jitter(rng);
  }
  return solve(prob, seed);
}

}  // namespace

double rotation_error(const Pose& pose, const Pose& goal) {
  return log_so3(pose.rotation() * goal.rotation().transpose()).angle();
}

double scalar_error(const Pose& pose, const Pose& goal, ErrorMetric metric) {
  const double pos = (pose.p - goal.p).norm();
  if (metric == ErrorMetric::kPosition) return pos;
  return pos + kRotationErrorScale * rotation_error(pose, goal);
}

Pose absolute_goal(const Pose& initial, const WaypointGoal& goal) {
  const Eigen::Matrix3d R = exp_so3(goal.offset_r) * initial.rotation();
  return Pose(initial.p + goal.offset_p, log_so3(R));
}

WaypointResult reach_waypoint(Plant& plant, const GraspState& grasp,
                              const Pose& goal, const LoopConfig& cfg,
                              LoopState* state) {
  if (cfg.n_replan < 0) {
    throw Error("reach_waypoint: replan budget must be nonnegative");
  }
  if (cfg.time_budget <= 0.0) {
    throw Error("reach_waypoint: time budget must be positive");
  }
  if (cfg.first_steps < 1 || cfg.replan_steps < 1) {
    throw Error("reach_waypoint: trajectory steps must be >= 1");
  }
  if (plant.dropped()) {
    throw DroppedObjectError("reach_waypoint: plant already dropped");
  }

  const auto t0 = Clock::now();
  const HandModel& hand = plant.hand();

  LoopState local;
  LoopState& st = state ? *state : local;
  if (st.Q_belief.size() == 0) st.Q_belief = grasp.Q0;
  st.forward_commands.clear();

  WaypointResult result;
  result.goal = goal;

  auto execute_plan = [&](const TrajSolution& sol) {
    for (int t = 0; t < sol.vars.steps(); ++t) {
      const Eigen::VectorXd q = sol.vars.joints(t);
      st.forward_commands.push_back(q);
      st.Q_belief = q;
      plant.execute_step(q);
    }
  };
  auto record_true = [&](double* pos, double* rot) {
    *pos = (plant.true_pose().p - goal.p).norm();
    *rot = rotation_error(plant.true_pose(), goal);
  };

  // Every plan rebuilds the grasp references from the believed joints and
  // the sensed pose. That keeps the planning model consistent at the
  // current state (believed fingertips sit exactly on the references), so
  // a replan executes as a relative correction from where the object
  // really is; systematic tracking offsets and contact wander then cancel
  // to first order instead of accumulating into the model.
  auto anchored_grasp = [&](const Pose& sensed) {
    return make_grasp(hand, st.Q_belief, sensed, 0.0);
  };

  double planned_scalar = 0.0;
  bool open_recorded = false;
  try {
    Pose sensed = plant.sense();
    TrajProblem prob = make_problem(hand, anchored_grasp(sensed), goal,
                                    cfg.first_steps, cfg.first_lambda, cfg);
    TrajSolution sol;
    try {
      sol = plan_waypoint(prob, cfg.use_baseline, 0x9e3779b97f4a7c15ull);
    } catch (const SolverFailedError& e) {
      throw PlanFailedError(std::string("waypoint first plan failed: ") +
                            e.what());
    }
    const Pose planned_pose = sol.vars.object_pose(sol.vars.steps() - 1);
    result.planned_error = (planned_pose.p - goal.p).norm();
    result.planned_rot_error = rotation_error(planned_pose, goal);
    planned_scalar = scalar_error(planned_pose, goal, cfg.error_metric);

    execute_plan(sol);
    record_true(&result.open_loop_error, &result.open_loop_rot_error);
    open_recorded = true;

    while (true) {
      if (result.replans_used >= cfg.n_replan) break;
      if (seconds_since(t0) >= cfg.time_budget) break;
      sensed = plant.sense();
      const double sensed_scalar =
          scalar_error(sensed, goal, cfg.error_metric);
      if (sensed_scalar < kErrorFloor ||
          sensed_scalar + kStopMargin < planned_scalar) {
        break;
      }

      prob = make_problem(hand, anchored_grasp(sensed), goal,
                          cfg.replan_steps, cfg.replan_lambda, cfg);
      TrajSolution rsol;
      try {
        rsol = plan_waypoint(
            prob, cfg.use_baseline,
            0x9e3779b97f4a7c15ull + 1 + result.replans_used);
      } catch (const SolverFailedError&) {
        break;  // keep what execution achieved so far
      }
      planned_scalar = scalar_error(
          rsol.vars.object_pose(rsol.vars.steps() - 1), goal,
          cfg.error_metric);
      execute_plan(rsol);
      ++result.replans_used;
    }
  } catch (const DroppedObjectError&) {
    result.dropped = true;
  }

  record_true(&result.closed_loop_error, &result.closed_loop_rot_error);
  if (!open_recorded) {
    result.open_loop_error = result.closed_loop_error;
    result.open_loop_rot_error = result.closed_loop_rot_error;
  }
  result.wall_time = seconds_since(t0);
  return result;
}

std::vector<WaypointResult> run_scenario(
    const HandModel& hand, const GraspState& grasp,
    const std::vector<WaypointGoal>& waypoints, const LoopConfig& cfg,
    const PerturbationConfig& noise) {
  std::vector<WaypointResult> results;
  if (waypoints.empty()) return results;

  Plant plant(hand, grasp, noise);
  LoopState state;
  state.Q_belief = grasp.Q0;

  bool dead = false;
  Pose last_pose = grasp.object_pose0;
  for (const WaypointGoal& wp : waypoints) {
    const Pose goal = absolute_goal(grasp.object_pose0, wp);
    if (dead) {
      // Competition rule: after a drop the remaining goals are scored at
      // the pose where the object was lost.
      WaypointResult r;
      r.goal = goal;
      r.dropped = true;
      r.planned_error = r.open_loop_error = r.closed_loop_error =
          (last_pose.p - goal.p).norm();
      r.planned_rot_error = r.open_loop_rot_error = r.closed_loop_rot_error =
          rotation_error(last_pose, goal);
      results.push_back(r);
      continue;
    }

    WaypointResult r = reach_waypoint(plant, grasp, goal, cfg, &state);
    results.push_back(r);
    last_pose = plant.true_pose();
    if (r.dropped) {
      dead = true;
      continue;
    }

    if (cfg.return_to_initial) {
      // Retrace the forward leg in reverse, ending at the grasp
      // configuration: the home state is the best start for the next goal.
      std::vector<Eigen::VectorXd> retrace(state.forward_commands.rbegin(),
                                           state.forward_commands.rend());
      if (!retrace.empty()) retrace.erase(retrace.begin());
      retrace.push_back(grasp.Q0);
      try {
        for (const Eigen::VectorXd& q : retrace) {
          state.Q_belief = q;
          plant.execute_step(q);
        }
      } catch (const DroppedObjectError&) {
        dead = true;
      }
      last_pose = plant.true_pose();
    }
  }
  return results;
}

std::vector<WaypointGoal> cube_corner_goals(double side_m, int iterations) {
  std::vector<WaypointGoal> goals;
  const double h = 0.5 * side_m;
  for (int it = 0; it < iterations; ++it) {
    for (int c = 0; c < 8; ++c) {
      WaypointGoal g;
      g.offset_p = Eigen::Vector3d((c & 1) ? h : -h, (c & 2) ? h : -h,
                                   (c & 4) ? h : -h);
      goals.push_back(g);
    }
  }
  return goals;
}

ExperimentBundle experiment_presets(const std::string& name) {
  ExperimentBundle bundle;
  bundle.name = name;
  bundle.seeds = {1, 2, 3, 4, 5};

  if (name == "traj_steps_study") {
    for (int T : {1, 3, 5, 10}) {
      ExperimentRun run;
      run.group = "T=" + std::to_string(T);
      run.waypoints = cube_corner_goals(0.05, 5);
      run.loop.first_steps = T;
      run.loop.n_replan = 0;
      bundle.runs.push_back(run);
    }
  } else if (name == "replan_study") {
    for (int n : {0, 1, 4, 8}) {
      ExperimentRun run;
      run.group = "N=" + std::to_string(n);
      run.waypoints = cube_corner_goals(0.05, 5);
      run.loop.n_replan = n;
      bundle.runs.push_back(run);
    }
  } else if (name == "baseline_compare") {
    const struct {
      const char* label;
      double side;
      int n_replan;
      bool baseline;
    } cases[] = {
        {"proposed_3cm", 0.03, 8, false},
        {"baseline_3cm", 0.03, 8, true},
        {"proposed_5cm", 0.05, 4, false},
        {"baseline_5cm", 0.05, 4, true},
    };
    for (const auto& c : cases) {
      ExperimentRun run;
      run.group = c.label;
      run.waypoints = cube_corner_goals(c.side, 5);
      run.loop.n_replan = c.n_replan;
      run.loop.use_baseline = c.baseline;
      bundle.runs.push_back(run);
    }
  } else if (name == "reachable_space") {
    for (int side_cm : {1, 3, 5, 7, 9}) {
      ExperimentRun run;
      run.group = "side=" + std::to_string(side_cm) + "cm";
      run.waypoints = cube_corner_goals(0.01 * side_cm, 1);
      run.loop.n_replan = 4;
      bundle.runs.push_back(run);
    }
  } else if (name == "pose_goals") {
    const double deg = M_PI / 180.0;
    ExperimentRun run;
    run.group = "pose_goals";
    run.noise_preset = "zero";
    run.loop.error_metric = ErrorMetric::kFullPose;
    run.loop.n_replan = 8;
    run.loop.W_o = WeightMatrix(Eigen::Vector3d(10.0, 10.0, 10.0),
                                Eigen::Vector3d(1.0, 1.0, 1.0));
    WaypointGoal g1;
    g1.offset_p = Eigen::Vector3d(0.0, -0.01, -0.01);
    g1.offset_r = RotVec(0.0, 20.0 * deg, 0.0);
    WaypointGoal g2;
    g2.offset_p = Eigen::Vector3d(-0.02, 0.0, 0.0);
    g2.offset_r = RotVec(30.0 * deg, 0.0, 0.0);
    WaypointGoal g3;
    g3.offset_p = Eigen::Vector3d(0.0, 0.0, 0.02);
    g3.offset_r = RotVec(0.0, 0.0, 40.0 * deg);
    run.waypoints = {g1, g2, g3};
    bundle.runs.push_back(run);
    bundle.seeds = {1};
  } else {
    throw UnknownPresetError("unknown experiment preset: " + name);
  }
  return bundle;
}

}  // namespace ingrasp
