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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ingrasp/errors.hpp"
#include "ingrasp/pipeline.hpp"
#include "ingrasp/plant.hpp"
#include "ingrasp/trajopt.hpp"

namespace ingrasp {
namespace {

constexpr double kPi = 3.14159265358979323846;

// The shared cylinder grasp used across the planning tests.
struct Scenario {
  HandModel hand;
  GraspState grasp;
};

Scenario make_scenario() {
  Scenario s;
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

WaypointGoal offset_goal(double dx, double dy, double dz) {
  WaypointGoal g;
  g.offset_p = Eigen::Vector3d(dx, dy, dz);
  return g;
}

TEST_CASE("scalar and rotation error metrics") {
  const Pose goal(Eigen::Vector3d(0.1, -0.2, 0.3), RotVec::Zero());
  const Pose off(Eigen::Vector3d(0.1, -0.2 + 0.004, 0.3),
                 RotVec(0.0, 0.0, 0.3));

  CHECK(rotation_error(goal, goal) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rotation_error(off, goal) == doctest::Approx(0.3).epsilon(1e-12));

  CHECK(scalar_error(off, goal, ErrorMetric::kPosition) ==
        doctest::Approx(0.004).epsilon(1e-12));
  CHECK(scalar_error(off, goal, ErrorMetric::kFullPose) ==
        doctest::Approx(0.004 + kRotationErrorScale * 0.3).epsilon(1e-12));
}

TEST_CASE("absolute goals compose offsets on the world side") {
  const Pose initial(Eigen::Vector3d(0.02, -0.09, 0.07),
                     RotVec(0.2, -0.1, 0.4));
  WaypointGoal g;
  g.offset_p = Eigen::Vector3d(0.01, -0.02, 0.03);
  g.offset_r = RotVec(0.0, 0.5, 0.0);

  const Pose goal = absolute_goal(initial, g);
  CHECK((goal.p - (initial.p + g.offset_p)).norm() < 1e-15);
  const Eigen::Matrix3d expected =
      exp_so3(g.offset_r) * initial.rotation();
  CHECK((goal.rotation() - expected).norm() < 1e-12);

  // A zero offset reproduces the initial pose.
  const Pose same = absolute_goal(initial, WaypointGoal{});
  CHECK((same.p - initial.p).norm() == 0.0);
  CHECK((same.rotation() - initial.rotation()).norm() < 1e-12);
}

TEST_CASE("cube corner goals enumerate all sign patterns") {
  const double side = 0.05;
  const auto goals = cube_corner_goals(side, 2);
  REQUIRE(goals.size() == 16);

  for (int c = 0; c < 8; ++c) {
    const Eigen::Vector3d& p = goals[c].offset_p;
    CHECK(std::abs(p.x()) == doctest::Approx(side / 2));
    CHECK(std::abs(p.y()) == doctest::Approx(side / 2));
    CHECK(std::abs(p.z()) == doctest::Approx(side / 2));
    CHECK(goals[c].offset_r.angle() == 0.0);
    // The second iteration repeats the first, corner for corner.
    CHECK((goals[c + 8].offset_p - p).norm() == 0.0);
  }
  // All eight sign patterns are distinct.
  for (int a = 0; a < 8; ++a) {
    for (int b = a + 1; b < 8; ++b) {
      CHECK((goals[a].offset_p - goals[b].offset_p).norm() > side / 2);
    }
  }
  CHECK(cube_corner_goals(side, 1).size() == 8);
}

TEST_CASE("goal at the current pose needs no replanning") {
  const Scenario s = make_scenario();
  Plant plant(s.hand, s.grasp, noise_preset("zero", 3));

  LoopConfig cfg;  // defaults allow up to 4 replans
  const WaypointResult r =
      reach_waypoint(plant, s.grasp, s.grasp.object_pose0, cfg);

  CHECK(!r.dropped);
  CHECK(r.replans_used == 0);
  CHECK(r.planned_error < 1e-6);
  CHECK(r.open_loop_error < 1e-6);
  CHECK(r.closed_loop_error < 1e-6);
  CHECK(r.closed_loop_rot_error < 1e-6);
}

TEST_CASE("zero replan budget reproduces the open-loop command stream") {
  const Scenario s = make_scenario();
  const Pose goal =
      absolute_goal(s.grasp.object_pose0, offset_goal(0.01, 0.0, 0.0));
  const PerturbationConfig noise = noise_preset("realistic", 7);

  // Manual open-loop rollout: sense, plan once at the believed joints
  // anchored to the sensed pose, execute every planned command.
  Plant manual(s.hand, s.grasp, noise);
  const Pose sensed = manual.sense();
  TrajProblem prob;
  prob.hand = s.hand;
  prob.grasp = make_grasp(s.hand, s.grasp.Q0, sensed, 0.0);
  prob.goal = goal;
  prob.steps = 3;
  prob.lambda = 4e-4;
  const TrajSolution sol = solve(prob);
  for (int t = 0; t < sol.vars.steps(); ++t) {
    manual.execute_step(sol.vars.joints(t));
  }

  Plant looped(s.hand, s.grasp, noise);
  LoopConfig cfg;
  cfg.n_replan = 0;
  const WaypointResult r = reach_waypoint(looped, s.grasp, goal, cfg);

  // Same commands, same noise stream consumption: the true state must
  // match bit for bit, and no extra sensing may have happened.
  CHECK(r.replans_used == 0);
  for (int k = 0; k < 3; ++k) {
    CHECK(looped.true_pose().p(k) == manual.true_pose().p(k));
    CHECK(looped.true_pose().r.v(k) == manual.true_pose().r.v(k));
  }
  CHECK(looped.steps() == manual.steps());
  CHECK(r.open_loop_error == (manual.true_pose().p - goal.p).norm());
  CHECK(r.closed_loop_error == r.open_loop_error);
}

TEST_CASE("loop configuration is validated") {
  const Scenario s = make_scenario();
  Plant plant(s.hand, s.grasp, noise_preset("zero", 1));
  const Pose goal = s.grasp.object_pose0;

  LoopConfig bad;
  bad.n_replan = -1;
  CHECK_THROWS_AS(reach_waypoint(plant, s.grasp, goal, bad), Error);
  bad = LoopConfig{};
  bad.time_budget = 0.0;
  CHECK_THROWS_AS(reach_waypoint(plant, s.grasp, goal, bad), Error);
  bad = LoopConfig{};
  bad.first_steps = 0;
  CHECK_THROWS_AS(reach_waypoint(plant, s.grasp, goal, bad), Error);
  bad = LoopConfig{};
  bad.replan_steps = 0;
  CHECK_THROWS_AS(reach_waypoint(plant, s.grasp, goal, bad), Error);
}

TEST_CASE("a dropped plant refuses further waypoints") {
  const Scenario s = make_scenario();
  Plant plant(s.hand, s.grasp, noise_preset("zero", 1));

  // Yank one finger far away: the non-rigid tip motion exceeds any slip
  // threshold and drops the object.
  Eigen::VectorXd q = s.grasp.Q0;
  q(2) += 0.8;
  CHECK_THROWS_AS(plant.execute_step(q), DroppedObjectError);
  CHECK(plant.dropped());

  CHECK_THROWS_AS(
      reach_waypoint(plant, s.grasp, s.grasp.object_pose0, LoopConfig{}),
      DroppedObjectError);
}

TEST_CASE("time budget stops the loop after the first plan") {
  const Scenario s = make_scenario();
  Plant plant(s.hand, s.grasp, noise_preset("realistic", 11));

  LoopConfig cfg;
  cfg.n_replan = 8;
  cfg.time_budget = 1e-9;  // expires immediately, but planning still runs
  const Pose goal =
      absolute_goal(s.grasp.object_pose0, offset_goal(0.01, 0.0, 0.0));
  const WaypointResult r = reach_waypoint(plant, s.grasp, goal, cfg);

  CHECK(r.replans_used == 0);
  CHECK(!r.dropped);
  CHECK(r.planned_error < 0.005);  // the first plan was made and executed
  CHECK(plant.steps() == 3);
}

TEST_CASE("contact drift grows with the replan budget, never shrinks") {
  const Scenario s = make_scenario();
  const Pose goal =
      absolute_goal(s.grasp.object_pose0, offset_goal(0.0, 0.0, 0.03));

  std::vector<std::pair<int, double>> used_vs_drift;
  for (int n : {0, 1, 4, 8}) {
    Plant plant(s.hand, s.grasp, noise_preset("realistic", 21));
    LoopConfig cfg;
    cfg.n_replan = n;
    const WaypointResult r = reach_waypoint(plant, s.grasp, goal, cfg);
    CHECK(!r.dropped);
    CHECK(r.replans_used <= n);
    used_vs_drift.emplace_back(r.replans_used, plant.cumulative_drift());
  }

  std::sort(used_vs_drift.begin(), used_vs_drift.end());
  for (size_t i = 1; i < used_vs_drift.size(); ++i) {
    CHECK(used_vs_drift[i].second >= used_vs_drift[i - 1].second);
  }
  // The budget sweep must actually exercise different replan counts.
  CHECK(used_vs_drift.front().first == 0);
  CHECK(used_vs_drift.back().first >= 2);
}

TEST_CASE("return-to-initial resets state: zero-noise iterations replay") {
  const Scenario s = make_scenario();

  // Two passes over the same corners with the hand returning home after
  // every waypoint: the plant state is restored each time, so the second
  // pass reproduces the first. The retrace is a second-order-exact
  // inverse (the contacts re-settle by the registration residual, ~0.3 mm,
  // each step), so the replay agrees to microns rather than bit-for-bit;
  // 10 um is ~1% of the per-corner error signal.
  LoopConfig cfg;
  cfg.n_replan = 0;
  cfg.return_to_initial = true;
  const auto goals = cube_corner_goals(0.03, 2);
  const auto results =
      run_scenario(s.hand, s.grasp, goals, cfg, noise_preset("zero", 1));
  REQUIRE(results.size() == 16);
  for (int c = 0; c < 8; ++c) {
    CHECK(!results[c].dropped);
    CHECK(!results[c + 8].dropped);
    CHECK(std::abs(results[c + 8].planned_error - results[c].planned_error) <
          1e-5);
    CHECK(std::abs(results[c + 8].closed_loop_error -
                   results[c].closed_loop_error) < 1e-5);
  }
}

TEST_CASE("without the return leg a repeated goal is already satisfied") {
  const Scenario s = make_scenario();

  LoopConfig cfg;
  cfg.n_replan = 0;
  cfg.return_to_initial = false;
  const WaypointGoal g = offset_goal(0.02, 0.0, 0.0);
  const auto results = run_scenario(s.hand, s.grasp, {g, g}, cfg,
                                    noise_preset("zero", 1));
  REQUIRE(results.size() == 2);
  CHECK(!results[0].dropped);
  CHECK(!results[1].dropped);
  // The second visit starts at the goal, so its plan only has to close
  // the first plan's shortfall.
  CHECK(results[1].closed_loop_error < results[0].closed_loop_error);
  CHECK(results[1].closed_loop_error < 2e-4);
}

TEST_CASE("full-pose goals converge without sensor noise") {
  const Scenario s = make_scenario();
  const ExperimentBundle bundle = experiment_presets("pose_goals");
  REQUIRE(bundle.runs.size() == 1);
  const ExperimentRun& run = bundle.runs[0];
  REQUIRE(run.waypoints.size() == 3);
  REQUIRE(bundle.seeds.size() == 1);

  const auto results =
      run_scenario(s.hand, s.grasp, run.waypoints, run.loop,
                   noise_preset(run.noise_preset, bundle.seeds[0]));
  REQUIRE(results.size() == 3);
  for (const WaypointResult& r : results) {
    CHECK(!r.dropped);
    CHECK(r.closed_loop_error < 0.003);                    // < 3 mm
    CHECK(r.closed_loop_rot_error < 5.0 * kPi / 180.0);    // < 5 deg
  }
}

TEST_CASE("a drop freezes the remaining waypoints at the last pose") {
  const Scenario s = make_scenario();

  // Zero noise but an impossible slip tolerance: the first executed step
  // drops the object, and the rest of the scenario is scored in place.
  PerturbationConfig noise;  // all-zero noise
  noise.slip_threshold = 1e-12;
  noise.seed = 1;

  LoopConfig cfg;
  const std::vector<WaypointGoal> goals = {offset_goal(0.01, 0.0, 0.0),
                                           offset_goal(0.0, 0.01, 0.0),
                                           offset_goal(0.0, 0.0, 0.01)};
  const auto results = run_scenario(s.hand, s.grasp, goals, cfg, noise);
  REQUIRE(results.size() == 3);
  for (const WaypointResult& r : results) CHECK(r.dropped);
  for (size_t i = 1; i < results.size(); ++i) {
    const WaypointResult& r = results[i];
    CHECK(r.planned_error == r.open_loop_error);
    CHECK(r.open_loop_error == r.closed_loop_error);
    CHECK(r.closed_loop_error > 0.0);
    CHECK(r.replans_used == 0);
  }
}

TEST_CASE("empty waypoint lists produce empty results") {
  const Scenario s = make_scenario();
  const auto results = run_scenario(s.hand, s.grasp, {}, LoopConfig{},
                                    noise_preset("zero", 1));
  CHECK(results.empty());
}

TEST_CASE("experiment presets enumerate the study grid") {
  const ExperimentBundle steps = experiment_presets("traj_steps_study");
  REQUIRE(steps.runs.size() == 4);
  const int horizons[] = {1, 3, 5, 10};
  for (size_t i = 0; i < steps.runs.size(); ++i) {
    CHECK(steps.runs[i].group ==
          "T=" + std::to_string(horizons[i]));
    CHECK(steps.runs[i].loop.first_steps == horizons[i]);
    CHECK(steps.runs[i].loop.n_replan == 0);
    CHECK(steps.runs[i].waypoints.size() == 40);
  }
  CHECK(steps.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});

  const ExperimentBundle replans = experiment_presets("replan_study");
  REQUIRE(replans.runs.size() == 4);
  const int budgets[] = {0, 1, 4, 8};
  for (size_t i = 0; i < replans.runs.size(); ++i) {
    CHECK(replans.runs[i].loop.n_replan == budgets[i]);
    CHECK(replans.runs[i].waypoints.size() == 40);
  }

  const ExperimentBundle base = experiment_presets("baseline_compare");
  REQUIRE(base.runs.size() == 4);
  CHECK(base.runs[0].group == "proposed_3cm");
  CHECK(!base.runs[0].loop.use_baseline);
  CHECK(base.runs[1].group == "baseline_3cm");
  CHECK(base.runs[1].loop.use_baseline);
  CHECK(base.runs[1].loop.n_replan == 8);
  CHECK(base.runs[3].group == "baseline_5cm");
  CHECK(base.runs[3].loop.n_replan == 4);

  const ExperimentBundle reach = experiment_presets("reachable_space");
  REQUIRE(reach.runs.size() == 5);
  for (const ExperimentRun& run : reach.runs) {
    CHECK(run.waypoints.size() == 8);
    CHECK(run.loop.n_replan == 4);
  }
  CHECK(reach.runs[0].group == "side=1cm");
  CHECK(reach.runs[4].group == "side=9cm");

  const ExperimentBundle pose = experiment_presets("pose_goals");
  CHECK(pose.runs[0].noise_preset == "zero");
  CHECK(pose.runs[0].loop.error_metric == ErrorMetric::kFullPose);
  CHECK(pose.runs[0].loop.n_replan == 8);
  CHECK(pose.runs[0].loop.W_o.w_r.x() == doctest::Approx(1.0));

  CHECK_THROWS_AS(experiment_presets("nope"), UnknownPresetError);
}

}  // namespace
}  // namespace ingrasp
