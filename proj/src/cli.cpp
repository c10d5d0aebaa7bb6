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

#include "ingrasp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ingrasp/errors.hpp"
#include "ingrasp/gradcheck.hpp"
#include "ingrasp/pipeline.hpp"
#include "ingrasp/plant.hpp"
#include "ingrasp/scenario.hpp"
#include "ingrasp/trajopt.hpp"

namespace ingrasp {
namespace {

using nlohmann::ordered_json;

constexpr double kCm = 0.01;
constexpr double kDeg = M_PI / 180.0;
constexpr const char* kCsvSchema = "# ingrasp-results-v1";
constexpr const char* kCsvColumns =
    "scenario_id,seed,waypoint_idx,goal_x_cm,goal_y_cm,goal_z_cm,"
    "planned_err_cm,open_loop_err_cm,closed_loop_err_cm,replans,dropped,"
    "wall_time_s";

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Output directory resolution: the INGRASP_OUT environment variable wins
// over the flag; the default is the working directory.
std::string resolve_out_dir(const std::string& flag) {
  const char* env = std::getenv("INGRASP_OUT");
  std::string dir = (env && *env) ? std::string(env)
                                  : (flag.empty() ? std::string(".") : flag);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
  return dir;
}

std::vector<double> pose_to_cm_deg(const Pose& pose) {
  return {pose.p.x() / kCm,   pose.p.y() / kCm,   pose.p.z() / kCm,
          pose.r.v.x() / kDeg, pose.r.v.y() / kDeg, pose.r.v.z() / kDeg};
}

// ---------------------------------------------------------------------
// run: closed-loop execution over seeds (scenario file or experiment
// preset), CSV rows plus a grouped JSON summary.
// ---------------------------------------------------------------------

struct RunTask {
  std::string scenario_id;
  const HandModel* hand = nullptr;
  const GraspState* grasp = nullptr;
  const std::vector<WaypointGoal>* waypoints = nullptr;
  LoopConfig loop;
  std::string noise;
  std::uint64_t seed = 0;
  int group_index = 0;
};

struct TaskOutcome {
  bool failed = false;
  std::string error;
  std::vector<WaypointResult> results;
};

std::vector<TaskOutcome> run_tasks(const std::vector<RunTask>& tasks,
                                   int jobs) {
  std::vector<TaskOutcome> outcomes(tasks.size());
  std::atomic<size_t> next{0};
  const auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks.size();
         i = next.fetch_add(1)) {
      const RunTask& t = tasks[i];
      try {
        outcomes[i].results =
            run_scenario(*t.hand, *t.grasp, *t.waypoints, t.loop,
                         noise_preset(t.noise, t.seed));
      } catch (const std::exception& e) {
        outcomes[i].failed = true;
        outcomes[i].error = e.what();
      }
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return outcomes;
}

struct GroupSpec {
  std::string scenario_id;
  std::vector<WaypointGoal> waypoints;
  LoopConfig loop;
  std::string noise;
};

int execute_run(const std::string& run_name, const Scenario& rig,
                const std::vector<GroupSpec>& groups,
                const std::vector<std::uint64_t>& seeds, int jobs,
                const std::string& out_dir, bool timing, std::ostream& out,
                std::ostream& err) {
  std::vector<RunTask> tasks;
  for (size_t g = 0; g < groups.size(); ++g) {
    for (const std::uint64_t seed : seeds) {
      RunTask t;
      t.scenario_id = groups[g].scenario_id;
      t.hand = &rig.hand;
      t.grasp = &rig.grasp;
      t.waypoints = &groups[g].waypoints;
      t.loop = groups[g].loop;
      t.noise = groups[g].noise;
      t.seed = seed;
      t.group_index = static_cast<int>(g);
      tasks.push_back(t);
    }
  }

  const std::vector<TaskOutcome> outcomes = run_tasks(tasks, jobs);

  const std::filesystem::path csv_path =
      std::filesystem::path(out_dir) / (run_name + "_results.csv");
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write " + csv_path.string());
  csv << kCsvSchema << "\n" << kCsvColumns << "\n";

  struct GroupAgg {
    double planned = 0, open = 0, closed = 0, closed_rot = 0;
    long rows = 0;
    int drops = 0;
    std::vector<std::uint64_t> seeds_ok;
    std::vector<std::uint64_t> seeds_failed;
    std::vector<std::string> errors;
  };
  std::vector<GroupAgg> agg(groups.size());

  for (size_t i = 0; i < tasks.size(); ++i) {
    const RunTask& t = tasks[i];
    const TaskOutcome& o = outcomes[i];
    GroupAgg& a = agg[t.group_index];
    if (o.failed) {
      a.seeds_failed.push_back(t.seed);
      a.errors.push_back(o.error);
      err << "seed " << t.seed << " of " << t.scenario_id
          << " failed: " << o.error << "\n";
      continue;
    }
    a.seeds_ok.push_back(t.seed);
    for (size_t w = 0; w < o.results.size(); ++w) {
      const WaypointResult& r = o.results[w];
      const Eigen::Vector3d& goal_offset =
          (*t.waypoints)[w].offset_p;
      csv << t.scenario_id << ',' << t.seed << ',' << w << ','
          << fmt6(goal_offset.x() / kCm) << ','
          << fmt6(goal_offset.y() / kCm) << ','
          << fmt6(goal_offset.z() / kCm) << ','
          << fmt6(r.planned_error / kCm) << ','
          << fmt6(r.open_loop_error / kCm) << ','
          << fmt6(r.closed_loop_error / kCm) << ',' << r.replans_used << ','
          << (r.dropped ? 1 : 0) << ','
          << fmt6(timing ? r.wall_time : 0.0) << "\n";
      a.planned += r.planned_error / kCm;
      a.open += r.open_loop_error / kCm;
      a.closed += r.closed_loop_error / kCm;
      a.closed_rot += r.closed_loop_rot_error / kDeg;
      a.drops += r.dropped ? 1 : 0;
      ++a.rows;
    }
  }
  csv.close();

  ordered_json summary;
  summary["schema"] = "ingrasp-summary-v1";
  summary["run"] = run_name;
  summary["seeds"] = seeds;
  summary["groups"] = ordered_json::array();
  bool any_ok = false;
  for (size_t g = 0; g < groups.size(); ++g) {
    const GroupAgg& a = agg[g];
    ordered_json jg;
    jg["group"] = groups[g].scenario_id;
    jg["waypoints"] = groups[g].waypoints.size();
    jg["noise_preset"] = groups[g].noise;
    jg["n_replan"] = groups[g].loop.n_replan;
    jg["seeds_ok"] = a.seeds_ok;
    jg["seeds_failed"] = a.seeds_failed;
    jg["errors"] = a.errors;
    jg["rows"] = a.rows;
    jg["drops"] = a.drops;
    if (a.rows > 0) {
      jg["mean_planned_err_cm"] = a.planned / a.rows;
      jg["mean_open_loop_err_cm"] = a.open / a.rows;
      jg["mean_closed_loop_err_cm"] = a.closed / a.rows;
      jg["mean_closed_rot_err_deg"] = a.closed_rot / a.rows;
      any_ok = true;
    }
    summary["groups"].push_back(jg);

    out << "group=" << groups[g].scenario_id << " waypoints="
        << groups[g].waypoints.size() << " seeds_ok=" << a.seeds_ok.size()
        << "/" << seeds.size();
    if (a.rows > 0) {
      out << " mean_closed_err_cm=" << fmt6(a.closed / a.rows)
          << " drops=" << a.drops;
    }
    out << "\n";
  }

  const std::filesystem::path json_path =
      std::filesystem::path(out_dir) / (run_name + "_summary.json");
  std::ofstream js(json_path);
  if (!js) throw Error("cannot write " + json_path.string());
  js << summary.dump(2) << "\n";
  js.close();

  out << "wrote " << csv_path.string() << "\n";
  out << "wrote " << json_path.string() << "\n";
  return any_ok || tasks.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------
// plan: one trajectory optimization, written as a JSON report.
// ---------------------------------------------------------------------

int cmd_plan(const Scenario& scenario, int goal_index, bool baseline,
             const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
  if (goal_index < 0 ||
      goal_index >= static_cast<int>(scenario.waypoints.size())) {
    err << "goal index " << goal_index << " out of range; scenario has "
        << scenario.waypoints.size() << " waypoints\n";
    return 2;
  }
  const WaypointGoal& wp = scenario.waypoints[goal_index];
  const Pose goal = absolute_goal(scenario.grasp.object_pose0, wp);

  TrajProblem prob;
  prob.hand = scenario.hand;
  prob.grasp = scenario.grasp;
  prob.goal = goal;
  prob.steps = scenario.loop.first_steps;
  prob.lambda = scenario.loop.first_lambda;
  prob.W_o = scenario.loop.W_o;
  prob.W_f = scenario.loop.W_f;
  prob.collision_enabled = scenario.loop.collision_enabled;

  TrajSolution sol;
  try {
    sol = baseline ? solve_baseline(prob) : solve(prob);
  } catch (const SolverFailedError& e) {
    err << "plan failed: " << e.what() << "\n";
    return 1;
  }

  const Pose terminal = sol.vars.object_pose(sol.vars.steps() - 1);
  const double planned_err_cm = (terminal.p - goal.p).norm() / kCm;
  const double planned_rot_deg = rotation_error(terminal, goal) / kDeg;
  const double drift_cm = max_grasp_drift(sol.vars, prob) / kCm;

  ordered_json report;
  report["schema"] = "ingrasp-plan-v1";
  report["scenario_id"] = scenario.name;
  report["goal_index"] = goal_index;
  report["baseline"] = baseline;
  report["steps"] = sol.vars.steps();
  report["goal_offset_cm_deg"] = {
      wp.offset_p.x() / kCm,  wp.offset_p.y() / kCm,  wp.offset_p.z() / kCm,
      wp.offset_r.v.x() / kDeg, wp.offset_r.v.y() / kDeg,
      wp.offset_r.v.z() / kDeg};
  report["planned_err_cm"] = planned_err_cm;
  report["planned_rot_err_deg"] = planned_rot_deg;
  report["max_grasp_drift_cm"] = drift_cm;
  report["cost"] = {{"object", sol.cost_breakdown.object},
                    {"finger", sol.cost_breakdown.finger},
                    {"joint", sol.cost_breakdown.joint},
                    {"total", sol.cost_breakdown.total()}};
  report["iterations"] = sol.stats.iterations;
  report["kkt_residual"] = sol.stats.kkt_residual;
  report["trajectory"] = ordered_json::array();
  for (int t = 0; t < sol.vars.steps(); ++t) {
    ordered_json step;
    step["object_pose_cm_deg"] = pose_to_cm_deg(sol.vars.object_pose(t));
    const Eigen::VectorXd q = sol.vars.joints(t);
    step["joints_rad"] = std::vector<double>(q.data(), q.data() + q.size());
    report["trajectory"].push_back(step);
  }

  const std::filesystem::path path =
      std::filesystem::path(out_dir) /
      (scenario.name + "_plan_goal" + std::to_string(goal_index) + ".json");
  std::ofstream fout(path);
  if (!fout) throw Error("cannot write " + path.string());
  fout << report.dump(2) << "\n";
  fout.close();

  out << "plan scenario=" << scenario.name << " goal_index=" << goal_index
      << " steps=" << sol.vars.steps()
      << (baseline ? " planner=baseline" : " planner=proposed") << "\n";
  out << "planned_error_cm=" << fmt6(planned_err_cm)
      << " planned_rot_error_deg=" << fmt6(planned_rot_deg)
      << " max_grasp_drift_cm=" << fmt6(drift_cm) << "\n";
  out << "cost_object=" << fmt6(sol.cost_breakdown.object)
      << " cost_finger=" << fmt6(sol.cost_breakdown.finger)
      << " cost_joint=" << fmt6(sol.cost_breakdown.joint)
      << " cost_total=" << fmt6(sol.cost_breakdown.total()) << "\n";
  out << "wrote " << path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------

int cmd_gradcheck(int trials, double tolerance, std::uint64_t seed,
                  bool timing, std::ostream& out, std::ostream& err) {
  if (trials < 0) {
    err << "--trials must be nonnegative\n";
    return 2;
  }
  if (tolerance <= 0.0) {
    err << "--tolerance must be positive\n";
    return 2;
  }
  if (trials == 0) {
    out << "warning: 0 trials requested, vacuous pass\n";
    out << "gradcheck trials=0 failures=0\n";
    return 0;
  }
  const GradCheckReport rep = check_gradients(trials, tolerance, seed);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", rep.max_rel_error);
  out << "gradcheck trials=" << rep.trials << " failures=" << rep.failures
      << " max_rel_error=" << buf << " worst_term=" << rep.worst_term;
  if (timing) out << " time_s=" << fmt6(rep.seconds);
  out << "\n";
  if (rep.failures > 0) {
    err << rep.failures << " of " << rep.trials
        << " instances exceeded tolerance " << tolerance
        << " (worst: " << rep.worst_term << ", rel. error ";
    err << buf << ")\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------
// ik
// ---------------------------------------------------------------------

int cmd_ik(const std::string& hand_file,
           const std::vector<std::string>& target_args,
           const std::vector<double>& seed_joints, std::ostream& out,
           std::ostream& err) {
  HandModel hand;
  try {
    hand = hand_file.empty() ? make_synthetic_hand()
                             : load_hand_model(hand_file);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  }

  if (target_args.size() != hand.fingers.size()) {
    err << "expected " << hand.fingers.size() << " --target values (one per "
        << "finger), got " << target_args.size() << "\n";
    return 2;
  }
  std::vector<Eigen::Vector3d> targets;
  for (const std::string& s : target_args) {
    double x = 0, y = 0, z = 0;
    char trailing = '\0';
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &x, &y, &z, &trailing) != 3) {
      err << "malformed --target '" << s << "': expected x,y,z in cm\n";
      return 2;
    }
    targets.emplace_back(x * kCm, y * kCm, z * kCm);
  }

  Eigen::VectorXd seed;
  if (seed_joints.empty()) {
    seed = 0.5 * (hand.lower_limits() + hand.upper_limits());
  } else if (static_cast<int>(seed_joints.size()) == hand.dof()) {
    seed = Eigen::Map<const Eigen::VectorXd>(seed_joints.data(),
                                             seed_joints.size());
  } else {
    err << "--seed-joints needs " << hand.dof() << " values\n";
    return 2;
  }

  Eigen::VectorXd Q;
  try {
    Q = ik_fingertips(hand, targets, seed);
  } catch (const IkNotConvergedError& e) {
    err << e.what() << "\n";
    return 1;
  }

  for (size_t f = 0; f < hand.fingers.size(); ++f) {
    const Eigen::VectorXd qf = Q.segment(4 * static_cast<int>(f), 4);
    const double res_mm =
        (fk_fingertip(hand, static_cast<int>(f), qf).p - targets[f]).norm() *
        1000.0;
    out << "finger " << f << " residual_mm=" << fmt6(res_mm) << "\n";
  }
  out << "joints_rad=";
  for (int i = 0; i < Q.size(); ++i) {
    if (i) out << ',';
    out << fmt6(Q(i));
  }
  out << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------

int cmd_presets(std::ostream& out) {
  out << "experiment presets (use with `run --preset`):\n";
  out << "  traj_steps_study   open-loop horizon sweep, T in {1,3,5,10}\n";
  out << "  replan_study       replan budget sweep, N in {0,1,4,8}\n";
  out << "  baseline_compare   full vs rigid-thumb planner, 3 cm and 5 cm "
         "cubes\n";
  out << "  reachable_space    cube side sweep {1,3,5,7,9} cm\n";
  out << "  pose_goals         three full-pose goals, zero noise\n";
  out << "noise presets (use with `--noise-preset` or scenario files):\n";
  out << "  zero               every disturbance disabled\n";
  out << "  realistic          tracking 0.01 rad, drift 0.3 mm/step, "
         "sensing 0.5 mm / 0.01 rad\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"ingrasp: in-hand object relocation via collaborative "
               "finger trajectory optimization"};
  app.require_subcommand(1);

  // plan
  auto* plan = app.add_subcommand(
      "plan", "Solve one waypoint's trajectory and write a JSON report");
  std::string plan_scenario;
  int plan_goal_index = 0;
  bool plan_baseline = false;
  std::string plan_out_dir;
  plan->add_option("--scenario", plan_scenario, "scenario JSON file")
      ->required();
  plan->add_option("--goal-index", plan_goal_index,
                   "waypoint index to plan for (default 0)");
  plan->add_flag("--baseline", plan_baseline,
                 "use the rigid-thumb baseline planner");
  plan->add_option("--out-dir", plan_out_dir, "output directory");

  // run
  auto* run = app.add_subcommand(
      "run", "Closed-loop execution over all seeds; CSV + JSON summary");
  std::string run_scenario_file, run_preset, run_noise, run_out_dir;
  int run_jobs = 1;
  int run_replan_max = -1;
  bool run_baseline = false, run_timing = false;
  std::vector<std::uint64_t> run_seeds;
  run->add_option("--scenario", run_scenario_file, "scenario JSON file");
  run->add_option("--preset", run_preset, "experiment preset name");
  run->add_option("--seed", run_seeds,
                  "seeds to run instead of the configured list (repeatable)");
  run->add_option("--jobs", run_jobs, "parallel seed-level workers")
      ->check(CLI::PositiveNumber);
  run->add_option("--out-dir", run_out_dir, "output directory");
  run->add_option("--replan-max", run_replan_max,
                  "override the replan budget (scenario mode)");
  run->add_option("--noise-preset", run_noise,
                  "override the noise preset (scenario mode)");
  run->add_flag("--baseline", run_baseline,
                "use the rigid-thumb baseline planner (scenario mode)");
  run->add_flag("--timing", run_timing,
                "emit real wall-clock times (outputs become "
                "nondeterministic)");

  // gradcheck
  auto* grad = app.add_subcommand(
      "gradcheck",
      "Compare analytical gradients against finite differences");
  int grad_trials = 200;
  double grad_tol = 1e-5;
  std::uint64_t grad_seed = 42;
  bool grad_timing = false;
  grad->add_option("--trials", grad_trials, "random instances (default 200)");
  grad->add_option("--tolerance", grad_tol,
                   "relative-error threshold (default 1e-5)");
  grad->add_option("--seed", grad_seed, "RNG seed (default 42)");
  grad->add_flag("--timing", grad_timing, "report sweep wall time");

  // ik
  auto* ik = app.add_subcommand(
      "ik", "Fingertip inverse kinematics; prints joints and residuals");
  std::string ik_hand;
  std::vector<std::string> ik_targets;
  std::vector<double> ik_seed_joints;
  ik->add_option("--hand", ik_hand,
                 "hand model JSON (default: built-in synthetic hand)");
  ik->add_option("--target", ik_targets,
                 "fingertip target as x,y,z in cm; repeat once per finger");
  ik->add_option("--seed-joints", ik_seed_joints,
                 "starting joint vector in rad (default: mid-range)");

  // presets
  app.add_subcommand("presets", "List experiment and noise presets");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("presets")) return cmd_presets(out);

    if (app.got_subcommand("gradcheck")) {
      return cmd_gradcheck(grad_trials, grad_tol, grad_seed, grad_timing,
                           out, err);
    }

    if (app.got_subcommand("ik")) {
      return cmd_ik(ik_hand, ik_targets, ik_seed_joints, out, err);
    }

    if (app.got_subcommand("plan")) {
      Scenario scenario;
      std::string out_dir;
      try {
        scenario = load_scenario(plan_scenario);
        out_dir = resolve_out_dir(plan_out_dir);
      } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
      }
      return cmd_plan(scenario, plan_goal_index, plan_baseline, out_dir, out,
                      err);
    }

    // run
    if (run_scenario_file.empty() == run_preset.empty()) {
      err << "run needs exactly one of --scenario or --preset\n";
      return 2;
    }
    std::string run_name;
    Scenario rig;
    std::vector<GroupSpec> groups;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    try {
      out_dir = resolve_out_dir(run_out_dir);
      if (!run_preset.empty()) {
        if (run_replan_max >= 0 || !run_noise.empty() || run_baseline) {
          throw ConfigError(
              "--replan-max/--noise-preset/--baseline apply to scenario "
              "runs, not presets");
        }
        const ExperimentBundle bundle = experiment_presets(run_preset);
        rig = default_scenario();
        run_name = bundle.name;
        seeds = run_seeds.empty() ? bundle.seeds : run_seeds;
        for (const ExperimentRun& r : bundle.runs) {
          GroupSpec g;
          g.scenario_id = bundle.name + "/" + r.group;
          g.waypoints = r.waypoints;
          g.loop = r.loop;
          g.noise = r.noise_preset;
          noise_preset(g.noise, 0);  // validate the name up front
          groups.push_back(g);
        }
      } else {
        rig = load_scenario(run_scenario_file);
        run_name = rig.name;
        seeds = run_seeds.empty() ? rig.seeds : run_seeds;
        GroupSpec g;
        g.scenario_id = rig.name;
        g.waypoints = rig.waypoints;
        g.loop = rig.loop;
        g.noise = run_noise.empty() ? rig.noise_preset : run_noise;
        noise_preset(g.noise, 0);  // validate the name up front
        if (run_replan_max >= 0) g.loop.n_replan = run_replan_max;
        if (run_baseline) g.loop.use_baseline = true;
        groups.push_back(g);
      }
    } catch (const Error& e) {
      err << e.what() << "\n";
      return 2;
    }
    return execute_run(run_name, rig, groups, seeds, run_jobs, out_dir,
                       run_timing, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ingrasp
