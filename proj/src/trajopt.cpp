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

#include "ingrasp/trajopt.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ingrasp/errors.hpp"
#include "ingrasp/solver.hpp"

namespace ingrasp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps coordinate rates of a pose attached rigidly behind another frame:
// if p is the lever arm target_origin - source_origin, the twist of the
// target is Psi(p) times the twist of the source.
Matrix6d lever_map(const Eigen::Vector3d& arm) {
  Matrix6d Psi = Matrix6d::Identity();
  Psi.topRightCorner<3, 3>() = -skew(arm);
  return Psi;
}

// Change of expression frame for a split twist: both the linear and the
// angular part rotate by R^T.
Matrix6d frame_change(const Eigen::Matrix3d& R) {
  Matrix6d Omega = Matrix6d::Zero();
  Omega.topLeftCorner<3, 3>() = R.transpose();
  Omega.bottomRightCorner<3, 3>() = R.transpose();
  return Omega;
}

void validate_problem(const TrajProblem& prob) {
  if (prob.steps < 1) throw Error("trajectory needs at least one step");
  if (prob.lambda < 0.0) throw Error("joint penalty weight must be >= 0");
  if ((prob.W_o.diagonal().array() < 0.0).any() ||
      (prob.W_f.diagonal().array() < 0.0).any()) {
    throw Error("weights must be nonnegative");
  }
  const size_t n = prob.hand.fingers.size();
  if (prob.grasp.grasp_points.size() != n ||
      prob.grasp.grasp_orients.size() != n) {
    throw DimensionMismatchError("grasp does not match the hand's fingers");
  }
  if (prob.grasp.Q0.size() != prob.hand.dof()) {
    throw DimensionMismatchError("grasp joint vector does not match hand");
  }
}

// Distance of one collision pair at one timestep, with the optional
// gradient row over the stacked joint vector.
double pair_distance(const HandModel& hand, const Eigen::VectorXd& Qt,
                     int pair_index, Eigen::RowVectorXd* drow) {
  const auto& pair = hand.collision_pairs[pair_index];
  const CollisionPoint& a = hand.collision_points[pair.first];
  const CollisionPoint& b = hand.collision_points[pair.second];
  const Eigen::Vector3d pa = collision_point_position(hand, Qt, a);
  const Eigen::Vector3d pb = collision_point_position(hand, Qt, b);
  const Eigen::Vector3d diff = pa - pb;
  const double dist = diff.norm();
  if (drow != nullptr) {
    drow->setZero(hand.dof());
    if (dist > 1e-12) {
      const Eigen::RowVector3d u = (diff / dist).transpose();
      const auto Ja = collision_point_jacobian(hand, Qt, a);
      const auto Jb = collision_point_jacobian(hand, Qt, b);
      drow->segment(hand.finger_offset(a.finger), Ja.cols()) += u * Ja;
      drow->segment(hand.finger_offset(b.finger), Jb.cols()) -= u * Jb;
    }
  }
  return dist;
}

}  // namespace

WeightMatrix default_object_weights() {
  return WeightMatrix(Eigen::Vector3d(10.0, 10.0, 10.0),
                      Eigen::Vector3d(0.01, 0.01, 0.0));
}

WeightMatrix default_finger_weights() {
  return WeightMatrix(Eigen::Vector3d(10.0, 10.0, 10.0),
                      Eigen::Vector3d(1e-3, 1e-3, 1e-3));
}

Pose TrajVariables::object_pose(int t) const {
  return Pose(xi.row(t).head<3>().transpose(),
              RotVec(xi.row(t).tail<3>().transpose()));
}

Eigen::VectorXd TrajVariables::flatten() const {
  const int T = steps();
  const int d = dof();
  const int B = 6 + d;
  Eigen::VectorXd x(T * B);
  for (int t = 0; t < T; ++t) {
    x.segment(t * B, 6) = xi.row(t).transpose();
    x.segment(t * B + 6, d) = Q.row(t).transpose();
  }
  return x;
}

TrajVariables TrajVariables::unflatten(const Eigen::VectorXd& x, int steps,
                                       int dof) {
  const int B = 6 + dof;
  if (x.size() != static_cast<Eigen::Index>(steps) * B) {
    throw DimensionMismatchError("flattened trajectory has the wrong size");
  }
  TrajVariables v;
  v.xi.resize(steps, 6);
  v.Q.resize(steps, dof);
  for (int t = 0; t < steps; ++t) {
    v.xi.row(t) = x.segment(t * B, 6).transpose();
    v.Q.row(t) = x.segment(t * B + 6, dof).transpose();
  }
  return v;
}

bool TrajVariables::canonicalize() {
  bool changed = false;
  constexpr double kPi = 3.14159265358979323846;
  for (int t = 0; t < steps(); ++t) {
    const RotVec r(xi.row(t).tail<3>().transpose());
    if (r.angle() > kPi) {
      xi.row(t).tail<3>() = r.canonical().v.transpose();
      changed = true;
    }
  }
  return changed;
}

TermValue cost_object(const TrajVariables& vars, const TrajProblem& prob) {
  const int T = vars.steps();
  const int B = 6 + vars.dof();
  TermValue out;
  out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(T) * B);
  const Pose pose = vars.object_pose(T - 1);
  const PoseDistance pd = pose_distance(pose, prob.goal, prob.W_o);
  out.value = pd.d;
  const Eigen::RowVectorXd row = pose_distance_grad(
      pose, prob.goal, prob.W_o, pose_coordinate_jacobian(pose.r));
  out.grad.segment((T - 1) * B, 6) = row.transpose();
  return out;
}

TermValue cost_finger(const TrajVariables& vars, const TrajProblem& prob) {
  const HandModel& hand = prob.hand;
  const int T = vars.steps();
  const int dof = hand.dof();
  const int B = 6 + dof;
  TermValue out;
  out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(T) * B);
  for (int t = 0; t < T; ++t) {
    const Pose obj = vars.object_pose(t);
    const Pose obj_inv = obj.inverse();
    const Matrix6d to_object = frame_change(obj.rotation());
    const Matrix6d Jo = pose_coordinate_jacobian(obj.r);
    for (size_t i = 0; i < hand.fingers.size(); ++i) {
      const int off = hand.finger_offset(static_cast<int>(i));
      const int d_i = hand.fingers[i].dof();
      const Eigen::VectorXd q = vars.Q.row(t).segment(off, d_i).transpose();
      const Pose tip = fk_fingertip(hand, static_cast<int>(i), q);
      const Pose rel = obj_inv * tip;
      const Pose ref(prob.grasp.grasp_points[i], prob.grasp.grasp_orients[i]);
      out.value += pose_distance(rel, ref, prob.W_f).d;

      const Eigen::Matrix<double, 1, 6> row =
          pose_distance_twist_grad(rel, ref, prob.W_f);
      const Eigen::Matrix<double, 1, 6> row_world = row * to_object;
      const auto Jf = space_jacobian(hand, static_cast<int>(i), q);
      out.grad.segment(t * B, 6) -=
          (row_world * lever_map(tip.p - obj.p) * Jo).transpose();
      out.grad.segment(t * B + 6 + off, d_i) += (row_world * Jf).transpose();
    }
  }
  return out;
}

TermValue cost_joint(const TrajVariables& vars, const Eigen::VectorXd& Q0,
                     double lambda) {
  const int T = vars.steps();
  const int dof = vars.dof();
  const int B = 6 + dof;
  TermValue out;
  out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(T) * B);
  Eigen::VectorXd prev = Q0;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd cur = vars.Q.row(t).transpose();
    const Eigen::VectorXd diff = cur - prev;
    out.value += lambda * diff.squaredNorm();
    out.grad.segment(t * B + 6, dof) += 2.0 * lambda * diff;
    if (t > 0) out.grad.segment((t - 1) * B + 6, dof) -= 2.0 * lambda * diff;
    prev = cur;
  }
  return out;
}

void variable_bounds(const TrajProblem& prob, Eigen::VectorXd& lower,
                     Eigen::VectorXd& upper) {
  const int T = prob.steps;
  const int dof = prob.hand.dof();
  const int B = 6 + dof;
  lower = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(T) * B, -kInf);
  upper = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(T) * B, kInf);
  const Eigen::VectorXd lo = prob.hand.lower_limits();
  const Eigen::VectorXd hi = prob.hand.upper_limits();
  for (int t = 0; t < T; ++t) {
    lower.segment(t * B + 6, dof) = lo;
    upper.segment(t * B + 6, dof) = hi;
  }
}

Eigen::VectorXd collision_values(const TrajVariables& vars,
                                 const TrajProblem& prob,
                                 Eigen::MatrixXd* jac) {
  const HandModel& hand = prob.hand;
  const int T = vars.steps();
  const int dof = hand.dof();
  const int B = 6 + dof;
  const int P = static_cast<int>(hand.collision_pairs.size());
  Eigen::VectorXd g(static_cast<Eigen::Index>(T) * P);
  if (jac != nullptr) {
    jac->setZero(static_cast<Eigen::Index>(T) * P,
                 static_cast<Eigen::Index>(T) * B);
  }
  Eigen::RowVectorXd drow;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd Qt = vars.Q.row(t).transpose();
    for (int k = 0; k < P; ++k) {
      const double dist =
          pair_distance(hand, Qt, k, jac != nullptr ? &drow : nullptr);
      g[t * P + k] = hand.min_pair_distance - dist;
      if (jac != nullptr) {
        jac->block(t * P + k, t * B + 6, 1, dof) = -drow;
      }
    }
  }
  return g;
}

TrajVariables default_initialization(const TrajProblem& prob) {
  const int T = prob.steps;
  const int dof = prob.hand.dof();
  TrajVariables v;
  v.xi.resize(T, 6);
  v.Q.resize(T, dof);
  const Pose start = prob.grasp.object_pose0;
  const bool rotate = (prob.W_o.w_r.array() > 0.0).any();
  const Eigen::Matrix3d R0 = start.rotation();
  const RotVec swing =
      rotate ? log_so3(prob.goal.rotation() * R0.transpose()) : RotVec::Zero();
  for (int t = 0; t < T; ++t) {
    const double frac = static_cast<double>(t + 1) / T;
    v.xi.row(t).head<3>() =
        (start.p + frac * (prob.goal.p - start.p)).transpose();
    const Eigen::Matrix3d Rt =
        exp_so3(RotVec(frac * swing.v)) * R0;
    v.xi.row(t).tail<3>() = log_so3(Rt).v.transpose();
    v.Q.row(t) = prob.grasp.Q0.transpose();
  }
  return v;
}

double max_grasp_drift(const TrajVariables& vars, const TrajProblem& prob) {
  const HandModel& hand = prob.hand;
  double worst = 0.0;
  for (int t = 0; t < vars.steps(); ++t) {
    const Pose obj_inv = vars.object_pose(t).inverse();
    for (size_t i = 0; i < hand.fingers.size(); ++i) {
      const int off = hand.finger_offset(static_cast<int>(i));
      const int d_i = hand.fingers[i].dof();
      const Eigen::VectorXd q = vars.Q.row(t).segment(off, d_i).transpose();
      const Pose tip = fk_fingertip(hand, static_cast<int>(i), q);
      const Eigen::Vector3d rel_p = obj_inv.act(tip.p);
      worst = std::max(worst,
                       (rel_p - prob.grasp.grasp_points[i]).norm());
    }
  }
  return worst;
}

namespace {

struct Attempt {
  SolverResult result;
  double wall = 0.0;
};

Attempt run_full(const TrajProblem& prob, const TrajVariables& init) {
  const int T = prob.steps;
  const int dof = prob.hand.dof();
  const ObjectiveFn f = [&prob, T, dof](const Eigen::VectorXd& x,
                                        Eigen::VectorXd& grad) {
    const TrajVariables v = TrajVariables::unflatten(x, T, dof);
    const TermValue o = cost_object(v, prob);
    const TermValue fi = cost_finger(v, prob);
    const TermValue j = cost_joint(v, prob.grasp.Q0, prob.lambda);
    grad = o.grad + fi.grad + j.grad;
    return o.value + fi.value + j.value;
  };
  ConstraintFn g;
  if (prob.collision_enabled && !prob.hand.collision_pairs.empty()) {
    g = [&prob, T, dof](const Eigen::VectorXd& x, Eigen::MatrixXd* jac) {
      return collision_values(TrajVariables::unflatten(x, T, dof), prob, jac);
    };
  }
  const CanonicalizeFn canonical = [T, dof](Eigen::VectorXd& x) {
    TrajVariables v = TrajVariables::unflatten(x, T, dof);
    if (!v.canonicalize()) return false;
    x = v.flatten();
    return true;
  };
  Eigen::VectorXd lower, upper;
  variable_bounds(prob, lower, upper);

  Attempt attempt;
  const auto t0 = std::chrono::steady_clock::now();
  attempt.result = minimize(f, init.flatten(), lower, upper, g,
                            SolverOptions(), canonical);
  attempt.wall = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  return attempt;
}

TrajSolution assemble_full(const TrajProblem& prob, const Attempt& attempt) {
  TrajSolution sol;
  sol.vars =
      TrajVariables::unflatten(attempt.result.x, prob.steps, prob.hand.dof());
  sol.vars.canonicalize();
  sol.cost_breakdown.object = cost_object(sol.vars, prob).value;
  sol.cost_breakdown.finger = cost_finger(sol.vars, prob).value;
  sol.cost_breakdown.joint =
      cost_joint(sol.vars, prob.grasp.Q0, prob.lambda).value;
  sol.planned_error =
      (sol.vars.object_pose(prob.steps - 1).p - prob.goal.p).norm();
  sol.stats.iterations = attempt.result.iterations;
  sol.stats.kkt_residual = attempt.result.kkt_residual;
  sol.stats.wall_time = attempt.wall;
  return sol;
}

bool feasible(const SolverResult& r) { return r.max_violation <= 1e-8; }

bool acceptable(const SolverResult& r) {
  return feasible(r) && (r.converged || r.kkt_residual <= 1e-3);
}

}  // namespace

TrajSolution solve(const TrajProblem& prob, const TrajVariables& seed) {
  validate_problem(prob);
  Attempt first = run_full(prob, seed);
  if (acceptable(first.result)) return assemble_full(prob, first);

  // The seeded attempt stalled or ended infeasible; restart cold.
  Attempt second = run_full(prob, default_initialization(prob));
  second.result.iterations += first.result.iterations;
  second.wall += first.wall;
  const bool pick_second =
      feasible(second.result) &&
      (!feasible(first.result) || second.result.cost <= first.result.cost);
  const Attempt& best = pick_second ? second : first;
  if (!feasible(best.result)) {
    throw SolverFailedError("trajectory solve ended infeasible",
                            best.result.kkt_residual,
                            best.result.max_violation);
  }
  return assemble_full(prob, best);
}

TrajSolution solve(const TrajProblem& prob) {
  validate_problem(prob);
  const Attempt attempt = run_full(prob, default_initialization(prob));
  if (!feasible(attempt.result)) {
    throw SolverFailedError("trajectory solve ended infeasible",
                            attempt.result.kkt_residual,
                            attempt.result.max_violation);
  }
  return assemble_full(prob, attempt);
}

Pose baseline_object_pose(const Eigen::MatrixXd& Q, const TrajProblem& prob,
                          int t) {
  const HandModel& hand = prob.hand;
  const int th = hand.thumb;
  const int off = hand.finger_offset(th);
  const int d_th = hand.fingers[th].dof();
  const Eigen::VectorXd q0 =
      prob.grasp.Q0.segment(off, d_th);
  const Pose anchor =
      fk_fingertip(hand, th, q0).inverse() * prob.grasp.object_pose0;
  const Eigen::VectorXd q = Q.row(t).segment(off, d_th).transpose();
  return fk_fingertip(hand, th, q) * anchor;
}

TermValue baseline_total_cost(const Eigen::MatrixXd& Q,
                              const TrajProblem& prob,
                              CostBreakdown* breakdown) {
  const HandModel& hand = prob.hand;
  const int T = static_cast<int>(Q.rows());
  const int dof = hand.dof();
  const int th = hand.thumb;
  const int th_off = hand.finger_offset(th);
  const int d_th = hand.fingers[th].dof();

  const Eigen::VectorXd q_th0 = prob.grasp.Q0.segment(th_off, d_th);
  const Pose anchor =
      fk_fingertip(hand, th, q_th0).inverse() * prob.grasp.object_pose0;

  TermValue out;
  out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(T) * dof);
  CostBreakdown parts;

  Eigen::VectorXd prev = prob.grasp.Q0;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd q_th = Q.row(t).segment(th_off, d_th).transpose();
    const Pose thumb_tip = fk_fingertip(hand, th, q_th);
    const Pose obj = thumb_tip * anchor;
    const auto J_th = space_jacobian(hand, th, q_th);
    // Twist of the derived object frame per thumb-joint rate.
    const Eigen::Matrix<double, 6, Eigen::Dynamic> J_obj =
        lever_map(obj.p - thumb_tip.p) * J_th;

    if (t == T - 1) {
      const PoseDistance pd = pose_distance(obj, prob.goal, prob.W_o);
      parts.object = pd.d;
      const Eigen::Matrix<double, 1, 6> row =
          pose_distance_twist_grad(obj, prob.goal, prob.W_o);
      out.grad.segment(t * dof + th_off, d_th) +=
          (row * J_obj).transpose();
    }

    const Pose obj_inv = obj.inverse();
    const Matrix6d to_object = frame_change(obj.rotation());
    for (size_t i = 0; i < hand.fingers.size(); ++i) {
      const int off = hand.finger_offset(static_cast<int>(i));
      const int d_i = hand.fingers[i].dof();
      const Eigen::VectorXd q = Q.row(t).segment(off, d_i).transpose();
      const Pose tip = fk_fingertip(hand, static_cast<int>(i), q);
      const Pose rel = obj_inv * tip;
      const Pose ref(prob.grasp.grasp_points[i], prob.grasp.grasp_orients[i]);
      parts.finger += pose_distance(rel, ref, prob.W_f).d;

      const Eigen::Matrix<double, 1, 6> row =
          pose_distance_twist_grad(rel, ref, prob.W_f);
      const Eigen::Matrix<double, 1, 6> row_world = row * to_object;
      const auto Jf = space_jacobian(hand, static_cast<int>(i), q);
      out.grad.segment(t * dof + off, d_i) += (row_world * Jf).transpose();
      out.grad.segment(t * dof + th_off, d_th) -=
          (row_world * lever_map(tip.p - obj.p) * J_obj).transpose();
    }

    const Eigen::VectorXd cur = Q.row(t).transpose();
    const Eigen::VectorXd diff = cur - prev;
    parts.joint += prob.lambda * diff.squaredNorm();
    out.grad.segment(t * dof, dof) += 2.0 * prob.lambda * diff;
    if (t > 0) out.grad.segment((t - 1) * dof, dof) -= 2.0 * prob.lambda * diff;
    prev = cur;
  }
  out.value = parts.total();
  if (breakdown != nullptr) *breakdown = parts;
  return out;
}

TrajSolution solve_baseline(const TrajProblem& prob) {
  validate_problem(prob);
  const HandModel& hand = prob.hand;
  if (hand.thumb < 0 ||
      hand.thumb >= static_cast<int>(hand.fingers.size())) {
    throw Error("rigid-thumb solve requires a designated thumb");
  }
  const int T = prob.steps;
  const int dof = hand.dof();

  const auto reshape = [T, dof](const Eigen::VectorXd& x) {
    Eigen::MatrixXd Q(T, dof);
    for (int t = 0; t < T; ++t) {
      Q.row(t) = x.segment(t * dof, dof).transpose();
    }
    return Q;
  };

  const ObjectiveFn f = [&prob, &reshape](const Eigen::VectorXd& x,
                                          Eigen::VectorXd& grad) {
    const TermValue v = baseline_total_cost(reshape(x), prob);
    grad = v.grad;
    return v.value;
  };
  ConstraintFn g;
  if (prob.collision_enabled && !hand.collision_pairs.empty()) {
    const int P = static_cast<int>(hand.collision_pairs.size());
    g = [&prob, &reshape, T, dof, P](const Eigen::VectorXd& x,
                                     Eigen::MatrixXd* jac) {
      const Eigen::MatrixXd Q = reshape(x);
      Eigen::VectorXd values(static_cast<Eigen::Index>(T) * P);
      if (jac != nullptr) {
        jac->setZero(static_cast<Eigen::Index>(T) * P, x.size());
      }
      Eigen::RowVectorXd drow;
      for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd Qt = Q.row(t).transpose();
        for (int k = 0; k < P; ++k) {
          const double dist = pair_distance(prob.hand, Qt, k,
                                            jac != nullptr ? &drow : nullptr);
          values[t * P + k] = prob.hand.min_pair_distance - dist;
          if (jac != nullptr) jac->block(t * P + k, t * dof, 1, dof) = -drow;
        }
      }
      return values;
    };
  }

  Eigen::VectorXd lower(static_cast<Eigen::Index>(T) * dof);
  Eigen::VectorXd upper(static_cast<Eigen::Index>(T) * dof);
  for (int t = 0; t < T; ++t) {
    lower.segment(t * dof, dof) = hand.lower_limits();
    upper.segment(t * dof, dof) = hand.upper_limits();
  }
  Eigen::VectorXd x0(static_cast<Eigen::Index>(T) * dof);
  for (int t = 0; t < T; ++t) x0.segment(t * dof, dof) = prob.grasp.Q0;

  const auto t0 = std::chrono::steady_clock::now();
  const SolverResult result = minimize(f, x0, lower, upper, g);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (result.max_violation > 1e-8) {
    throw SolverFailedError("rigid-thumb solve ended infeasible",
                            result.kkt_residual, result.max_violation);
  }

  TrajSolution sol;
  sol.vars.Q = reshape(result.x);
  sol.vars.xi.resize(T, 6);
  for (int t = 0; t < T; ++t) {
    const Pose obj = baseline_object_pose(sol.vars.Q, prob, t);
    sol.vars.xi.row(t).head<3>() = obj.p.transpose();
    sol.vars.xi.row(t).tail<3>() = obj.r.v.transpose();
  }
  baseline_total_cost(sol.vars.Q, prob, &sol.cost_breakdown);
  sol.planned_error =
      (sol.vars.object_pose(T - 1).p - prob.goal.p).norm();
  sol.stats.iterations = result.iterations;
  sol.stats.kkt_residual = result.kkt_residual;
  sol.stats.wall_time = wall;
  return sol;
}

}  // namespace ingrasp
