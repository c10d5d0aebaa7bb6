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

#ifndef INGRASP_TRAJOPT_HPP_
#define INGRASP_TRAJOPT_HPP_

#include <Eigen/Core>

#include "ingrasp/hand.hpp"
#include "ingrasp/se3.hpp"

namespace ingrasp {

// Shipped defaults: strong position tracking, soft orientation terms. The
// zero entry in the object weights frees rotation about the object z axis.
WeightMatrix default_object_weights();   // diag(10,10,10, 0.01,0.01,0.0)
WeightMatrix default_finger_weights();   // diag(10,10,10, 1e-3,1e-3,1e-3)

// One in-grasp trajectory optimization instance. The object must move from
// grasp.object_pose0 to `goal` over `steps` timesteps while each fingertip
// stays at its grasp reference in the object frame.
struct TrajProblem {
  HandModel hand;
  GraspState grasp;
  Pose goal;
  int steps = 3;
  WeightMatrix W_o = default_object_weights();
  WeightMatrix W_f = default_finger_weights();
  double lambda = 4e-4;  // joint-motion penalty weight
  bool collision_enabled = true;
};

// Decision variables: per timestep the object pose coordinates [p; r] and
// the stacked joint vector. Flattened layout is per step: [xi_t, Q_t],
// t = 1..steps, total length steps * (6 + dof). Rotation rows are kept
// canonical (|r| <= pi) by the solver between iterations.
struct TrajVariables {
  Eigen::MatrixXd xi;  // steps x 6
  Eigen::MatrixXd Q;   // steps x dof

  int steps() const { return static_cast<int>(xi.rows()); }
  int dof() const { return static_cast<int>(Q.cols()); }

  // Object pose at timestep t (0-based, i.e. t = 0 is the first step).
  Pose object_pose(int t) const;
  Eigen::VectorXd joints(int t) const { return Q.row(t).transpose(); }

  Eigen::VectorXd flatten() const;
  static TrajVariables unflatten(const Eigen::VectorXd& x, int steps,
                                 int dof);

  // Rewraps rotation rows with |r| > pi into the principal interval.
  // Returns true when any row changed.
  bool canonicalize();
};

// A differentiable cost term: value plus gradient over the flattened
// variables.
struct TermValue {
  double value = 0.0;
  Eigen::VectorXd grad;
};

// Terminal pose cost d(T_{o,T}, goal, W_o); gradient only in the last
// object block, chained through the object-pose coordinate map
// blockdiag(I, J_l(r)).
TermValue cost_object(const TrajVariables& vars, const TrajProblem& prob);

// Constant-grasp cost: sum over steps and fingers of the weighted pose
// distance between the fingertip expressed in the object frame and its
// grasp reference. Gradients chain through the relative Jacobian, so both
// the object blocks and the joint blocks receive contributions.
TermValue cost_finger(const TrajVariables& vars, const TrajProblem& prob);

// Joint-motion penalty lambda * sum_t |Q_{t+1} - Q_t|^2 with Q_0 fixed at
// the grasp configuration.
TermValue cost_joint(const TrajVariables& vars, const Eigen::VectorXd& Q0,
                     double lambda);

// Box bounds over the flattened variables: joint limits on Q blocks,
// unbounded object coordinates.
void variable_bounds(const TrajProblem& prob, Eigen::VectorXd& lower,
                     Eigen::VectorXd& upper);

// Minimum-distance inequalities g = min_pair_distance - dist <= 0, one per
// (step, collision pair). When `jac` is non-null it receives rows of
// dg/d(flattened vars).
Eigen::VectorXd collision_values(const TrajVariables& vars,
                                 const TrajProblem& prob,
                                 Eigen::MatrixXd* jac = nullptr);

// Straight-line initialization: object positions interpolate linearly to
// the goal, rotations follow the geodesic when any rotation weight is
// positive (constant otherwise), joints start at the grasp configuration.
TrajVariables default_initialization(const TrajProblem& prob);

// Largest distance (over steps and fingers) between a planned fingertip
// position in the object frame and its grasp reference, in meters. This is
// the position slack the plan asks of the grasp.
double max_grasp_drift(const TrajVariables& vars, const TrajProblem& prob);

struct SolverStats {
  int iterations = 0;
  double kkt_residual = 0.0;
  double wall_time = 0.0;  // seconds
};

struct CostBreakdown {
  double object = 0.0;
  double finger = 0.0;
  double joint = 0.0;
  double total() const { return object + finger + joint; }
};

struct TrajSolution {
  TrajVariables vars;
  double planned_error = 0.0;  // |p_{o,T} - goal.p| in meters
  CostBreakdown cost_breakdown;
  SolverStats stats;
};

// Solves the full problem (variables = object poses + joints) from the
// given seed, falling back to a fresh solve from default_initialization
// when the seeded attempt fails to reach a feasible iterate. Throws
// SolverFailedError when both attempts end infeasible.
TrajSolution solve(const TrajProblem& prob, const TrajVariables& seed);
TrajSolution solve(const TrajProblem& prob);

// Rigid-thumb variant: the joints are the only variables and the object
// pose is derived as thumbtip_pose(q) * C with C fixed at the initial
// relative pose. Same costs, bounds, and hyper-parameters; the returned
// solution carries the derived object poses in vars.xi.
TrajSolution solve_baseline(const TrajProblem& prob);

// Building blocks of the rigid-thumb variant, exposed for verification:
// the derived object pose at step t and the total cost with its gradient
// over the flattened T x dof joint matrix.
Pose baseline_object_pose(const Eigen::MatrixXd& Q, const TrajProblem& prob,
                          int t);
TermValue baseline_total_cost(const Eigen::MatrixXd& Q,
                              const TrajProblem& prob,
                              CostBreakdown* breakdown = nullptr);

}  // namespace ingrasp

#endif  // INGRASP_TRAJOPT_HPP_
