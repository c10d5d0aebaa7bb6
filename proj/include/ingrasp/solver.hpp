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

#ifndef INGRASP_SOLVER_HPP_
#define INGRASP_SOLVER_HPP_

#include <functional>

#include <Eigen/Core>

namespace ingrasp {

// Smooth objective; must fill `grad` (same size as x) on every call.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Inequality constraints g(x) <= 0. When `jac` is non-null it must be
// resized to (num_constraints x n) with rows dg_k/dx.
using ConstraintFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                                   Eigen::MatrixXd* jac)>;

// Optional chart re-centering applied between iterations; returns true when
// x was rewritten (curvature history is discarded in that case).
using CanonicalizeFn = std::function<bool(Eigen::VectorXd& x)>;

struct SolverOptions {
  int max_inner_iterations = 200;  // per augmented-Lagrangian round
  int max_outer_iterations = 15;
  double kkt_tol = 1e-6;          // projected-gradient infinity norm
  double constraint_tol = 1e-8;   // allowed max(0, g) at the solution
  int history = 10;               // curvature pairs kept
  double armijo_c = 1e-4;
  int max_line_search = 40;
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;
};

struct SolverResult {
  Eigen::VectorXd x;
  double cost = 0.0;           // objective value, multiplier terms excluded
  int iterations = 0;          // inner iterations across all rounds
  double kkt_residual = 0.0;   // final projected-gradient infinity norm
  double max_violation = 0.0;  // final max(0, g) infinity norm
  bool converged = false;
};

// Minimizes f(x) subject to lower <= x <= upper and g(x) <= 0.
//
// Bounds are handled natively by projection (iterates satisfy them exactly,
// entries may be +-infinity); inequalities through an augmented Lagrangian
// whose subproblems run limited-memory quasi-Newton steps with a projected
// Armijo backtracking line search. Deterministic: no internal randomness.
SolverResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                      const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper,
                      const ConstraintFn& g = nullptr,
                      const SolverOptions& options = SolverOptions(),
                      const CanonicalizeFn& canonicalize = nullptr);

}  // namespace ingrasp

#endif  // INGRASP_SOLVER_HPP_
