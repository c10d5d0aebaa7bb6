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

#include "ingrasp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ingrasp {

namespace {

Eigen::VectorXd clip(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                     const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Augmented-Lagrangian wrapper around the user objective: classic
// Powell/Hestenes/Rockafellar form for inequalities, so the term vanishes
// smoothly once a constraint is inactive and its multiplier is zero.
struct AugmentedObjective {
  const ObjectiveFn& f;
  const ConstraintFn& g;
  const Eigen::VectorXd& multipliers;
  double penalty;

  // Returns L(x); fills grad, the raw objective value, and g(x).
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& grad, double& f_value,
              Eigen::VectorXd& g_value) const {
    double L = f(x, grad);
    f_value = L;
    if (!g) {
      g_value.resize(0);
      return L;
    }
    Eigen::MatrixXd jac;
    g_value = g(x, &jac);
    for (int k = 0; k < g_value.size(); ++k) {
      const double shifted = multipliers[k] + penalty * g_value[k];
      if (shifted > 0.0) {
        L += g_value[k] * (multipliers[k] + 0.5 * penalty * g_value[k]);
        grad += shifted * jac.row(k).transpose();
      } else {
        L -= multipliers[k] * multipliers[k] / (2.0 * penalty);
      }
    }
    return L;
  }
};

struct InnerResult {
  double kkt = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory quasi-Newton descent with bound projection: active bound
// coordinates are frozen out of the two-loop recursion, steps are clipped
// to the box, and sufficient decrease is measured against the projected
// step (Bertsekas-style projected Armijo).
InnerResult minimize_inner(const AugmentedObjective& L, Eigen::VectorXd& x,
                           double& f_value, Eigen::VectorXd& g_value,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const SolverOptions& opt,
                           const CanonicalizeFn& canonicalize) {
  const int n = static_cast<int>(x.size());
  std::deque<Eigen::VectorXd> s_hist, y_hist;

  Eigen::VectorXd grad(n);
  double value = L.eval(x, grad, f_value, g_value);

  InnerResult result;
  for (int it = 0; it < opt.max_inner_iterations; ++it) {
    const Eigen::VectorXd projected = clip(x - grad, lo, hi) - x;
    result.kkt = projected.size() > 0 ? projected.lpNorm<Eigen::Infinity>()
                                      : 0.0;
    if (result.kkt <= opt.kkt_tol) {
      result.converged = true;
      return result;
    }
    result.iterations = it + 1;

    // Freeze coordinates pressed against an active bound.
    Eigen::VectorXd masked = grad;
    for (int i = 0; i < n; ++i) {
      const bool at_lo = x[i] <= lo[i] && grad[i] > 0.0;
      const bool at_hi = x[i] >= hi[i] && grad[i] < 0.0;
      if (at_lo || at_hi) masked[i] = 0.0;
    }

    // Two-loop recursion on the free coordinates.
    Eigen::VectorXd d = -masked;
    const int m = static_cast<int>(s_hist.size());
    if (m > 0) {
      Eigen::VectorXd q = masked;
      Eigen::VectorXd alpha(m);
      for (int k = m - 1; k >= 0; --k) {
        const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
        alpha[k] = rho * s_hist[k].dot(q);
        q -= alpha[k] * y_hist[k];
      }
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
      for (int k = 0; k < m; ++k) {
        const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
        const double beta = rho * y_hist[k].dot(q);
        q += (alpha[k] - beta) * s_hist[k];
      }
      d = -q;
    }
    for (int i = 0; i < n; ++i) {
      if (masked[i] == 0.0 && grad[i] != 0.0) d[i] = 0.0;
    }
    if (d.dot(grad) >= 0.0) {
      d = -masked;  // quasi-Newton direction unusable; steepest descent
      s_hist.clear();
      y_hist.clear();
    }

    // Projected weak-Wolfe line search: bisection once bracketed, doubling
    // while the sufficient-decrease side keeps passing. The curvature
    // condition keeps the quasi-Newton pairs well posed; when it cannot be
    // met (e.g. the step saturates at a bound) the best sufficient-decrease
    // point is taken instead.
    double step = 1.0;
    double step_lo = 0.0;
    double step_hi = std::numeric_limits<double>::infinity();
    bool accepted = false;
    bool have_fallback = false;
    Eigen::VectorXd x_new, grad_new(n), g_new;
    double value_new = 0.0, f_new = 0.0;
    Eigen::VectorXd x_fb, grad_fb, g_fb;
    double value_fb = 0.0, f_fb = 0.0;
    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      x_new = clip(x + step * d, lo, hi);
      const Eigen::VectorXd dx = x_new - x;
      const double slope = grad.dot(dx);
      if (dx.lpNorm<Eigen::Infinity>() <
              1e-16 * std::max(1.0, x.lpNorm<Eigen::Infinity>()) ||
          slope >= 0.0) {
        // Dead or uphill after projection; shrink toward the last good end.
        step_hi = step;
        step = 0.5 * (step_lo + step_hi);
        continue;
      }
      value_new = L.eval(x_new, grad_new, f_new, g_new);
      if (value_new > value + opt.armijo_c * slope) {
        step_hi = step;
      } else if (grad_new.dot(dx) < 0.9 * slope) {
        // Decrease is fine but the slope is still steep; remember the
        // point and try a longer step.
        have_fallback = true;
        x_fb = x_new;
        grad_fb = grad_new;
        g_fb = g_new;
        value_fb = value_new;
        f_fb = f_new;
        step_lo = step;
      } else {
        accepted = true;
        break;
      }
      step = std::isinf(step_hi) ? 2.0 * step : 0.5 * (step_lo + step_hi);
    }
    if (!accepted && have_fallback) {
      x_new = x_fb;
      grad_new = grad_fb;
      g_new = g_fb;
      value_new = value_fb;
      f_new = f_fb;
      accepted = true;
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        // Retry from scratch with a steepest-descent step next round.
        s_hist.clear();
        y_hist.clear();
        continue;
      }
      return result;  // genuine stall
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }

    x = x_new;
    value = value_new;
    grad = grad_new;
    f_value = f_new;
    g_value = g_new;

    if (canonicalize && canonicalize(x)) {
      s_hist.clear();
      y_hist.clear();
      value = L.eval(x, grad, f_value, g_value);
    }
  }
  const Eigen::VectorXd projected = clip(x - grad, lo, hi) - x;
  result.kkt = projected.lpNorm<Eigen::Infinity>();
  result.converged = result.kkt <= opt.kkt_tol;
  return result;
}

}  // namespace

SolverResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                      const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper, const ConstraintFn& g,
                      const SolverOptions& options,
                      const CanonicalizeFn& canonicalize) {
  SolverResult result;
  result.x = clip(x0, lower, upper);

  Eigen::VectorXd multipliers;
  if (g) {
    Eigen::VectorXd g0 = g(result.x, nullptr);
    multipliers = Eigen::VectorXd::Zero(g0.size());
  }
  double penalty = options.penalty_initial;
  const int outer_rounds = g ? options.max_outer_iterations : 1;

  double f_value = 0.0;
  Eigen::VectorXd g_value;
  double prev_violation = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < outer_rounds; ++outer) {
    AugmentedObjective L{f, g, multipliers, penalty};
    const InnerResult inner = minimize_inner(
        L, result.x, f_value, g_value, lower, upper, options, canonicalize);
    result.iterations += inner.iterations;
    result.kkt_residual = inner.kkt;
    result.max_violation =
        g_value.size() > 0 ? std::max(0.0, g_value.maxCoeff()) : 0.0;

    if (!g) {
      result.converged = inner.converged;
      break;
    }
    // Complementarity: constraints that keep a positive multiplier must sit
    // on the surface, otherwise the multiplier estimate has not settled.
    double complementarity = 0.0;
    for (int k = 0; k < multipliers.size(); ++k) {
      if (multipliers[k] + penalty * g_value[k] > 0.0) {
        complementarity = std::max(complementarity, std::abs(g_value[k]));
      }
    }
    const double residual = std::max(result.max_violation, complementarity);
    if (inner.converged && residual <= options.constraint_tol) {
      result.converged = true;
      break;
    }
    for (int k = 0; k < multipliers.size(); ++k) {
      multipliers[k] = std::max(0.0, multipliers[k] + penalty * g_value[k]);
    }
    if (residual > 0.25 * prev_violation) {
      penalty *= options.penalty_growth;
    }
    prev_violation = residual;
  }
  result.cost = f_value;
  return result;
}

}  // namespace ingrasp
