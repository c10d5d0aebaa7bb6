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

#include "ingrasp/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "ingrasp/hand.hpp"
#include "ingrasp/se3.hpp"
#include "ingrasp/trajopt.hpp"

namespace ingrasp {
namespace {

// Normwise relative error between an analytical and a numerical gradient:
// largest component difference over max(floor, |a|_inf, |n|_inf).
double rel_error(const Eigen::VectorXd& analytic,
                 const Eigen::VectorXd& numeric, double floor_scale = 1.0) {
  const double scale =
      std::max({floor_scale, analytic.cwiseAbs().maxCoeff(),
                numeric.cwiseAbs().maxCoeff()});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

// Central finite differences of a scalar function over the flattened
// trajectory variables.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const double fp = f(xp);
    xp(i) = x(i) - step;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

// Central finite differences of a vector function, one Jacobian row per
// output component.
Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const Eigen::VectorXd fp = f(xp);
    xp(i) = x(i) - step;
    const Eigen::VectorXd fm = f(xp);
    xp(i) = x(i);
    J.col(i) = (fp - fm) / (2.0 * step);
  }
  return J;
}

// One random but well-posed problem instance: interior joints, grasp
// references taken at the fingertips, a nearby goal, and a trajectory
// perturbed away from the straight-line initialization.
struct Instance {
  TrajProblem prob;
  TrajVariables vars;
};

Instance random_instance(const HandModel& hand, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Eigen::VectorXd lo = hand.lower_limits();
  const Eigen::VectorXd hi = hand.upper_limits();
  const int dof = hand.dof();

  // Joints drawn from the middle 70% of each range so finite-difference
  // probes stay strictly inside the limits.
  Eigen::VectorXd Q0(dof);
  for (int i = 0; i < dof; ++i) {
    Q0(i) = lo(i) + (0.15 + 0.7 * u01(rng)) * (hi(i) - lo(i));
  }

  // Object anchored near the fingertip centroid with a random small tilt.
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int f = 0; f < static_cast<int>(hand.fingers.size()); ++f) {
    Eigen::VectorXd qf(4);
    qf = Q0.segment(4 * f, 4);
    centroid += fk_fingertip(hand, f, qf).p;
  }
  centroid /= static_cast<double>(hand.fingers.size());
  const Eigen::Vector3d obj_p =
      centroid + 0.01 * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  const RotVec obj_r(0.1 * gauss(rng), 0.1 * gauss(rng), 0.1 * gauss(rng));

  Instance inst;
  inst.prob.hand = hand;
  inst.prob.grasp = make_grasp(hand, Q0, Pose(obj_p, obj_r), 0.0);
  inst.prob.steps = 1 + static_cast<int>(u01(rng) * 3.0);  // 1..3
  inst.prob.lambda = std::pow(10.0, -4.0 + 2.0 * u01(rng));

  const Eigen::Vector3d dp =
      0.02 * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  const RotVec dr(0.1 * gauss(rng), 0.1 * gauss(rng), 0.1 * gauss(rng));
  inst.prob.goal =
      Pose(obj_p + dp, log_so3(exp_so3(dr) * exp_so3(obj_r)));

  // Half the instances use the default weights (rotation-insensitive
  // object cost), half fully random positive weights.
  if (u01(rng) < 0.5) {
    inst.prob.W_o = WeightMatrix(
        Eigen::Vector3d(10.0, 10.0, 10.0),
        Eigen::Vector3d(u01(rng), u01(rng), u01(rng)));
    inst.prob.W_f = WeightMatrix(
        Eigen::Vector3d(5.0 + 10.0 * u01(rng), 5.0 + 10.0 * u01(rng),
                        5.0 + 10.0 * u01(rng)),
        Eigen::Vector3d(0.01 * u01(rng), 0.01 * u01(rng), 0.01 * u01(rng)));
  }

  inst.vars = default_initialization(inst.prob);
  for (int t = 0; t < inst.vars.steps(); ++t) {
    for (int k = 0; k < 6; ++k) inst.vars.xi(t, k) += 0.02 * gauss(rng);
    for (int j = 0; j < dof; ++j) {
      const double margin = 0.05 * (hi(j) - lo(j));
      inst.vars.Q(t, j) = std::clamp(inst.vars.Q(t, j) + 0.05 * gauss(rng),
                                     lo(j) + margin, hi(j) - margin);
    }
  }
  return inst;
}

}  // namespace

GradCheckReport check_gradients(int trials, double tol, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const HandModel hand = make_synthetic_hand();
  std::mt19937_64 rng(seed);

  GradCheckReport report;
  constexpr double kStep = 1e-6;

  for (int trial = 0; trial < trials; ++trial) {
    const Instance inst = random_instance(hand, rng);
    const TrajProblem& prob = inst.prob;
    const int T = inst.vars.steps();
    const int dof = inst.vars.dof();
    const Eigen::VectorXd x = inst.vars.flatten();

    const auto unflatten = [&](const Eigen::VectorXd& v) {
      return TrajVariables::unflatten(v, T, dof);
    };

    bool failed = false;
    const auto record = [&](const char* term, double err) {
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_term = term;
      }
      if (err >= tol) failed = true;
    };

    const TermValue obj = cost_object(inst.vars, prob);
    record("object_cost",
           rel_error(obj.grad, fd_gradient(
                                   [&](const Eigen::VectorXd& v) {
                                     return cost_object(unflatten(v), prob)
                                         .value;
                                   },
                                   x, kStep)));

    const TermValue fin = cost_finger(inst.vars, prob);
    record("finger_cost",
           rel_error(fin.grad, fd_gradient(
                                   [&](const Eigen::VectorXd& v) {
                                     return cost_finger(unflatten(v), prob)
                                         .value;
                                   },
                                   x, kStep)));

    const TermValue jnt = cost_joint(inst.vars, prob.grasp.Q0, prob.lambda);
    record("joint_cost",
           rel_error(jnt.grad, fd_gradient(
                                   [&](const Eigen::VectorXd& v) {
                                     return cost_joint(unflatten(v),
                                                       prob.grasp.Q0,
                                                       prob.lambda)
                                         .value;
                                   },
                                   x, kStep)));

    if (!prob.hand.collision_pairs.empty()) {
      Eigen::MatrixXd jac;
      collision_values(inst.vars, prob, &jac);
      const Eigen::MatrixXd jac_fd = fd_jacobian(
          [&](const Eigen::VectorXd& v) {
            return collision_values(unflatten(v), prob);
          },
          x, kStep);
      for (int rrow = 0; rrow < jac.rows(); ++rrow) {
        record("collision",
               rel_error(jac.row(rrow).transpose(),
                         jac_fd.row(rrow).transpose()));
      }
    }

    ++report.trials;
    if (failed) ++report.failures;
  }

  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

}  // namespace ingrasp
