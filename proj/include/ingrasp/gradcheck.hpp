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

#ifndef INGRASP_GRADCHECK_HPP_
#define INGRASP_GRADCHECK_HPP_

#include <cstdint>
#include <string>

namespace ingrasp {

// Outcome of a randomized finite-difference sweep over every analytical
// gradient of the planning stack (terminal pose cost, grasp-maintenance
// cost, joint-motion cost, collision constraints).
struct GradCheckReport {
  int trials = 0;         // random instances evaluated
  int failures = 0;       // instances with any term above the tolerance
  double max_rel_error = 0.0;
  std::string worst_term;  // term that produced max_rel_error
  double seconds = 0.0;    // wall time of the sweep
};

// Compares the analytical gradients against central finite differences on
// `trials` random problem instances (random interior joint configurations,
// grasp anchors, goals, weights, and trajectory perturbations). An
// instance fails when any term's normwise relative error — the largest
// component difference over max(1, |analytic|_inf, |numeric|_inf) —
// reaches `tol`. The sweep is deterministic in `seed`.
GradCheckReport check_gradients(int trials, double tol, std::uint64_t seed);

}  // namespace ingrasp

#endif  // INGRASP_GRADCHECK_HPP_
