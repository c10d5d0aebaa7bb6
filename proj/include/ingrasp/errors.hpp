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

#ifndef INGRASP_ERRORS_HPP_
#define INGRASP_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace ingrasp {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A rotation matrix argument failed the orthonormality / determinant check.
class NonOrthonormalInputError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/matrix dimensions at a module boundary.
class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// Damped least squares IK exceeded its budget with residuals above the
// acceptance threshold. Residuals are per fingertip, in meters.
class IkNotConvergedError : public Error {
 public:
  IkNotConvergedError(const std::string& msg, std::vector<double> residuals)
      : Error(msg), residuals(std::move(residuals)) {}
  std::vector<double> residuals;
};

// Point sets handed to rigid registration do not determine a unique
// proper rigid transform (fewer than three points, or collinear).
class DegenerateConfigurationError : public Error {
 public:
  using Error::Error;
};

// The simulated object slipped out of the grasp; the episode is over and
// further commands are rejected.
class DroppedObjectError : public Error {
 public:
  using Error::Error;
};

// Trajectory solve failed (no progress or infeasible constraints) even
// after the internal restart.
class SolverFailedError : public Error {
 public:
  SolverFailedError(const std::string& msg, double kkt, double violation)
      : Error(msg), kkt_residual(kkt), constraint_violation(violation) {}
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
};

// Both the default-initialized solve and the jittered restart failed while
// reaching a waypoint.
class PlanFailedError : public Error {
 public:
  using Error::Error;
};

// Unknown experiment preset name.
class UnknownPresetError : public Error {
 public:
  using Error::Error;
};

// Malformed scenario file, missing referenced file, or inconsistent
// configuration; the message names the offending path or field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ingrasp

#endif  // INGRASP_ERRORS_HPP_
