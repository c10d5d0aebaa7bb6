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

#ifndef INGRASP_CLI_HPP_
#define INGRASP_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace ingrasp {

// Entry point of the command-line interface; `args` excludes the program
// name. Subcommands: plan, run, gradcheck, ik, presets. Returns the
// process exit code: 0 on success, 1 on runtime failure (solver, IK,
// gradient check, every seed failing), 2 on usage or configuration errors
// (bad flags, malformed scenario files, missing referenced files).
//
// Unit convention: centimeters and degrees at this boundary (flags, files,
// CSV); meters and radians internally. Outputs are deterministic for a
// fixed (scenario, seed list); wall-clock fields print 0.000000 unless
// --timing is given. The INGRASP_OUT environment variable, when set,
// overrides the output directory (including --out-dir).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace ingrasp

#endif  // INGRASP_CLI_HPP_
