// Copyright 2026 The qfb Authors
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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

namespace qfb::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kInfeasible = 2,
  kVerificationFailed = 3,
};

struct SimulateSpec {
  double t_final = 10.0;
  double dt = 1e-3;
};

struct SynthArgs {
  std::filesystem::path input;
  std::optional<std::filesystem::path> output;  // stdout when absent
  std::optional<std::filesystem::path> batch_dir;
  double tol = 1e-8;
  double moment_tol = 1e-6;
  std::optional<long> m;
  std::optional<std::filesystem::path> p_matrix;
  std::optional<std::string> y1, y2, ga1, ga2;  // comma-separated
  std::optional<SimulateSpec> simulate;
};

struct VerifyArgs {
  std::filesystem::path realization;
  std::filesystem::path problem;
  double tol = 1e-8;
  double moment_tol = 1e-6;
  std::optional<SimulateSpec> simulate;
};

struct ExampleArgs {
  std::filesystem::path output = "example_problem.json";
};

struct SimulateArgs {
  std::filesystem::path problem;
  std::optional<std::filesystem::path> realization;
  std::optional<std::filesystem::path> output;
  SimulateSpec spec;
  long record_every = 1;
  double moment_tol = 1e-6;
};

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_example(const ExampleArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err);

/// Full command line entry point (argv[0] included).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qfb::cli
