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

/// @file
/// Problem and report files.
///
/// Both are JSON documents carrying a "schema_version" string. Matrices are
/// row-major nested arrays of numbers; an empty array stands for a matrix
/// with zero rows. Doubles are written in shortest round-trip form, so a
/// write/read cycle is bit-exact.

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "qfb/lqss.hpp"
#include "qfb/synthesis.hpp"
#include "qfb/verification.hpp"

namespace qfb::io {

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent file content. The message names the field and,
/// for matrices, the offending position.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct ProblemFile {
  std::string schema_version = kSchemaVersion;
  DirectInteraction<double> interaction;
  SynthOptions<double> options;
};

struct Provenance {
  std::string tool_version = kToolVersion;
  std::string input_digest;  // sha256 of the problem file bytes
  std::string timestamp;     // UTC, ISO 8601
  Json parameters;           // effective free parameters and tolerances
};

struct ReportFile {
  std::string schema_version = kSchemaVersion;
  FeedbackRealization<double> realization;
  EquivalenceReport<double> report;
  Provenance provenance;
};

Json matrix_to_json(const MatrixX<double>& m);
/// Parses a nested array. expected_rows / expected_cols < 0 means
/// unconstrained; an empty array yields a 0 x expected_cols matrix.
MatrixX<double> matrix_from_json(const Json& j, const std::string& field,
                                 Index expected_rows = -1,
                                 Index expected_cols = -1);
Json vector_to_json(const VectorX<double>& v);
VectorX<double> vector_from_json(const Json& j, const std::string& field);

Json problem_to_json(const ProblemFile& p);
ProblemFile problem_from_json(const Json& j);

Json report_to_json(const ReportFile& r);
ReportFile report_from_json(const Json& j);

Json realization_to_json(const FeedbackRealization<double>& fr);
FeedbackRealization<double> realization_from_json(const Json& j);

Json equivalence_to_json(const EquivalenceReport<double>& rep);
EquivalenceReport<double> equivalence_from_json(const Json& j);

Json parameters_to_json(const SynthParameters<double>& prm);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json parse_json(const std::string& text, const std::string& source);
/// Pretty-printed, newline-terminated.
std::string dump(const Json& j);

ProblemFile read_problem(const std::filesystem::path& path);
ReportFile read_report(const std::filesystem::path& path);
/// Reads a bare nested-array matrix, or an object with a "p" field.
MatrixX<double> read_matrix(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();

/// The worked two-mode / three-mode example: the 4 x 6 R_AB below with
/// Rbar_A = 25 I_4, Rbar_B = 25 I_6 and one unit-rate damped external port
/// per system.
ProblemFile example_problem();

}  // namespace qfb::io
