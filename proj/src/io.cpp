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

#include "qfb/io.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qfb::io {

namespace {

std::string at(const std::string& field, Index row, Index col = -1) {
  std::ostringstream os;
  os << "field '" << field << "' row " << row;
  if (col >= 0) os << " column " << col;
  return os.str();
}

double number_from_json(const Json& j, const std::string& where) {
  if (!j.is_number()) {
    throw FormatError(where + ": expected a number, got " +
                      std::string(j.type_name()));
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FormatError(where + ": non-finite number");
  return v;
}

// Non-finite scalars (an infinite eigenvalue margin when m = 0) are stored
// as null.
Json scalar_to_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double scalar_from_json(const Json& j, const std::string& field) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) {
    throw FormatError("field '" + field + "': expected a number");
  }
  return j.get<double>();
}

const Json& require(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw FormatError(ctx + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) {
    throw FormatError(ctx + ": missing field '" + key + "'");
  }
  return *it;
}

Index count_from_json(const Json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw FormatError("field '" + field + "': expected a non-negative integer");
  }
  return static_cast<Index>(j.get<long long>());
}

}  // namespace

Json matrix_to_json(const MatrixX<double>& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixX<double> matrix_from_json(const Json& j, const std::string& field,
                                 Index expected_rows, Index expected_cols) {
  if (!j.is_array()) {
    throw FormatError("field '" + field + "': expected a nested array, got " +
                      std::string(j.type_name()));
  }
  const Index rows = static_cast<Index>(j.size());
  if (expected_rows >= 0 && rows != expected_rows) {
    throw FormatError("field '" + field + "': expected " +
                      std::to_string(expected_rows) + " rows, got " +
                      std::to_string(rows));
  }
  if (rows == 0) return MatrixX<double>::Zero(0, std::max<Index>(0, expected_cols));

  Index cols = -1;
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) {
      throw FormatError(at(field, i) + ": expected an array");
    }
    const Index len = static_cast<Index>(row.size());
    if (cols < 0) cols = len;
    if (len != cols) {
      throw FormatError(at(field, i) + ": has " + std::to_string(len) +
                        " entries, row 0 has " + std::to_string(cols));
    }
  }
  if (expected_cols >= 0 && cols != expected_cols) {
    throw FormatError("field '" + field + "': expected " +
                      std::to_string(expected_cols) + " columns, got " +
                      std::to_string(cols));
  }
  MatrixX<double> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) {
      m(i, k) = number_from_json(j[static_cast<std::size_t>(i)]
                                  [static_cast<std::size_t>(k)],
                                 at(field, i, k));
    }
  }
  return m;
}

Json vector_to_json(const VectorX<double>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorX<double> vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) {
    throw FormatError("field '" + field + "': expected an array");
  }
  VectorX<double> v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = number_from_json(j[static_cast<std::size_t>(i)],
                            "field '" + field + "' entry " + std::to_string(i));
  }
  return v;
}

// --- problem files -----------------------------------------------------------

Json problem_to_json(const ProblemFile& p) {
  const auto& di = p.interaction;
  Json j;
  j["schema_version"] = p.schema_version;
  j["n_a"] = di.sys_a.n;
  j["n_b"] = di.sys_b.n;
  j["r_bar_a"] = matrix_to_json(di.sys_a.r);
  j["r_bar_b"] = matrix_to_json(di.sys_b.r);
  j["r_ab"] = matrix_to_json(di.r_ab);
  j["c_bar_a"] = matrix_to_json(di.sys_a.c);
  j["d_bar_a"] = matrix_to_json(di.sys_a.d);
  j["c_bar_b"] = matrix_to_json(di.sys_b.c);
  j["d_bar_b"] = matrix_to_json(di.sys_b.d);

  Json opts = Json::object();
  const auto& o = p.options;
  if (o.m) opts["m"] = *o.m;
  if (o.y1_diag) opts["y1"] = vector_to_json(*o.y1_diag);
  if (o.y2_diag) opts["y2"] = vector_to_json(*o.y2_diag);
  if (o.ga1_diag) opts["ga1"] = vector_to_json(*o.ga1_diag);
  if (o.ga2_diag) opts["ga2"] = vector_to_json(*o.ga2_diag);
  if (o.p) opts["p"] = matrix_to_json(*o.p);
  opts["rank_tol"] = o.rank_tol;
  j["options"] = std::move(opts);
  return j;
}

namespace {

LqssParams<double> external_system(const Json& j, const char* suffix,
                                   Index n, MatrixX<double> r) {
  const std::string c_key = std::string("c_bar_") + suffix;
  const std::string d_key = std::string("d_bar_") + suffix;
  MatrixX<double> c = MatrixX<double>::Zero(0, 2 * n);
  if (j.contains(c_key)) c = matrix_from_json(j[c_key], c_key, -1, 2 * n);
  if (c.rows() % 2 != 0) {
    throw FormatError("field '" + c_key + "': row count must be even, got " +
                      std::to_string(c.rows()));
  }
  MatrixX<double> d = MatrixX<double>::Identity(c.rows(), c.rows());
  if (j.contains(d_key)) {
    d = matrix_from_json(j[d_key], d_key, c.rows(), c.rows());
  }
  return {n, std::move(r), std::move(c), std::move(d)};
}

}  // namespace

ProblemFile problem_from_json(const Json& j) {
  const std::string ctx = "problem file";
  ProblemFile p;
  const Json& version = require(j, "schema_version", ctx);
  if (!version.is_string()) {
    throw FormatError("field 'schema_version': expected a string");
  }
  p.schema_version = version.get<std::string>();
  if (p.schema_version != kSchemaVersion) {
    throw FormatError("field 'schema_version': unsupported version '" +
                      p.schema_version + "' (expected '" + kSchemaVersion +
                      "')");
  }
  const Index n_a = count_from_json(require(j, "n_a", ctx), "n_a");
  const Index n_b = count_from_json(require(j, "n_b", ctx), "n_b");
  MatrixX<double> r_bar_a =
      matrix_from_json(require(j, "r_bar_a", ctx), "r_bar_a", 2 * n_a, 2 * n_a);
  MatrixX<double> r_bar_b =
      matrix_from_json(require(j, "r_bar_b", ctx), "r_bar_b", 2 * n_b, 2 * n_b);
  p.interaction.r_ab =
      matrix_from_json(require(j, "r_ab", ctx), "r_ab", 2 * n_a, 2 * n_b);
  p.interaction.sys_a = external_system(j, "a", n_a, std::move(r_bar_a));
  p.interaction.sys_b = external_system(j, "b", n_b, std::move(r_bar_b));
  p.interaction.validate();

  if (j.contains("options")) {
    const Json& o = j["options"];
    if (!o.is_object()) throw FormatError("field 'options': expected an object");
    auto& opts = p.options;
    if (o.contains("m")) opts.m = count_from_json(o["m"], "options.m");
    if (o.contains("y1")) opts.y1_diag = vector_from_json(o["y1"], "options.y1");
    if (o.contains("y2")) opts.y2_diag = vector_from_json(o["y2"], "options.y2");
    if (o.contains("ga1")) {
      opts.ga1_diag = vector_from_json(o["ga1"], "options.ga1");
    }
    if (o.contains("ga2")) {
      opts.ga2_diag = vector_from_json(o["ga2"], "options.ga2");
    }
    if (o.contains("p")) opts.p = matrix_from_json(o["p"], "options.p");
    if (o.contains("rank_tol")) {
      opts.rank_tol = number_from_json(o["rank_tol"], "field 'options.rank_tol'");
    }
  }
  return p;
}

// --- reports -----------------------------------------------------------------

Json realization_to_json(const FeedbackRealization<double>& fr) {
  Json j;
  j["m"] = fr.m;
  j["c_a"] = matrix_to_json(fr.c_a);
  j["c_b"] = matrix_to_json(fr.c_b);
  j["x"] = matrix_to_json(fr.x);
  j["sigma"] = matrix_to_json(fr.sigma);
  j["r_a"] = matrix_to_json(fr.r_a);
  j["r_b"] = matrix_to_json(fr.r_b);
  return j;
}

FeedbackRealization<double> realization_from_json(const Json& j) {
  const std::string ctx = "realization";
  FeedbackRealization<double> fr;
  fr.m = count_from_json(require(j, "m", ctx), "realization.m");
  const Index m2 = 2 * fr.m;
  fr.r_a = matrix_from_json(require(j, "r_a", ctx), "realization.r_a");
  fr.r_b = matrix_from_json(require(j, "r_b", ctx), "realization.r_b");
  fr.c_a = matrix_from_json(require(j, "c_a", ctx), "realization.c_a", m2,
                            fr.r_a.rows());
  fr.c_b = matrix_from_json(require(j, "c_b", ctx), "realization.c_b", m2,
                            fr.r_b.rows());
  fr.x = matrix_from_json(require(j, "x", ctx), "realization.x", m2, m2);
  fr.sigma =
      matrix_from_json(require(j, "sigma", ctx), "realization.sigma", m2, m2);
  return fr;
}

Json equivalence_to_json(const EquivalenceReport<double>& rep) {
  Json j;
  j["passed"] = rep.passed();
  j["drift_residual"] = scalar_to_json(rep.drift_residual);
  j["noise_residual"] = scalar_to_json(rep.noise_residual);
  j["coupling_residual"] = scalar_to_json(rep.coupling_residual);
  j["cayley_residual"] = scalar_to_json(rep.cayley_residual);
  j["unit_eigen_margin"] = scalar_to_json(rep.unit_eigen_margin);
  Json flags = Json::object();
  for (const auto& [name, ok] : rep.invariant_flags) flags[name] = ok;
  j["invariant_flags"] = std::move(flags);
  j["moment_residual"] = rep.moment_residual
                             ? scalar_to_json(*rep.moment_residual)
                             : Json(nullptr);
  const auto& t = rep.tolerances;
  j["tolerances"] = {{"drift", t.drift},
                     {"noise", t.noise},
                     {"coupling", t.coupling},
                     {"cayley", t.cayley},
                     {"sharp_skew", t.sharp_skew},
                     {"symplectic", t.symplectic},
                     {"symmetry", t.symmetry},
                     {"unit_eigen_margin", t.unit_eigen_margin}};
  Json failures = Json::array();
  for (const auto& f : rep.failures()) failures.push_back(f);
  j["failures"] = std::move(failures);
  return j;
}

EquivalenceReport<double> equivalence_from_json(const Json& j) {
  const std::string ctx = "report";
  EquivalenceReport<double> rep;
  rep.drift_residual =
      scalar_from_json(require(j, "drift_residual", ctx), "drift_residual");
  rep.noise_residual =
      scalar_from_json(require(j, "noise_residual", ctx), "noise_residual");
  rep.coupling_residual = scalar_from_json(
      require(j, "coupling_residual", ctx), "coupling_residual");
  rep.cayley_residual =
      scalar_from_json(require(j, "cayley_residual", ctx), "cayley_residual");
  rep.unit_eigen_margin = scalar_from_json(
      require(j, "unit_eigen_margin", ctx), "unit_eigen_margin");
  for (const auto& [name, ok] : require(j, "invariant_flags", ctx).items()) {
    rep.invariant_flags.emplace_back(name, ok.get<bool>());
  }
  if (j.contains("moment_residual") && !j["moment_residual"].is_null()) {
    rep.moment_residual =
        scalar_from_json(j["moment_residual"], "moment_residual");
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    auto& tol = rep.tolerances;
    tol.drift = t.value("drift", tol.drift);
    tol.noise = t.value("noise", tol.noise);
    tol.coupling = t.value("coupling", tol.coupling);
    tol.cayley = t.value("cayley", tol.cayley);
    tol.sharp_skew = t.value("sharp_skew", tol.sharp_skew);
    tol.symplectic = t.value("symplectic", tol.symplectic);
    tol.symmetry = t.value("symmetry", tol.symmetry);
    tol.unit_eigen_margin = t.value("unit_eigen_margin", tol.unit_eigen_margin);
  }
  return rep;
}

Json parameters_to_json(const SynthParameters<double>& prm) {
  Json j;
  j["m"] = prm.m;
  j["y1"] = vector_to_json(prm.y1);
  j["y2"] = vector_to_json(prm.y2);
  j["ga1"] = vector_to_json(prm.ga1);
  j["ga2"] = vector_to_json(prm.ga2);
  j["p"] = matrix_to_json(prm.p);
  j["rank_tol"] = prm.rank_tol;
  return j;
}

Json report_to_json(const ReportFile& r) {
  Json j;
  j["schema_version"] = r.schema_version;
  j["realization"] = realization_to_json(r.realization);
  j["report"] = equivalence_to_json(r.report);
  j["provenance"] = {{"tool_version", r.provenance.tool_version},
                     {"input_digest", r.provenance.input_digest},
                     {"timestamp", r.provenance.timestamp},
                     {"parameters", r.provenance.parameters}};
  return j;
}

ReportFile report_from_json(const Json& j) {
  const std::string ctx = "report file";
  ReportFile r;
  const Json& version = require(j, "schema_version", ctx);
  if (!version.is_string() || version.get<std::string>() != kSchemaVersion) {
    throw FormatError("field 'schema_version': unsupported or missing version");
  }
  r.realization = realization_from_json(require(j, "realization", ctx));
  if (j.contains("report")) r.report = equivalence_from_json(j["report"]);
  if (j.contains("provenance")) {
    const Json& p = j["provenance"];
    r.provenance.tool_version = p.value("tool_version", std::string());
    r.provenance.input_digest = p.value("input_digest", std::string());
    r.provenance.timestamp = p.value("timestamp", std::string());
    if (p.contains("parameters")) r.provenance.parameters = p["parameters"];
  }
  return r;
}

// --- files -------------------------------------------------------------------

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(source + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

ProblemFile read_problem(const std::filesystem::path& path) {
  return problem_from_json(parse_json(read_text(path), path.string()));
}

ReportFile read_report(const std::filesystem::path& path) {
  return report_from_json(parse_json(read_text(path), path.string()));
}

MatrixX<double> read_matrix(const std::filesystem::path& path) {
  const Json j = parse_json(read_text(path), path.string());
  if (j.is_object()) return matrix_from_json(require(j, "p", path.string()), "p");
  return matrix_from_json(j, path.string());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << int(digest[i]);
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

ProblemFile example_problem() {
  ProblemFile p;
  auto& di = p.interaction;
  di.r_ab.resize(4, 6);
  di.r_ab << 4, -7, 7, 0, 2, 0,  //
      1, -5, 5, -4, 1, 5,        //
      9, -6, 0, 0, 2, 9,         //
      12, -8, 2, 4, 3, 4;
  const auto port_on_first_mode = [](Index n) {
    MatrixX<double> c = MatrixX<double>::Zero(2, 2 * n);
    c(0, 0) = 1;
    c(1, n) = 1;
    return c;
  };
  di.sys_a = {2, 25 * MatrixX<double>::Identity(4, 4), port_on_first_mode(2),
              MatrixX<double>::Identity(2, 2)};
  di.sys_b = {3, 25 * MatrixX<double>::Identity(6, 6), port_on_first_mode(3),
              MatrixX<double>::Identity(2, 2)};
  return p;
}

}  // namespace qfb::io
