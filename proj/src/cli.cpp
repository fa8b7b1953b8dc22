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

#include "qfb/cli.hpp"

#include <algorithm>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "qfb/io.hpp"
#include "qfb/special_svd.hpp"
#include "qfb/synthesis.hpp"
#include "qfb/verification.hpp"

namespace qfb::cli {

namespace fs = std::filesystem;

namespace {

VectorX<double> parse_csv(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(item);
      }
      values.push_back(v);
    } catch (const std::exception&) {
      throw io::FormatError(std::string(flag) + ": cannot parse '" + item +
                            "' as a number");
    }
  }
  return Eigen::Map<VectorX<double>>(values.data(),
                                     static_cast<Index>(values.size()));
}

void apply_overrides(const SynthArgs& a, SynthOptions<double>& opts) {
  if (a.m) {
    if (*a.m < 0) throw ValidationError("--m must be non-negative");
    opts.m = static_cast<Index>(*a.m);
  }
  if (a.y1) opts.y1_diag = parse_csv(*a.y1, "--y1");
  if (a.y2) opts.y2_diag = parse_csv(*a.y2, "--y2");
  if (a.ga1) opts.ga1_diag = parse_csv(*a.ga1, "--ga1");
  if (a.ga2) opts.ga2_diag = parse_csv(*a.ga2, "--ga2");
  if (a.p_matrix) opts.p = io::read_matrix(*a.p_matrix);
}

EquivalenceTolerances tolerances_for(double tol) {
  EquivalenceTolerances t;
  t.drift = tol;
  t.noise = tol;
  t.coupling = tol;
  t.cayley = tol;
  return t;
}

double moment_residual(const DirectInteraction<double>& di,
                       const FeedbackRealization<double>& fr,
                       const SimulateSpec& spec) {
  const auto direct = direct_dynamics(di);
  const auto [sys_a, sys_b] = feedback_systems(di, fr);
  const auto closed = feedback_closed_loop(sys_a, sys_b, fr.sigma);
  const auto [mean0, cov0] = vacuum_moments<double>(direct.state_dim());
  return compare_moment_trajectories(direct, closed, mean0, cov0, spec.t_final,
                                     spec.dt);
}

void print_failures(const EquivalenceReport<double>& rep, std::ostream& err,
                    double moment_tol) {
  for (const auto& f : rep.failures()) err << "verification failed: " << f << "\n";
  if (rep.moment_residual && !(*rep.moment_residual <= moment_tol)) {
    err << "verification failed: moment_residual = " << *rep.moment_residual
        << " > " << moment_tol << "\n";
  }
}

bool report_ok(const EquivalenceReport<double>& rep, double moment_tol) {
  return rep.passed() &&
         (!rep.moment_residual || *rep.moment_residual <= moment_tol);
}

// Runs fn, mapping library exceptions onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const DivergenceError& e) {
    err << "verification failed: " << e.what() << "\n";
    return kVerificationFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

int synth_one(const SynthArgs& a, const fs::path& input,
              const std::optional<fs::path>& output, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const std::string bytes = io::read_text(input);
    io::ProblemFile problem =
        io::problem_from_json(io::parse_json(bytes, input.string()));
    apply_overrides(a, problem.options);
    const auto& di = problem.interaction;

    SynthParameters<double> used;
    io::ReportFile rf;
    rf.realization =
        synthesize(di.sys_a.r, di.sys_b.r, di.r_ab, problem.options, &used);
    rf.report = check_equivalence(di, rf.realization, tolerances_for(a.tol));
    if (a.simulate) {
      rf.report.moment_residual = moment_residual(di, rf.realization, *a.simulate);
    }
    rf.provenance.input_digest = io::sha256_hex(bytes);
    rf.provenance.timestamp = io::utc_timestamp();
    rf.provenance.parameters = io::parameters_to_json(used);
    rf.provenance.parameters["tol"] = a.tol;
    if (a.simulate) {
      rf.provenance.parameters["simulate"] = {{"t_final", a.simulate->t_final},
                                              {"dt", a.simulate->dt},
                                              {"moment_tol", a.moment_tol}};
    }

    const std::string text = io::dump(io::report_to_json(rf));
    if (output) {
      io::write_text(*output, text);
    } else {
      out << text;
    }
    if (!report_ok(rf.report, a.moment_tol)) {
      print_failures(rf.report, err, a.moment_tol);
      return int(kVerificationFailed);
    }
    return int(kSuccess);
  });
}

std::string shape_of(const MatrixX<double>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  if (!args.batch_dir) return synth_one(args, args.input, args.output, out, err);

  std::vector<fs::path> inputs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(*args.batch_dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      inputs.push_back(entry.path());
    }
  }
  if (ec) {
    err << "error: cannot list '" << args.batch_dir->string()
        << "': " << ec.message() << "\n";
    return kInputError;
  }
  std::sort(inputs.begin(), inputs.end());
  const fs::path out_dir = args.output.value_or(*args.batch_dir);
  fs::create_directories(out_dir, ec);

  struct Outcome {
    int code;
    std::string messages;
  };
  std::vector<std::future<Outcome>> jobs;
  for (const auto& in : inputs) {
    const fs::path target = out_dir / (in.stem().string() + ".report.json");
    jobs.push_back(std::async(std::launch::async, [&args, in, target] {
      std::ostringstream o, e;
      const int code = synth_one(args, in, target, o, e);
      return Outcome{code, e.str()};
    }));
  }
  int worst = kSuccess;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Outcome r = jobs[i].get();
    out << inputs[i].filename().string() << ": exit " << r.code << "\n";
    err << r.messages;
    worst = std::max(worst, r.code);
  }
  return worst;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::ReportFile rf = io::read_report(args.realization);
    const io::ProblemFile problem = io::read_problem(args.problem);
    const auto& di = problem.interaction;
    const auto& fr = rf.realization;

    const Index na = 2 * di.sys_a.n;
    const Index nb = 2 * di.sys_b.n;
    const Index m2 = 2 * fr.m;
    const bool shapes_ok = fr.r_a.rows() == na && fr.r_b.rows() == nb &&
                           fr.c_a.rows() == m2 && fr.c_a.cols() == na &&
                           fr.c_b.rows() == m2 && fr.c_b.cols() == nb;
    if (!shapes_ok) {
      err << "error: realization does not match problem dimensions\n"
          << "  problem:     r_bar_a " << na << "x" << na << ", r_bar_b " << nb
          << "x" << nb << ", r_ab " << shape_of(di.r_ab) << "\n"
          << "  realization: m " << fr.m << ", r_a " << shape_of(fr.r_a)
          << ", r_b " << shape_of(fr.r_b) << ", c_a " << shape_of(fr.c_a)
          << ", c_b " << shape_of(fr.c_b) << "\n";
      return int(kInputError);
    }

    EquivalenceReport<double> rep =
        check_equivalence(di, fr, tolerances_for(args.tol));
    if (args.simulate) rep.moment_residual = moment_residual(di, fr, *args.simulate);
    out << io::dump(io::equivalence_to_json(rep));
    if (!report_ok(rep, args.moment_tol)) {
      print_failures(rep, err, args.moment_tol);
      return int(kVerificationFailed);
    }
    return int(kSuccess);
  });
}

int cmd_example(const ExampleArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::ProblemFile problem = io::example_problem();
    io::write_text(args.output, io::dump(io::problem_to_json(problem)));

    const auto& di = problem.interaction;
    const auto svd = special_svd(di.r_ab);
    const auto fr = synthesize(di.sys_a.r, di.sys_b.r, di.r_ab);
    out << std::fixed << std::setprecision(4);
    out << "wrote " << args.output.string() << "\n";
    out << "R_AB: 4x6, rank " << svd.rank << ", minimum channels "
        << min_channels(di.r_ab) << "\n";
    out << "T1 diagonal: " << svd.t1_diagonal().transpose()
        << "   (reference 22.9090 9.2570)\n";
    out << "T2 diagonal: " << svd.t2_diagonal().transpose()
        << "   (reference 7.4488 0.0000)\n";
    out << "defaults: Y1 = Y2 = G_A1 = G_A2 = I, P = I  =>  X = -J_4\n";
    out << "Sigma (reference -J_4):\n" << fr.sigma << "\n";
    out << "self-Hamiltonians Rbar_A = 25 I_4, Rbar_B = 25 I_6 and the "
           "single damped external port per system are illustrative "
           "choices; only R_AB is part of the reference data.\n";
    return int(kSuccess);
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const io::ProblemFile problem = io::read_problem(args.problem);
    const auto& di = problem.interaction;
    const auto direct = direct_dynamics(di);
    const auto [mean0, cov0] = vacuum_moments<double>(direct.state_dim());
    const auto traj = simulate_moments(direct, mean0, cov0, args.spec.t_final,
                                       args.spec.dt, args.record_every);

    io::Json doc;
    doc["schema_version"] = io::kSchemaVersion;
    doc["t_final"] = args.spec.t_final;
    doc["dt"] = args.spec.dt;
    const auto trajectory_json = [](const MomentTrajectory<double>& t) {
      io::Json j = io::Json::array();
      for (std::size_t i = 0; i < t.times.size(); ++i) {
        j.push_back({{"t", t.times[i]},
                     {"mean", io::vector_to_json(t.means[i])},
                     {"covariance", io::matrix_to_json(t.covariances[i])}});
      }
      return j;
    };
    doc["direct"] = trajectory_json(traj);

    int code = kSuccess;
    if (args.realization) {
      const io::ReportFile rf = io::read_report(*args.realization);
      const auto [sys_a, sys_b] = feedback_systems(di, rf.realization);
      const auto closed = feedback_closed_loop(sys_a, sys_b, rf.realization.sigma);
      const auto ctraj = simulate_moments(closed, mean0, cov0, args.spec.t_final,
                                          args.spec.dt, args.record_every);
      doc["feedback"] = trajectory_json(ctraj);
      double sup = 0;
      for (std::size_t i = 0; i < traj.times.size(); ++i) {
        sup = std::max(sup, max_abs(VectorX<double>(traj.means[i] - ctraj.means[i])));
        sup = std::max(sup, max_abs(MatrixX<double>(traj.covariances[i] -
                                                    ctraj.covariances[i])));
      }
      doc["moment_residual"] = sup;
      out << "moment_residual " << std::setprecision(6) << std::scientific << sup
          << "\n";
      if (!(sup <= args.moment_tol)) {
        err << "verification failed: moment_residual exceeds " << args.moment_tol
            << "\n";
        code = kVerificationFailed;
      }
    }
    const MatrixX<double>& p_final = traj.covariances.back();
    out << "t_final " << traj.times.back() << ", final covariance trace "
        << p_final.trace() << "\n";
    if (args.output) io::write_text(*args.output, io::dump(doc));
    return code;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feedback synthesis of bilinear interactions between linear "
               "quantum stochastic systems"};
  app.require_subcommand(1);

  SynthArgs synth;
  std::vector<double> synth_sim;
  std::string synth_input;
  auto* s = app.add_subcommand("synth", "Synthesize a feedback realization");
  s->add_option("input", synth_input, "Problem file")->check(CLI::ExistingFile);
  s->add_option("--output,-o", synth.output, "Report path (stdout if absent)");
  s->add_option("--batch", synth.batch_dir, "Process every *.json in a directory")
      ->check(CLI::ExistingDirectory);
  s->add_option("--tol", synth.tol, "Relative residual tolerance")
      ->capture_default_str();
  s->add_option("--moment-tol", synth.moment_tol, "Moment comparison tolerance")
      ->capture_default_str();
  s->add_option("--m", synth.m, "Number of interconnection channels");
  s->add_option("--p-matrix", synth.p_matrix, "Orthogonal symplectic P (JSON)")
      ->check(CLI::ExistingFile);
  s->add_option("--y1", synth.y1, "Comma-separated Y1 diagonal");
  s->add_option("--y2", synth.y2, "Comma-separated Y2 diagonal");
  s->add_option("--ga1", synth.ga1, "Comma-separated G_A1 diagonal");
  s->add_option("--ga2", synth.ga2, "Comma-separated G_A2 diagonal");
  s->add_option("--simulate", synth_sim, "Moment comparison: t_final dt")
      ->expected(2);

  VerifyArgs verify;
  std::vector<double> verify_sim;
  auto* v = app.add_subcommand("verify", "Check a report against a problem");
  v->add_option("realization", verify.realization, "Report file")
      ->required()
      ->check(CLI::ExistingFile);
  v->add_option("problem", verify.problem, "Problem file")
      ->required()
      ->check(CLI::ExistingFile);
  v->add_option("--tol", verify.tol, "Relative residual tolerance")
      ->capture_default_str();
  v->add_option("--moment-tol", verify.moment_tol, "Moment comparison tolerance")
      ->capture_default_str();
  v->add_option("--simulate", verify_sim, "Moment comparison: t_final dt")
      ->expected(2);

  ExampleArgs example;
  auto* e = app.add_subcommand("example", "Write the built-in example problem");
  e->add_option("--output,-o", example.output, "Destination")
      ->capture_default_str();

  SimulateArgs sim;
  std::vector<double> sim_spec;
  auto* m = app.add_subcommand("simulate", "Integrate first and second moments");
  m->add_option("problem", sim.problem, "Problem file")
      ->required()
      ->check(CLI::ExistingFile);
  m->add_option("--realization", sim.realization, "Report file to compare")
      ->check(CLI::ExistingFile);
  m->add_option("--simulate", sim_spec, "t_final dt (default 10 0.001)")
      ->expected(2);
  m->add_option("--record-every", sim.record_every, "Store every k-th step")
      ->capture_default_str();
  m->add_option("--moment-tol", sim.moment_tol, "Moment comparison tolerance")
      ->capture_default_str();
  m->add_option("--output,-o", sim.output, "Trajectory JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? int(kSuccess) : int(kInputError);
  }

  const auto to_spec = [](const std::vector<double>& v) {
    return SimulateSpec{v.at(0), v.at(1)};
  };
  if (s->parsed()) {
    if (synth_input.empty() && !synth.batch_dir) {
      err << "error: synth needs an input file or --batch <dir>\n";
      return kInputError;
    }
    synth.input = synth_input;
    if (!synth_sim.empty()) synth.simulate = to_spec(synth_sim);
    return cmd_synth(synth, out, err);
  }
  if (v->parsed()) {
    if (!verify_sim.empty()) verify.simulate = to_spec(verify_sim);
    return cmd_verify(verify, out, err);
  }
  if (e->parsed()) return cmd_example(example, out, err);
  if (!sim_spec.empty()) sim.spec = to_spec(sim_spec);
  return cmd_simulate(sim, out, err);
}

}  // namespace qfb::cli
