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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qfb/io.hpp"
#include "qfb/lqss.hpp"
#include "qfb/special_svd.hpp"
#include "qfb/symplectic.hpp"
#include "qfb/synthesis.hpp"
#include "qfb/verification.hpp"
#include "test_util.hpp"

using namespace qfb;
using namespace qfb::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

int g_failures = 0;

void criterion(const char* id, const char* title, double time_limit_s,
               const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail << "unexpected exception: " << e.what() << "; ";
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0 && elapsed >= time_limit_s) {
    o.ok = false;
    o.detail << "runtime " << elapsed << " s exceeds " << time_limit_s << " s; ";
  }
  std::printf("%s %s: %s (%.3f s) %s\n", o.ok ? "PASS" : "FAIL", id, title,
              elapsed, o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.ok) ++g_failures;
}

// 1/2 J C_A# (X + I) C_B through explicit J and sharp loops.
Mat reference_coupling(const Mat& c_a, const Mat& c_b, const Mat& x) {
  return 0.5 * reference_j(c_a.cols() / 2) * reference_sharp(c_a) *
         (x + Mat::Identity(x.rows(), x.cols())) * c_b;
}

Index reference_rank(const Mat& t) {
  const Vec s = Eigen::JacobiSVD<Mat>(t).singularValues();
  Index k = 0;
  for (Index i = 0; i < s.size(); ++i) k += s(i) > 1e-10 * std::max(1.0, s(0));
  return k;
}

// Randomized instance: n_A, n_B in 1..4, rank of R_AB uniform in 0..2 min,
// random symmetric self-Hamiltonians and 0..2 random external ports.
std::vector<DirectInteraction<double>> random_suite(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<DirectInteraction<double>> out;
  for (int i = 0; i < count; ++i) {
    const Index na = rng.integer(1, 4), nb = rng.integer(1, 4);
    const Index rank = rng.integer(0, 2 * std::min(na, nb));
    const Mat r_ab = rank == 0 ? Mat(Mat::Zero(2 * na, 2 * nb))
                               : rng.low_rank(2 * na, 2 * nb, rank);
    out.push_back({random_lqss(rng, na, rng.integer(0, 2)),
                   random_lqss(rng, nb, rng.integer(0, 2)), r_ab});
  }
  return out;
}

const std::vector<DirectInteraction<double>>& suite() {
  static const auto s = random_suite(20261015, 200);
  return s;
}

FeedbackRealization<double> realize(const DirectInteraction<double>& di) {
  return synthesize(di.sys_a.r, di.sys_b.r, di.r_ab);
}

// Independent assembly of the direct-interaction drift from the block
// formula, without going through direct_dynamics.
Mat reference_direct_drift(const DirectInteraction<double>& di) {
  const Index na = 2 * di.sys_a.n, nb = 2 * di.sys_b.n;
  Mat h = Mat::Zero(na + nb, na + nb);
  h.topLeftCorner(na, na) = di.sys_a.r;
  h.bottomRightCorner(nb, nb) = di.sys_b.r;
  h.topRightCorner(na, nb) = di.r_ab;
  h.bottomLeftCorner(nb, na) = di.r_ab.transpose();
  Mat j = Mat::Zero(na + nb, na + nb);
  j.topLeftCorner(na, na) = reference_j(di.sys_a.n);
  j.bottomRightCorner(nb, nb) = reference_j(di.sys_b.n);
  Mat damping = Mat::Zero(na + nb, na + nb);
  if (di.sys_a.c.rows() > 0) {
    damping.topLeftCorner(na, na) = reference_sharp(di.sys_a.c) * di.sys_a.c;
  }
  if (di.sys_b.c.rows() > 0) {
    damping.bottomRightCorner(nb, nb) = reference_sharp(di.sys_b.c) * di.sys_b.c;
  }
  return j * h - 0.5 * damping;
}

void ac1(Outcome& o) {
  const Mat r_ab = io::example_problem().interaction.r_ab;
  const auto svd = special_svd(r_ab);
  const Vec t1 = svd.t1_diagonal(), t2 = svd.t2_diagonal();
  o.detail << "T1 = (" << t1(0) << ", " << t1(1) << "), T2 = (" << t2(0) << ", "
           << t2(1) << "); ";
  o.require(std::abs(t1(0) - 22.9090) <= 1e-3 && std::abs(t1(1) - 9.2570) <= 1e-3,
            "T1 diagonal");
  o.require(std::abs(t2(0) - 7.4488) <= 1e-3 && std::abs(t2(1)) <= 1e-3,
            "T2 diagonal");
  o.require(min_channels(r_ab) == 2, "minimum channels");
  const auto fr = synthesize<double>(Mat::Zero(4, 4), Mat::Zero(6, 6), r_ab);
  const Mat j4 = reference_j(2);
  const double sigma_err = max_abs(Mat(fr.sigma + j4));
  const double x_err = max_abs(Mat(fr.x + j4));
  o.detail << "|Sigma + J| = " << sigma_err << ", |X + J| = " << x_err << "; ";
  o.require(fr.m == 2, "m");
  o.require(sigma_err <= 1e-9, "Sigma = -J");
  o.require(x_err <= 1e-9, "X = -J");
}

void ac2(Outcome& o) {
  double worst = 0;
  auto check = [&](const Mat& ra, const Mat& rb, const Mat& r_ab) {
    const auto fr = synthesize(ra, rb, r_ab);
    const double rel = max_abs(Mat(r_ab - reference_coupling(fr.c_a, fr.c_b, fr.x))) /
                       std::max(1.0, max_abs(r_ab));
    worst = std::max(worst, rel);
    o.require(rel <= 1e-8, "relation residual");
  };
  const auto ex = io::example_problem().interaction;
  check(ex.sys_a.r, ex.sys_b.r, ex.r_ab);
  for (const auto& di : suite()) check(di.sys_a.r, di.sys_b.r, di.r_ab);
  o.detail << "201 instances, worst relative residual " << worst << "; ";
}

void ac3(Outcome& o) {
  double worst = 0;
  for (const auto& di : suite()) {
    const auto fr = realize(di);
    const auto [sa, sb] = feedback_systems(di, fr);
    const Mat closed = feedback_closed_loop(sa, sb, fr.sigma).a;
    const Mat direct = reference_direct_drift(di);
    const Mat library_direct = direct_dynamics(di).a;
    const double scale = std::max(1.0, max_abs(direct));
    const double rel = max_abs(Mat(direct - closed)) / scale;
    const double rel_lib = max_abs(Mat(library_direct - direct)) / scale;
    worst = std::max({worst, rel, rel_lib});
    o.require(rel <= 1e-8, "closed-loop drift");
    o.require(rel_lib <= 1e-8, "direct drift assembly");
  }
  o.detail << "200 instances, worst relative drift gap " << worst << "; ";
}

void ac4(Outcome& o) {
  int tested = 0;
  for (const auto& di : suite()) {
    const Index rank = reference_rank(di.r_ab);
    if (rank < 1) continue;
    ++tested;
    const Index minimum = (rank + 1) / 2;
    SynthOptions<double> opts;
    opts.m = minimum - 1;
    bool rejected = false;
    try {
      synthesize(di.sys_a.r, di.sys_b.r, di.r_ab, opts);
    } catch (const InfeasibleError& e) {
      rejected = e.minimum_channels() == minimum;
    }
    o.require(rejected, "m = ceil(rank/2) - 1 rejected");
    opts.m = minimum;
    bool accepted = true;
    try {
      synthesize(di.sys_a.r, di.sys_b.r, di.r_ab, opts);
    } catch (const std::exception&) {
      accepted = false;
    }
    o.require(accepted, "m = ceil(rank/2) accepted");
  }
  o.detail << tested << " instances with rank >= 1; ";
  o.require(tested > 100, "enough rank >= 1 instances");
}

void ac5(Outcome& o) {
  constexpr int kCases = 1000;
  Rng rng(5005);
  double sharp_err = 0, closure_err = 0, cayley_err = 0, svd_err = 0, real_err = 0;
  int cayley_rejected = 0;
  for (int t = 0; t < kCases; ++t) {
    // Sharp-adjoint laws against the loop-coded reference.
    {
      const Index r = rng.integer(1, 3), s = rng.integer(1, 3), u = rng.integer(1, 3);
      const Mat a = rng.matrix(2 * r, 2 * s), b = rng.matrix(2 * r, 2 * s);
      const Mat c = rng.matrix(2 * s, 2 * u);
      const double x1 = rng.normal(), x2 = rng.normal();
      const Mat sa = sharp_adjoint(a);
      double e = max_abs(Mat(sa - reference_sharp(a)));
      e = std::max(e, max_abs(Mat(sharp_adjoint(Mat(x1 * a + x2 * b)) -
                                  x1 * sa - x2 * sharp_adjoint(b))));
      e = std::max(e, max_abs(Mat(sharp_adjoint(Mat(a * c)) -
                                  sharp_adjoint(c) * sa)));
      e = std::max(e, max_abs(Mat(sharp_adjoint(sa) - a)));
      sharp_err = std::max(sharp_err, e);
    }
    // Symplectic group closure, relative to the entry scale.
    {
      const Index k = rng.integer(1, 4);
      const Mat s1 = rng.symplectic(k), s2 = rng.symplectic(k);
      const Mat j = reference_j(k);
      const Mat prod = s1 * s2;
      const Mat inv = reference_sharp(s1);
      const double scale = std::max(1.0, max_abs(s1)) * std::max(1.0, max_abs(s2));
      double e = max_abs(Mat(prod * j * prod.transpose() - j)) / (scale * scale);
      e = std::max(e, max_abs(Mat(s1 * inv - Mat::Identity(2 * k, 2 * k))) /
                          (scale * scale));
      e = std::max(e, is_symplectic(inv, 1e-9 * scale * scale) ? 0.0 : 1.0);
      closure_err = std::max(closure_err, e);
    }
    // Cayley round trip. The transform needs X + I invertible; draws with
    // rcond(X + I) < 1e-6 are redrawn.
    {
      const Index k = rng.integer(1, 4);
      Mat x;
      for (;;) {
        x = rng.sharp_skew(k);
        Eigen::JacobiSVD<Mat> sv(Mat(x + Mat::Identity(2 * k, 2 * k)));
        const Vec s = sv.singularValues();
        if (s(s.size() - 1) / s(0) >= 1e-6) break;
        ++cayley_rejected;
      }
      const Mat sigma = cayley_sigma_from_x(x);
      const Mat j = reference_j(k);
      const double scale = std::max(1.0, max_abs(sigma));
      double e = max_abs(Mat(cayley_x_from_sigma(sigma) - x)) /
                 std::max(1.0, max_abs(x));
      e = std::max(e, max_abs(Mat(sigma * j * sigma.transpose() - j)) /
                          (scale * scale));
      cayley_err = std::max(cayley_err, e);
    }
    // Partition permutation identity, exact.
    {
      const Index ma = rng.integer(0, 5), mb = rng.integer(ma == 0 ? 1 : 0, 5);
      const Mat pi = build_partition_permutation(ma, mb);
      Mat expected = Mat::Zero(2 * (ma + mb), 2 * (ma + mb));
      if (ma > 0) expected.topLeftCorner(2 * ma, 2 * ma) = reference_j(ma);
      if (mb > 0) expected.bottomRightCorner(2 * mb, 2 * mb) = reference_j(mb);
      o.require(Mat(pi * reference_j(ma + mb) * pi.transpose()) == expected,
                "partition identity");
      o.require(Mat(pi * pi.transpose()) ==
                    Mat(Mat::Identity(2 * (ma + mb), 2 * (ma + mb))),
                "partition orthogonality");
    }
    // Special SVD reconstruction.
    {
      const Index r = rng.integer(1, 4), s = rng.integer(1, 4);
      const Index k = rng.integer(1, 2 * std::min(r, s));
      const Mat t = rng.low_rank(2 * r, 2 * s, k);
      const auto svd = special_svd(t);
      svd_err = std::max(svd_err, max_abs(Mat(svd.u_tilde * svd.t_tilde *
                                                  svd.v_tilde.transpose() -
                                              t)) /
                                      max_abs(t));
      o.require(is_orthogonal(svd.u_tilde, 1e-12) && is_orthogonal(svd.v_tilde, 1e-12),
                "special SVD factors orthogonal");
    }
    // Physical realizability A J + J A^T + B J B^T = 0.
    {
      const auto sys = random_lqss(rng, rng.integer(1, 4), rng.integer(0, 3));
      const auto dyn = single_dynamics(sys);
      const Index n = sys.n;
      const Mat j = reference_j(n);
      Mat bjb = Mat::Zero(2 * n, 2 * n);
      if (dyn.b_ext.cols() > 0) {
        bjb = dyn.b_ext * reference_j(dyn.b_ext.cols() / 2) * dyn.b_ext.transpose();
      }
      real_err = std::max(real_err,
                          max_abs(Mat(dyn.a * j + j * dyn.a.transpose() + bjb)));
    }
  }
  o.detail << kCases << " cases each: sharp " << sharp_err << ", closure "
           << closure_err << ", cayley " << cayley_err << " (" << cayley_rejected
           << " redrawn), svd " << svd_err << ", realizability " << real_err << "; ";
  o.require(sharp_err <= 1e-12, "sharp-adjoint laws");
  o.require(closure_err <= 1e-9, "symplectic closure");
  o.require(cayley_err <= 1e-9, "Cayley round trip");
  o.require(svd_err <= 1e-10, "special SVD reconstruction");
  o.require(real_err <= 1e-10, "physical realizability");
}

void ac6(Outcome& o) {
  // Damped single mode against the Lyapunov oracle.
  for (double kappa : {0.5, 1.0, 4.0}) {
    const LqssParams<double> sys{1, Mat::Zero(2, 2),
                                 std::sqrt(kappa) * Mat::Identity(2, 2),
                                 Mat::Identity(2, 2)};
    const auto dyn = single_dynamics(sys);
    const Mat oracle =
        lyapunov_reference(dyn.a, Mat(0.5 * dyn.b_ext * dyn.b_ext.transpose()));
    Mat p0(2, 2);
    p0 << 2.0, 0.3, 0.3, 1.0;
    const auto traj = simulate_moments(dyn, Vec(Vec::Ones(2)), p0, 20 / kappa,
                                       1e-3 / kappa, 1 << 30);
    const double err = max_abs(Mat(traj.covariances.back() - oracle));
    const double vac = max_abs(Mat(oracle - 0.5 * Mat::Identity(2, 2)));
    o.detail << "kappa " << kappa << ": |P - oracle| " << err << "; ";
    o.require(err <= 1e-6 && vac <= 1e-12, "damped mode reaches vacuum");
  }

  // Worked example: direct and feedback realizations.
  {
    const auto di = io::example_problem().interaction;
    const auto fr = realize(di);
    const auto [sa, sb] = feedback_systems(di, fr);
    Vec mu0 = Vec::Zero(10);
    mu0(0) = 1.0;
    mu0(4) = 0.5;
    mu0(7) = -1.0;
    const double gap = compare_moment_trajectories(
        direct_dynamics(di), feedback_closed_loop(sa, sb, fr.sigma), mu0,
        Mat(0.5 * Mat::Identity(10, 10)), 10.0, 1e-3);
    o.detail << "example direct vs feedback " << gap << "; ";
    o.require(gap <= 1e-6, "example moment agreement");
  }

  // Fourth-order convergence over a decade of steps scaled to the spectral
  // radius, from dt rho = 0.2 down to 0.0125.
  {
    Rng rng(6006);
    const auto sys = random_lqss(rng, 2, 1);
    const auto dyn = single_dynamics(sys);
    const Vec mu0 = rng.matrix(4, 1);
    const double t = 2.0;
    const Vec exact = (dyn.a * t).exp() * mu0;
    const double rho =
        Eigen::EigenSolver<Mat>(dyn.a, false).eigenvalues().cwiseAbs().maxCoeff();
    std::vector<double> errors;
    for (double dt = 0.2 / rho; dt > 0.01 / rho; dt /= 2) {
      const auto traj =
          simulate_moments(dyn, mu0, Mat(0.5 * Mat::Identity(4, 4)), t, dt, 1 << 30);
      errors.push_back(max_abs(Vec(traj.means.back() - exact)));
    }
    o.detail << "convergence ratios";
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double ratio = errors[i - 1] / errors[i];
      o.detail << " " << ratio;
      o.require(ratio > 13.0 && ratio < 19.5, "fourth-order error ratio");
    }
    o.detail << "; ";
  }
}

void ac7(Outcome& o) {
  Rng rng(7007);
  int instances = 0, trials = 0, detected = 0;
  for (const auto& di : suite()) {
    const auto fr = realize(di);
    if (fr.m == 0) continue;  // nothing synthesized to perturb
    ++instances;
    const auto rel_noise = [&](const Mat& target, const Mat& noise) {
      return Mat(1e-3 * std::max(1.0, max_abs(target)) * noise / max_abs(noise));
    };
    std::vector<std::pair<std::string, FeedbackRealization<double>>> variants;
    using Field = Mat FeedbackRealization<double>::*;
    const std::pair<const char*, Field> fields[] = {
        {"c_a", &FeedbackRealization<double>::c_a},
        {"c_b", &FeedbackRealization<double>::c_b},
        {"x", &FeedbackRealization<double>::x},
        {"sigma", &FeedbackRealization<double>::sigma},
        {"r_a", &FeedbackRealization<double>::r_a},
        {"r_b", &FeedbackRealization<double>::r_b}};
    for (const auto& [name, field] : fields) {
      auto bad = fr;
      Mat& target = bad.*field;
      target += rel_noise(target, rng.matrix(target.rows(), target.cols()));
      variants.emplace_back(std::string("generic ") + name, bad);
    }
    // Structure-preserving perturbations: symmetric Hamiltonians, sharp-skew
    // X with a consistent Sigma.
    {
      auto bad = fr;
      bad.r_a += rel_noise(fr.r_a, rng.symmetric(fr.r_a.rows()));
      variants.emplace_back("symmetric r_a", bad);
    }
    {
      auto bad = fr;
      bad.r_b += rel_noise(fr.r_b, rng.symmetric(fr.r_b.rows()));
      variants.emplace_back("symmetric r_b", bad);
    }
    {
      auto bad = fr;
      bad.x += rel_noise(fr.x, rng.sharp_skew(fr.m));
      bad.sigma = cayley_sigma_from_x(bad.x);
      variants.emplace_back("sharp-skew x with matching sigma", bad);
    }
    for (const auto& [name, bad] : variants) {
      ++trials;
      const bool caught = !check_equivalence(di, bad).passed();
      detected += caught;
      if (!caught) o.require(false, name + " passed equivalence");
    }
  }
  o.detail << detected << "/" << trials << " perturbations detected over "
           << instances << " instances; ";
  o.require(instances > 100, "enough instances");
}

}  // namespace

int main() {
  std::printf("qfb acceptance suite\n");
  criterion("AC1", "worked example golden values", 1.0, ac1);
  criterion("AC2", "coupling relation witness (example + 200 random)", 10.0, ac2);
  criterion("AC3", "direct vs feedback drift equivalence", 0, ac3);
  criterion("AC4", "channel bound sharpness", 0, ac4);
  criterion("AC5", "structured algebra suite (1000 cases each)", 30.0, ac5);
  criterion("AC6", "moment dynamics integration", 0, ac6);
  criterion("AC7", "perturbation discrimination", 0, ac7);
  std::printf("%d of 7 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
