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
/// Checks that a feedback realization reproduces a direct interaction.

#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfb/lqss.hpp"
#include "qfb/synthesis.hpp"

namespace qfb {

/// Thresholds used by check_equivalence. Residuals are relative: each is
/// divided by max(1, ||reference||_max).
struct EquivalenceTolerances {
  double drift = 1e-8;
  double noise = 1e-8;
  double coupling = 1e-8;
  double cayley = 1e-8;
  double sharp_skew = 1e-9;
  double symplectic = 1e-9;
  double symmetry = 1e-10;
  /// Minimum distance of every eigenvalue of Sigma from 1.
  double unit_eigen_margin = 1e-8;
};

template <typename Scalar>
struct EquivalenceReport {
  Scalar drift_residual = 0;
  Scalar noise_residual = 0;
  Scalar coupling_residual = 0;
  /// ||Sigma - (X - I)(X + I)^{-1}||_max, relative.
  Scalar cayley_residual = 0;
  Scalar unit_eigen_margin = std::numeric_limits<Scalar>::infinity();
  std::vector<std::pair<std::string, bool>> invariant_flags;
  std::optional<Scalar> moment_residual;
  EquivalenceTolerances tolerances;

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    if (!(drift_residual <= tolerances.drift)) out.push_back("drift_residual");
    if (!(noise_residual <= tolerances.noise)) out.push_back("noise_residual");
    if (!(coupling_residual <= tolerances.coupling)) {
      out.push_back("coupling_residual");
    }
    if (!(cayley_residual <= tolerances.cayley)) out.push_back("cayley_residual");
    for (const auto& [name, ok] : invariant_flags) {
      if (!ok) out.push_back(name);
    }
    return out;
  }

  bool passed() const { return failures().empty(); }
};

/// The two-port systems of the feedback realization, with external ports
/// taken from the direct-interaction target.
template <typename Scalar>
std::pair<TwoPortLqss<Scalar>, TwoPortLqss<Scalar>> feedback_systems(
    const DirectInteraction<Scalar>& di,
    const FeedbackRealization<Scalar>& fr) {
  return {TwoPortLqss<Scalar>{di.sys_a.n, fr.r_a, di.sys_a.c, di.sys_a.d,
                              fr.c_a},
          TwoPortLqss<Scalar>{di.sys_b.n, fr.r_b, di.sys_b.c, di.sys_b.d,
                              fr.c_b}};
}

namespace detail {

template <typename Scalar>
void require_realization_shapes(const DirectInteraction<Scalar>& di,
                                const FeedbackRealization<Scalar>& fr) {
  const Index na = 2 * di.sys_a.n;
  const Index nb = 2 * di.sys_b.n;
  const Index m2 = 2 * fr.m;
  const auto check = [](const MatrixX<Scalar>& mat, Index r, Index c,
                        const char* name) {
    if (mat.rows() != r || mat.cols() != c) {
      throw ValidationError(std::string("realization ") + name + " is " +
                            shape(mat.rows(), mat.cols()) + ", expected " +
                            shape(r, c));
    }
  };
  check(fr.c_a, m2, na, "c_a");
  check(fr.c_b, m2, nb, "c_b");
  check(fr.x, m2, m2, "x");
  check(fr.sigma, m2, m2, "sigma");
  check(fr.r_a, na, na, "r_a");
  check(fr.r_b, nb, nb, "r_b");
}

template <typename Scalar>
Scalar relative(Scalar residual, Scalar reference) {
  return residual / std::max<Scalar>(1, reference);
}

}  // namespace detail

/// Compares the direct-interaction dynamics against the closed-loop
/// feedback dynamics built from fr and audits the realization's structure.
template <typename Scalar>
EquivalenceReport<Scalar> check_equivalence(
    const DirectInteraction<Scalar>& di, const FeedbackRealization<Scalar>& fr,
    const EquivalenceTolerances& tol = {}) {
  di.validate();
  detail::require_realization_shapes(di, fr);

  EquivalenceReport<Scalar> rep;
  rep.tolerances = tol;

  const LinearDynamics<Scalar> direct = direct_dynamics(di);
  const auto [sys_a, sys_b] = feedback_systems(di, fr);
  LoopOptions loop;
  loop.validate_systems = false;
  try {
    const LinearDynamics<Scalar> closed =
        feedback_closed_loop(sys_a, sys_b, fr.sigma, loop);
    rep.drift_residual = detail::relative(max_abs(direct.a - closed.a),
                                          max_abs(direct.a));
    rep.noise_residual = detail::relative(
        max_abs(direct.b_ext - closed.b_ext), max_abs(direct.b_ext));
  } catch (const AlgebraicLoopError&) {
    // No closed loop exists; report instead of rejecting.
    rep.drift_residual = std::numeric_limits<Scalar>::infinity();
    rep.noise_residual = std::numeric_limits<Scalar>::infinity();
  }
  rep.coupling_residual =
      detail::relative(relation_residual(di.r_ab, fr), max_abs(di.r_ab));

  const Index m2 = 2 * fr.m;
  const Scalar x_scale = std::max<Scalar>(1, max_abs(fr.x));
  const Scalar s_scale = std::max<Scalar>(1, max_abs(fr.sigma));
  const bool x_skew =
      m2 == 0 || is_sharp_skew(fr.x, Scalar(tol.sharp_skew) * x_scale);
  const bool s_symp = m2 == 0 || is_symplectic(fr.sigma, Scalar(tol.symplectic) *
                                                             s_scale * s_scale);
  const auto symmetric = [&](const MatrixX<Scalar>& r) {
    return max_abs(MatrixX<Scalar>(r - r.transpose())) <=
           Scalar(tol.symmetry) * std::max<Scalar>(1, max_abs(r));
  };

  if (m2 > 0) {
    Eigen::EigenSolver<MatrixX<Scalar>> es(fr.sigma, false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      rep.unit_eigen_margin = std::min<Scalar>(
          rep.unit_eigen_margin, std::abs(es.eigenvalues()(i) - Scalar(1)));
    }
    const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m2, m2);
    const MatrixX<Scalar> plus = fr.x + id;
    if (detail::reciprocal_condition(plus) > Scalar(1e-14)) {
      const MatrixX<Scalar> cayley =
          plus.partialPivLu().solve(MatrixX<Scalar>(fr.x - id));
      rep.cayley_residual =
          detail::relative(max_abs(fr.sigma - cayley), max_abs(fr.sigma));
    } else {
      rep.cayley_residual = std::numeric_limits<Scalar>::infinity();
    }
  }

  rep.invariant_flags = {
      {"x_sharp_skew", x_skew},
      {"sigma_symplectic", s_symp},
      {"r_a_symmetric", symmetric(fr.r_a)},
      {"r_b_symmetric", symmetric(fr.r_b)},
      {"sigma_unit_eigen_margin",
       rep.unit_eigen_margin > Scalar(tol.unit_eigen_margin)},
  };
  return rep;
}

// --- moment dynamics -------------------------------------------------------

template <typename Scalar>
struct MomentTrajectory {
  std::vector<Scalar> times;
  std::vector<VectorX<Scalar>> means;
  std::vector<MatrixX<Scalar>> covariances;
};

/// Fixed-step classical Runge-Kutta integration of
///
///   d mu / dt = A mu,    d P / dt = A P + P A^T + 1/2 B B^T,
///
/// the first and symmetrized second moments under vacuum inputs
/// (symmetrized Ito covariance 1/2 I per quadrature pair). The step count is
/// round(t_final / dt); the step used is t_final divided by that count.
/// Every record_every-th step (and the final one) is stored.
template <typename Scalar>
MomentTrajectory<Scalar> simulate_moments(const LinearDynamics<Scalar>& dyn,
                                          const VectorX<Scalar>& mean0,
                                          const MatrixX<Scalar>& cov0,
                                          Scalar t_final, Scalar dt,
                                          Index record_every = 1) {
  const Index n = dyn.a.rows();
  if (dyn.a.cols() != n || dyn.b_ext.rows() != n) {
    throw ValidationError("simulate_moments: inconsistent dynamics shapes");
  }
  if (mean0.size() != n || cov0.rows() != n || cov0.cols() != n) {
    throw ValidationError("simulate_moments: initial moments must match state "
                          "dimension " + std::to_string(n));
  }
  if (!(dt > 0) || !(t_final >= dt)) {
    throw ValidationError("simulate_moments: need dt > 0 and t_final >= dt");
  }
  if (record_every < 1) {
    throw ValidationError("simulate_moments: record_every must be >= 1");
  }
  if (max_abs(MatrixX<Scalar>(cov0 - cov0.transpose())) >
      Scalar(1e-9) * std::max<Scalar>(1, max_abs(cov0))) {
    throw ValidationError("simulate_moments: initial covariance not symmetric");
  }

  const Index steps = std::max<Index>(
      1, static_cast<Index>(std::llround(static_cast<double>(t_final / dt))));
  const Scalar h = t_final / Scalar(steps);
  const MatrixX<Scalar>& a = dyn.a;
  const MatrixX<Scalar> q = Scalar(0.5) * dyn.b_ext * dyn.b_ext.transpose();
  const auto cov_rhs = [&](const MatrixX<Scalar>& p) -> MatrixX<Scalar> {
    MatrixX<Scalar> ap = a * p;
    return ap + ap.transpose() + q;
  };

  MomentTrajectory<Scalar> traj;
  VectorX<Scalar> mu = mean0;
  MatrixX<Scalar> p = (cov0 + cov0.transpose()) / Scalar(2);
  traj.times.push_back(0);
  traj.means.push_back(mu);
  traj.covariances.push_back(p);

  for (Index step = 1; step <= steps; ++step) {
    const VectorX<Scalar> k1 = a * mu;
    const VectorX<Scalar> k2 = a * (mu + h / 2 * k1);
    const VectorX<Scalar> k3 = a * (mu + h / 2 * k2);
    const VectorX<Scalar> k4 = a * (mu + h * k3);
    mu += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);

    const MatrixX<Scalar> l1 = cov_rhs(p);
    const MatrixX<Scalar> l2 = cov_rhs(p + h / 2 * l1);
    const MatrixX<Scalar> l3 = cov_rhs(p + h / 2 * l2);
    const MatrixX<Scalar> l4 = cov_rhs(p + h * l3);
    p += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
    p = (p + p.transpose()) / Scalar(2);

    const Scalar t = h * Scalar(step);
    if (!mu.allFinite() || !p.allFinite()) {
      throw DivergenceError("simulate_moments: non-finite moments at t = " +
                                std::to_string(static_cast<double>(t)),
                            static_cast<double>(t));
    }
    if (step % record_every == 0 || step == steps) {
      traj.times.push_back(t);
      traj.means.push_back(mu);
      traj.covariances.push_back(p);
    }
  }
  return traj;
}

/// sup over the time grid of max(||mu1 - mu2||_max, ||P1 - P2||_max).
template <typename Scalar>
Scalar compare_moment_trajectories(const LinearDynamics<Scalar>& dyn1,
                                   const LinearDynamics<Scalar>& dyn2,
                                   const VectorX<Scalar>& mean0,
                                   const MatrixX<Scalar>& cov0, Scalar t_final,
                                   Scalar dt) {
  if (dyn1.a.rows() != dyn2.a.rows() || dyn1.b_ext.cols() != dyn2.b_ext.cols()) {
    throw ValidationError("compare_moment_trajectories: dimension mismatch (" +
                          detail::shape(dyn1.a.rows(), dyn1.b_ext.cols()) +
                          " vs " +
                          detail::shape(dyn2.a.rows(), dyn2.b_ext.cols()) + ")");
  }
  const auto t1 = simulate_moments(dyn1, mean0, cov0, t_final, dt);
  const auto t2 = simulate_moments(dyn2, mean0, cov0, t_final, dt);
  Scalar sup = 0;
  for (std::size_t i = 0; i < t1.times.size(); ++i) {
    sup = std::max(sup, max_abs(VectorX<Scalar>(t1.means[i] - t2.means[i])));
    sup = std::max(sup, max_abs(MatrixX<Scalar>(t1.covariances[i] -
                                                t2.covariances[i])));
  }
  return sup;
}

/// Vacuum initial state: zero mean, covariance 1/2 I.
template <typename Scalar>
std::pair<VectorX<Scalar>, MatrixX<Scalar>> vacuum_moments(Index state_dim) {
  return {VectorX<Scalar>::Zero(state_dim),
          Scalar(0.5) * MatrixX<Scalar>::Identity(state_dim, state_dim)};
}

}  // namespace qfb
