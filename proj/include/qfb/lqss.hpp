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
/// Quadrature-form linear quantum stochastic systems.
///
///   dx = (J R - 1/2 C# C) x dt - C# D dU
///   dY = C x dt + D dU
///
/// and the two ways of coupling a pair of them: a direct bilinear Hamiltonian
/// x_A^T R_AB x_B, and a feedback loop through identity-gain interconnection
/// ports closed by a static symplectic network Sigma (U_B = Sigma Y_A,
/// U_A = Y_B). Both are reduced to a LinearDynamics on the stacked state
/// (x_A, x_B) driven by the external ports only.

#pragma once

#include <Eigen/Dense>

#include <string>

#include "qfb/symplectic.hpp"

namespace qfb {

/// One system (n, R, C, D). C may have zero rows (no ports).
template <typename Scalar>
struct LqssParams {
  Index n = 0;
  MatrixX<Scalar> r;  // 2n x 2n symmetric
  MatrixX<Scalar> c;  // 2m x 2n
  MatrixX<Scalar> d;  // 2m x 2m symplectic

  Index ports() const { return c.rows() / 2; }

  void validate(const char* what = "LqssParams") const {
    const std::string w(what);
    if (n < 0) throw ValidationError(w + ": negative mode count");
    if (r.rows() != 2 * n || r.cols() != 2 * n) {
      throw ValidationError(w + ": R must be " + detail::shape(2 * n, 2 * n) +
                            ", got " + detail::shape(r.rows(), r.cols()));
    }
    if (c.cols() != 2 * n || c.rows() % 2 != 0) {
      throw ValidationError(w + ": C must be 2m x " + std::to_string(2 * n) +
                            ", got " + detail::shape(c.rows(), c.cols()));
    }
    if (d.rows() != c.rows() || d.cols() != c.rows()) {
      throw ValidationError(w + ": D must be " +
                            detail::shape(c.rows(), c.rows()) + ", got " +
                            detail::shape(d.rows(), d.cols()));
    }
    detail::require_finite(r, what);
    detail::require_finite(c, what);
    detail::require_finite(d, what);
    if (max_abs(r - r.transpose()) > Scalar(1e-12) * std::max<Scalar>(1, max_abs(r))) {
      throw ValidationError(w + ": R is not symmetric");
    }
    if (d.size() > 0 && !is_symplectic(d, Scalar(1e-10))) {
      throw ValidationError(w + ": D is not symplectic");
    }
  }

  /// A system with no ports.
  static LqssParams closed(const MatrixX<Scalar>& r) {
    const Index n = r.rows() / 2;
    return {n, r, MatrixX<Scalar>::Zero(0, 2 * n), MatrixX<Scalar>::Zero(0, 0)};
  }
};

/// A system with an external port group (c_bar, d_bar) and an identity-gain
/// interconnection port group c.
template <typename Scalar>
struct TwoPortLqss {
  Index n = 0;
  MatrixX<Scalar> r;
  MatrixX<Scalar> c_bar;
  MatrixX<Scalar> d_bar;
  MatrixX<Scalar> c;

  void validate(const char* what = "TwoPortLqss") const {
    LqssParams<Scalar>{n, r, c_bar, d_bar}.validate(what);
    if (c.cols() != 2 * n || c.rows() % 2 != 0) {
      throw ValidationError(std::string(what) +
                            ": interconnection coupling must be 2m x " +
                            std::to_string(2 * n) + ", got " +
                            detail::shape(c.rows(), c.cols()));
    }
  }
};

/// Target: two systems coupled by H_AB = x_A^T R_AB x_B.
template <typename Scalar>
struct DirectInteraction {
  LqssParams<Scalar> sys_a;
  LqssParams<Scalar> sys_b;
  MatrixX<Scalar> r_ab;  // 2n_A x 2n_B

  void validate() const {
    sys_a.validate("DirectInteraction.sys_a");
    sys_b.validate("DirectInteraction.sys_b");
    if (r_ab.rows() != 2 * sys_a.n || r_ab.cols() != 2 * sys_b.n) {
      throw ValidationError("DirectInteraction: R_AB must be " +
                            detail::shape(2 * sys_a.n, 2 * sys_b.n) +
                            ", got " +
                            detail::shape(r_ab.rows(), r_ab.cols()));
    }
    detail::require_finite(r_ab, "DirectInteraction.r_ab");
  }

  /// [[R_A, R_AB], [R_AB^T, R_B]].
  MatrixX<Scalar> composite_hamiltonian() const {
    const Index na = 2 * sys_a.n;
    const Index nb = 2 * sys_b.n;
    MatrixX<Scalar> h(na + nb, na + nb);
    h.topLeftCorner(na, na) = sys_a.r;
    h.topRightCorner(na, nb) = r_ab;
    h.bottomLeftCorner(nb, na) = r_ab.transpose();
    h.bottomRightCorner(nb, nb) = sys_b.r;
    return h;
  }
};

/// dx = a x dt + b_ext dU_ext,  dY_ext = c_ext x dt + d_ext dU_ext.
template <typename Scalar>
struct LinearDynamics {
  MatrixX<Scalar> a;
  MatrixX<Scalar> b_ext;
  MatrixX<Scalar> c_ext;
  MatrixX<Scalar> d_ext;

  Index state_dim() const { return a.rows(); }
};

/// Drift and noise matrices of a single system: A = J R - 1/2 C# C,
/// B = -C# D.
template <typename Scalar>
LinearDynamics<Scalar> single_dynamics(const LqssParams<Scalar>& sys) {
  sys.validate();
  const MatrixX<Scalar> c_sharp = sharp_adjoint(sys.c);
  return {apply_j_left(sys.r) - Scalar(0.5) * c_sharp * sys.c,
          -c_sharp * sys.d, sys.c, sys.d};
}

/// ||A J + J A^T + B J B^T||_max for the drift/noise pair of sys. Vanishes
/// for every valid (R, C, D).
template <typename Scalar>
Scalar realizability_residual(const LqssParams<Scalar>& sys) {
  const LinearDynamics<Scalar> dyn = single_dynamics(sys);
  const MatrixX<Scalar> j = symplectic_form<Scalar>(sys.n);
  const MatrixX<Scalar> jm = symplectic_form<Scalar>(sys.ports());
  return max_abs(dyn.a * j + j * dyn.a.transpose() +
                 dyn.b_ext * jm * dyn.b_ext.transpose());
}

namespace detail {

template <typename Scalar>
void fill_external_ports(LinearDynamics<Scalar>& dyn,
                         const MatrixX<Scalar>& c_bar_a,
                         const MatrixX<Scalar>& d_bar_a,
                         const MatrixX<Scalar>& c_bar_b,
                         const MatrixX<Scalar>& d_bar_b) {
  dyn.b_ext = -block_diag(sharp_adjoint(c_bar_a) * d_bar_a,
                          sharp_adjoint(c_bar_b) * d_bar_b);
  dyn.c_ext = block_diag(c_bar_a, c_bar_b);
  dyn.d_ext = block_diag(d_bar_a, d_bar_b);
}

}  // namespace detail

/// Composite dynamics of two systems with a direct bilinear interaction.
template <typename Scalar>
LinearDynamics<Scalar> direct_dynamics(const DirectInteraction<Scalar>& di) {
  di.validate();
  const auto& a = di.sys_a;
  const auto& b = di.sys_b;
  const Index na = 2 * a.n;
  const Index nb = 2 * b.n;

  LinearDynamics<Scalar> dyn;
  dyn.a.resize(na + nb, na + nb);
  dyn.a.topLeftCorner(na, na) =
      apply_j_left(a.r) - Scalar(0.5) * sharp_adjoint(a.c) * a.c;
  dyn.a.topRightCorner(na, nb) = apply_j_left(di.r_ab);
  dyn.a.bottomLeftCorner(nb, na) =
      apply_j_left(MatrixX<Scalar>(di.r_ab.transpose()));
  dyn.a.bottomRightCorner(nb, nb) =
      apply_j_left(b.r) - Scalar(0.5) * sharp_adjoint(b.c) * b.c;
  detail::fill_external_ports(dyn, a.c, a.d, b.c, b.d);
  return dyn;
}

/// Options for the loop-elimination solve.
struct LoopOptions {
  double condition_cap = 1e12;
  /// Off when the caller audits the systems itself (e.g. a verifier that
  /// must report, not reject, a non-symmetric Hamiltonian).
  bool validate_systems = true;
};

/// Closed-loop dynamics of the feedback interconnection U_B = Sigma Y_A,
/// U_A = Y_B with the interconnection signals eliminated:
///
///   A_AA = J R_A - 1/2 Cb_A# Cb_A - 1/2 C_A# C_A - C_A# (I-S)^{-1} S C_A
///   A_AB = -C_A# (I-S)^{-1} C_B
///   A_BA = -C_B# (I-S)^{-1} S C_A
///   A_BB = J R_B - 1/2 Cb_B# Cb_B - 1/2 C_B# C_B - C_B# (I-S)^{-1} S C_B
template <typename Scalar, typename DerivedS>
LinearDynamics<Scalar> feedback_closed_loop(
    const TwoPortLqss<Scalar>& sys_a, const TwoPortLqss<Scalar>& sys_b,
    const Eigen::MatrixBase<DerivedS>& sigma, const LoopOptions& opts = {}) {
  if (opts.validate_systems) {
    sys_a.validate("feedback_closed_loop.sys_a");
    sys_b.validate("feedback_closed_loop.sys_b");
  }
  const Index m2 = sys_a.c.rows();
  if (sys_b.c.rows() != m2) {
    throw ValidationError("feedback_closed_loop: interconnection port counts "
                          "differ (" + std::to_string(m2) + " vs " +
                          std::to_string(sys_b.c.rows()) + " rows)");
  }
  if (sigma.rows() != m2 || sigma.cols() != m2) {
    throw ValidationError("feedback_closed_loop: Sigma must be " +
                          detail::shape(m2, m2) + ", got " +
                          detail::shape(sigma.rows(), sigma.cols()));
  }

  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m2, m2);
  const MatrixX<Scalar> i_minus = id - sigma;
  if (m2 > 0 && detail::reciprocal_condition(i_minus) <
                    Scalar(1) / Scalar(opts.condition_cap)) {
    throw AlgebraicLoopError("feedback_closed_loop: Sigma has a unit "
                             "eigenvalue; the interconnection loop has no "
                             "unique solution");
  }
  Eigen::PartialPivLU<MatrixX<Scalar>> lu;
  if (m2 > 0) lu.compute(i_minus);
  // (I - Sigma)^{-1} C_B and (I - Sigma)^{-1} Sigma C_A / C_B.
  const MatrixX<Scalar> inv_cb =
      m2 > 0 ? MatrixX<Scalar>(lu.solve(sys_b.c)) : sys_b.c;
  const MatrixX<Scalar> inv_s_ca =
      m2 > 0 ? MatrixX<Scalar>(lu.solve(MatrixX<Scalar>(sigma * sys_a.c)))
             : sys_a.c;
  const MatrixX<Scalar> inv_s_cb =
      m2 > 0 ? MatrixX<Scalar>(lu.solve(MatrixX<Scalar>(sigma * sys_b.c)))
             : sys_b.c;

  const MatrixX<Scalar> ca_sharp = sharp_adjoint(sys_a.c);
  const MatrixX<Scalar> cb_sharp = sharp_adjoint(sys_b.c);
  const Index na = 2 * sys_a.n;
  const Index nb = 2 * sys_b.n;

  LinearDynamics<Scalar> dyn;
  dyn.a.resize(na + nb, na + nb);
  dyn.a.topLeftCorner(na, na) =
      apply_j_left(sys_a.r) -
      Scalar(0.5) * sharp_adjoint(sys_a.c_bar) * sys_a.c_bar -
      Scalar(0.5) * ca_sharp * sys_a.c - ca_sharp * inv_s_ca;
  dyn.a.topRightCorner(na, nb) = -ca_sharp * inv_cb;
  dyn.a.bottomLeftCorner(nb, na) = -cb_sharp * inv_s_ca;
  dyn.a.bottomRightCorner(nb, nb) =
      apply_j_left(sys_b.r) -
      Scalar(0.5) * sharp_adjoint(sys_b.c_bar) * sys_b.c_bar -
      Scalar(0.5) * cb_sharp * sys_b.c - cb_sharp * inv_s_cb;
  detail::fill_external_ports(dyn, sys_a.c_bar, sys_a.d_bar, sys_b.c_bar,
                              sys_b.d_bar);
  return dyn;
}

/// Closed-loop drift written through the Cayley preimage X of Sigma:
///
///   A_AA = J R_A - 1/2 C_A# X C_A - 1/2 Cb_A# Cb_A
///   A_AB = -1/2 C_A# (X + I) C_B
///   A_BA = -1/2 C_B# (X - I) C_A
///   A_BB = J R_B - 1/2 C_B# X C_B - 1/2 Cb_B# Cb_B
///
/// Agrees with feedback_closed_loop(sys_a, sys_b, cayley_sigma_from_x(X)).
template <typename Scalar, typename DerivedX>
MatrixX<Scalar> feedback_drift_from_x(const TwoPortLqss<Scalar>& sys_a,
                                      const TwoPortLqss<Scalar>& sys_b,
                                      const Eigen::MatrixBase<DerivedX>& x) {
  sys_a.validate("feedback_drift_from_x.sys_a");
  sys_b.validate("feedback_drift_from_x.sys_b");
  const Index m2 = sys_a.c.rows();
  if (sys_b.c.rows() != m2 || x.rows() != m2 || x.cols() != m2) {
    throw ValidationError("feedback_drift_from_x: dimension mismatch");
  }
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m2, m2);
  const MatrixX<Scalar> ca_sharp = sharp_adjoint(sys_a.c);
  const MatrixX<Scalar> cb_sharp = sharp_adjoint(sys_b.c);
  const Index na = 2 * sys_a.n;
  const Index nb = 2 * sys_b.n;
  MatrixX<Scalar> a(na + nb, na + nb);
  a.topLeftCorner(na, na) =
      apply_j_left(sys_a.r) - Scalar(0.5) * ca_sharp * x * sys_a.c -
      Scalar(0.5) * sharp_adjoint(sys_a.c_bar) * sys_a.c_bar;
  a.topRightCorner(na, nb) = -Scalar(0.5) * ca_sharp * (x + id) * sys_b.c;
  a.bottomLeftCorner(nb, na) = -Scalar(0.5) * cb_sharp * (x - id) * sys_a.c;
  a.bottomRightCorner(nb, nb) =
      apply_j_left(sys_b.r) - Scalar(0.5) * cb_sharp * x * sys_b.c -
      Scalar(0.5) * sharp_adjoint(sys_b.c_bar) * sys_b.c_bar;
  return a;
}

/// Port groups of one system after splitting its m ports into (m_a, m_b):
/// C_hat = Pi C, D_hat = Pi D Pi^T.
template <typename Scalar>
struct PartitionedLqss {
  MatrixX<Scalar> c_a, c_b;
  MatrixX<Scalar> d_aa, d_ab, d_ba, d_bb;
  MatrixX<Scalar> pi;

  /// (C, D) recovered through Pi^T.
  std::pair<MatrixX<Scalar>, MatrixX<Scalar>> reassemble() const {
    const Index ra = c_a.rows();
    const Index rb = c_b.rows();
    MatrixX<Scalar> c_hat(ra + rb, c_a.cols());
    c_hat << c_a, c_b;
    MatrixX<Scalar> d_hat(ra + rb, ra + rb);
    d_hat.topLeftCorner(ra, ra) = d_aa;
    d_hat.topRightCorner(ra, rb) = d_ab;
    d_hat.bottomLeftCorner(rb, ra) = d_ba;
    d_hat.bottomRightCorner(rb, rb) = d_bb;
    return {pi.transpose() * c_hat, pi.transpose() * d_hat * pi};
  }
};

template <typename Scalar>
PartitionedLqss<Scalar> partitioned_form(const LqssParams<Scalar>& sys,
                                         Index m_a, Index m_b) {
  sys.validate();
  if (m_a < 0 || m_b < 0 || m_a + m_b != sys.ports() || m_a + m_b == 0) {
    throw ValidationError("partitioned_form: split (" + std::to_string(m_a) +
                          ", " + std::to_string(m_b) + ") does not match " +
                          std::to_string(sys.ports()) + " ports");
  }
  PartitionedLqss<Scalar> out;
  out.pi = build_partition_permutation<Scalar>(m_a, m_b);
  const MatrixX<Scalar> c_hat = out.pi * sys.c;
  const MatrixX<Scalar> d_hat = out.pi * sys.d * out.pi.transpose();
  const Index ra = 2 * m_a;
  const Index rb = 2 * m_b;
  out.c_a = c_hat.topRows(ra);
  out.c_b = c_hat.bottomRows(rb);
  out.d_aa = d_hat.topLeftCorner(ra, ra);
  out.d_ab = d_hat.topRightCorner(ra, rb);
  out.d_ba = d_hat.bottomLeftCorner(rb, ra);
  out.d_bb = d_hat.bottomRightCorner(rb, rb);
  return out;
}

}  // namespace qfb
