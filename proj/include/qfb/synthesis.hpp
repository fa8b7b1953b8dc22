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
/// Feedback synthesis of a bilinear Hamiltonian interaction.
///
/// Given a target coupling R_AB (2n_A x 2n_B), construct m interconnection
/// channels with couplings C_A, C_B and a sharp-skew X such that
///
///   R_AB = 1/2 J C_A# (X + I) C_B,
///
/// together with the static network Sigma = (X - I)(X + I)^{-1} and the
/// corrected self-Hamiltonians R_A = Rbar_A - 1/2 J C_A# X C_A (same for B).
///
/// Construction: R_AB = Q1 diag(T1, T2) Q2^T (special_svd), Y = J X =
/// P^T diag(Y1, Y2) P with P orthogonal symplectic, G_A = P C_A Q1 and
/// G_B = P C_B Q2 with block-diagonal structure. Per channel i the equations
/// reduce to
///
///   2 T1_ii =  ga1_i (y1_i y2_i + 1) g_b4_i,   g_b1_i =  y2_i g_b4_i
///   2 T2_ii = -ga2_i (y1_i y2_i + 1) g_b3_i,   g_b2_i = -y1_i g_b3_i

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "qfb/special_svd.hpp"
#include "qfb/symplectic.hpp"

namespace qfb {

template <typename Scalar>
struct SynthOptions {
  std::optional<Index> m;
  std::optional<VectorX<Scalar>> y1_diag;
  std::optional<VectorX<Scalar>> y2_diag;
  std::optional<VectorX<Scalar>> ga1_diag;
  std::optional<VectorX<Scalar>> ga2_diag;
  std::optional<MatrixX<Scalar>> p;
  double rank_tol = 1e-10;
};

template <typename Scalar>
struct FeedbackRealization {
  Index m = 0;
  MatrixX<Scalar> c_a;    // 2m x 2n_A
  MatrixX<Scalar> c_b;    // 2m x 2n_B
  MatrixX<Scalar> x;      // 2m x 2m, sharp-skew
  MatrixX<Scalar> sigma;  // 2m x 2m, symplectic
  MatrixX<Scalar> r_a;    // 2n_A x 2n_A
  MatrixX<Scalar> r_b;    // 2n_B x 2n_B
};

/// Effective free parameters after defaults are filled in.
template <typename Scalar>
struct SynthParameters {
  Index m = 0;
  VectorX<Scalar> y1, y2, ga1, ga2;
  MatrixX<Scalar> p;
  double rank_tol = 1e-10;
};

/// ceil(rank(R_AB) / 2).
template <typename Derived>
Index min_channels(const Eigen::MatrixBase<Derived>& r_ab,
                   double rank_tol = 1e-10) {
  detail::require_even(r_ab, "min_channels");
  return (numerical_rank(r_ab, rank_tol) + 1) / 2;
}

/// 1/2 J C_A# (X + I) C_B.
template <typename DA, typename DB, typename DX>
MatrixX<typename DA::Scalar> realized_coupling(
    const Eigen::MatrixBase<DA>& c_a, const Eigen::MatrixBase<DB>& c_b,
    const Eigen::MatrixBase<DX>& x) {
  using Scalar = typename DA::Scalar;
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(x.rows(), x.cols());
  return Scalar(0.5) *
         apply_j_left(MatrixX<Scalar>(sharp_adjoint(c_a) * (x + id) * c_b));
}

/// ||R_AB - 1/2 J C_A# (X + I) C_B||_max.
template <typename Scalar>
Scalar relation_residual(const MatrixX<Scalar>& r_ab,
                         const FeedbackRealization<Scalar>& fr) {
  return max_abs(r_ab - realized_coupling(fr.c_a, fr.c_b, fr.x));
}

/// R = Rbar - 1/2 J (C# X C).
template <typename DR, typename DC, typename DX>
MatrixX<typename DR::Scalar> hamiltonian_corrections(
    const Eigen::MatrixBase<DR>& r_bar, const Eigen::MatrixBase<DC>& c,
    const Eigen::MatrixBase<DX>& x, double tol = 1e-9) {
  using Scalar = typename DR::Scalar;
  detail::require_even_square(r_bar, "hamiltonian_corrections");
  detail::require_even_square(x, "hamiltonian_corrections");
  if (c.cols() != r_bar.rows() || c.rows() != x.rows()) {
    throw ValidationError("hamiltonian_corrections: C must be " +
                          detail::shape(x.rows(), r_bar.rows()) + ", got " +
                          detail::shape(c.rows(), c.cols()));
  }
  if (!is_sharp_skew(x, Scalar(tol) * std::max<Scalar>(1, max_abs(x)))) {
    throw ValidationError("hamiltonian_corrections: X is not sharp-skew");
  }
  MatrixX<Scalar> r =
      r_bar - Scalar(0.5) * apply_j_left(MatrixX<Scalar>(sharp_adjoint(c) * x * c));
  // Symmetric in exact arithmetic; remove the rounding asymmetry.
  return (r + r.transpose()) / Scalar(2);
}

/// ||(1/2 J C_A# (X+I) C_B)^T - 1/2 J C_B# (X-I) C_A||_max; vanishes for
/// every sharp-skew X.
template <typename DA, typename DB, typename DX>
typename DA::Scalar transpose_coupling_identity_check(
    const Eigen::MatrixBase<DA>& c_a, const Eigen::MatrixBase<DB>& c_b,
    const Eigen::MatrixBase<DX>& x) {
  using Scalar = typename DA::Scalar;
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(x.rows(), x.cols());
  const MatrixX<Scalar> forward = realized_coupling(c_a, c_b, x);
  const MatrixX<Scalar> backward =
      Scalar(0.5) *
      apply_j_left(MatrixX<Scalar>(sharp_adjoint(c_b) * (x - id) * c_a));
  return max_abs(MatrixX<Scalar>(forward.transpose()) - backward);
}

namespace detail {

template <typename Scalar>
VectorX<Scalar> diag_or_default(const std::optional<VectorX<Scalar>>& v,
                                Index m, const char* name) {
  if (!v) return VectorX<Scalar>::Ones(m);
  if (v->size() != m) {
    throw ValidationError(std::string("synthesize: ") + name + " has " +
                          std::to_string(v->size()) + " entries, expected m = " +
                          std::to_string(m));
  }
  if (!v->allFinite()) {
    throw ValidationError(std::string("synthesize: ") + name +
                          " has a non-finite entry");
  }
  return *v;
}

}  // namespace detail

/// Resolves defaults and validates the free parameters against R_AB.
template <typename Scalar>
SynthParameters<Scalar> resolve_parameters(const MatrixX<Scalar>& r_ab,
                                           const SynthOptions<Scalar>& opts) {
  detail::require_even(r_ab, "synthesize");
  const Index n_a = r_ab.rows() / 2;
  const Index n_b = r_ab.cols() / 2;
  const Index minimum = min_channels(r_ab, opts.rank_tol);
  const Index maximum = std::min(n_a, n_b);

  SynthParameters<Scalar> out;
  out.rank_tol = opts.rank_tol;
  out.m = opts.m.value_or(minimum);
  if (out.m < minimum) {
    throw InfeasibleError(
        "synthesize: m = " + std::to_string(out.m) +
            " interconnection channels cannot realize R_AB of rank " +
            std::to_string(numerical_rank(r_ab, opts.rank_tol)) +
            "; the minimum is ceil(rank/2) = " + std::to_string(minimum),
        static_cast<long>(minimum));
  }
  if (out.m > maximum) {
    throw ValidationError("synthesize: m = " + std::to_string(out.m) +
                          " exceeds min(n_A, n_B) = " +
                          std::to_string(maximum));
  }
  const Index m = out.m;
  out.y1 = detail::diag_or_default(opts.y1_diag, m, "y1");
  out.y2 = detail::diag_or_default(opts.y2_diag, m, "y2");
  out.ga1 = detail::diag_or_default(opts.ga1_diag, m, "ga1");
  out.ga2 = detail::diag_or_default(opts.ga2_diag, m, "ga2");
  for (Index i = 0; i < m; ++i) {
    if (out.ga1(i) == 0 || out.ga2(i) == 0) {
      throw ValidationError("synthesize: ga1/ga2 entries must be nonzero "
                            "(channel " + std::to_string(i) + ")");
    }
  }
  if (opts.p) {
    const MatrixX<Scalar>& p = *opts.p;
    if (p.rows() != 2 * m || p.cols() != 2 * m) {
      throw ValidationError("synthesize: P must be " +
                            detail::shape(2 * m, 2 * m) + ", got " +
                            detail::shape(p.rows(), p.cols()));
    }
    if (!p.allFinite() || !is_orthogonal(p, Scalar(1e-10)) ||
        !is_symplectic(p, Scalar(1e-10))) {
      throw ValidationError("synthesize: P must be orthogonal and symplectic");
    }
    out.p = p;
  } else {
    out.p = MatrixX<Scalar>::Identity(2 * m, 2 * m);
  }
  return out;
}

/// Builds the feedback realization of the interaction R_AB between systems
/// with self-Hamiltonians r_bar_a, r_bar_b. Throws InfeasibleError when
/// opts.m is below ceil(rank(R_AB)/2), SingularParameterError when
/// y1_i y2_i = -1 on an active channel.
template <typename Scalar>
FeedbackRealization<Scalar> synthesize(const MatrixX<Scalar>& r_bar_a,
                                       const MatrixX<Scalar>& r_bar_b,
                                       const MatrixX<Scalar>& r_ab,
                                       const SynthOptions<Scalar>& opts = {},
                                       SynthParameters<Scalar>* used = nullptr) {
  detail::require_even_square(r_bar_a, "synthesize: r_bar_a");
  detail::require_even_square(r_bar_b, "synthesize: r_bar_b");
  if (r_ab.rows() != r_bar_a.rows() || r_ab.cols() != r_bar_b.rows()) {
    throw ValidationError("synthesize: R_AB must be " +
                          detail::shape(r_bar_a.rows(), r_bar_b.rows()) +
                          ", got " + detail::shape(r_ab.rows(), r_ab.cols()));
  }
  detail::require_finite(r_ab, "synthesize: r_ab");
  for (const MatrixX<Scalar>* r : {&r_bar_a, &r_bar_b}) {
    detail::require_finite(*r, "synthesize");
    if (max_abs(MatrixX<Scalar>(*r - r->transpose())) >
        Scalar(1e-12) * std::max<Scalar>(1, max_abs(*r))) {
      throw ValidationError("synthesize: self-Hamiltonian is not symmetric");
    }
  }

  const SynthParameters<Scalar> prm = resolve_parameters(r_ab, opts);
  if (used) *used = prm;

  const Index n_a = r_ab.rows() / 2;
  const Index n_b = r_ab.cols() / 2;
  const Index m = prm.m;
  const SpecialSvd<Scalar> svd = special_svd(r_ab, prm.rank_tol);
  const VectorX<Scalar> t1 = svd.t1_diagonal();
  const VectorX<Scalar> t2 = svd.t2_diagonal();

  MatrixX<Scalar> g_a = MatrixX<Scalar>::Zero(2 * m, 2 * n_a);
  MatrixX<Scalar> g_b = MatrixX<Scalar>::Zero(2 * m, 2 * n_b);
  for (Index i = 0; i < m; ++i) {
    g_a(i, i) = prm.ga1(i);
    g_a(m + i, n_a + i) = prm.ga2(i);

    const Scalar a1 = t1(i);
    const Scalar a2 = t2(i);
    if (a1 == 0 && a2 == 0) continue;
    const Scalar denom = prm.y1(i) * prm.y2(i) + 1;
    if (std::abs(denom) <= Scalar(1e-12)) {
      throw SingularParameterError(
          "synthesize: y1 * y2 = -1 on channel " + std::to_string(i) +
          ", which carries a nonzero singular value");
    }
    const Scalar g_b4 = 2 * a1 / (prm.ga1(i) * denom);
    const Scalar g_b3 = -2 * a2 / (prm.ga2(i) * denom);
    g_b(i, i) = prm.y2(i) * g_b4;             // G_B1
    g_b(i, n_b + i) = g_b3;                   // G_B3
    g_b(m + i, i) = g_b4;                     // G_B4
    g_b(m + i, n_b + i) = -prm.y1(i) * g_b3;  // G_B2
  }

  FeedbackRealization<Scalar> fr;
  fr.m = m;
  const MatrixX<Scalar>& p = prm.p;
  fr.c_a = p.transpose() * g_a * svd.u_tilde.transpose();
  fr.c_b = p.transpose() * g_b * svd.v_tilde.transpose();
  VectorX<Scalar> y_tilde(2 * m);
  y_tilde << prm.y1, prm.y2;
  MatrixX<Scalar> y = p.transpose() * y_tilde.asDiagonal() * p;
  y = (y + y.transpose()) / Scalar(2);
  fr.x = -apply_j_left(y);
  fr.sigma = cayley_sigma_from_x(fr.x);
  fr.r_a = hamiltonian_corrections(r_bar_a, fr.c_a, fr.x);
  fr.r_b = hamiltonian_corrections(r_bar_b, fr.c_b, fr.x);

  const Scalar residual = relation_residual(r_ab, fr);
  if (!(residual <= Scalar(1e-8) * std::max<Scalar>(1, max_abs(r_ab)))) {
    throw DomainError("synthesize: realized coupling misses R_AB by " +
                      std::to_string(residual) +
                      " (free parameters too badly scaled)");
  }
  return fr;
}

}  // namespace qfb
