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
/// Structured real linear algebra on quadrature space.
///
/// Every quadrature-space matrix has even row and column counts: index i and
/// i + k hold the position and momentum components of the i-th mode (or
/// field channel) of a k-mode block. The symplectic form is
/// J_{2k} = [[0, I_k], [-I_k, 0]] and the sharp-adjoint of a 2r x 2s matrix
/// is X# = -J_{2s} X^dagger J_{2r}.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cmath>
#include <sstream>
#include <string>

#include "qfb/errors.hpp"

namespace qfb {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;

/// Largest absolute entry; zero for an empty matrix.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real max_abs(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return m.cwiseAbs().maxCoeff();
}

namespace detail {

inline std::string shape(Index rows, Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

template <typename Derived>
void require_even(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() % 2 != 0 || m.cols() % 2 != 0) {
    throw ValidationError(std::string(what) + ": quadrature matrix must have "
                          "even dimensions, got " +
                          shape(m.rows(), m.cols()));
  }
}

template <typename Derived>
void require_even_square(const Eigen::MatrixBase<Derived>& m,
                         const char* what) {
  if (m.rows() != m.cols()) {
    throw ValidationError(std::string(what) + ": matrix must be square, got " +
                          shape(m.rows(), m.cols()));
  }
  require_even(m, what);
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace detail

/// J_{2k}. k = 0 yields an empty matrix.
template <typename Scalar = double>
MatrixX<Scalar> symplectic_form(Index k) {
  MatrixX<Scalar> j = MatrixX<Scalar>::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k).setIdentity();
  j.bottomLeftCorner(k, k) = -MatrixX<Scalar>::Identity(k, k);
  return j;
}

/// Left product J_{2k} * M without forming J: [M_p; -M_q].
template <typename Derived>
MatrixX<typename Derived::Scalar> apply_j_left(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() % 2 != 0) {
    throw ValidationError("apply_j_left: odd row count");
  }
  const Index k = m.rows() / 2;
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  out.topRows(k) = m.bottomRows(k);
  out.bottomRows(k) = -m.topRows(k);
  return out;
}

/// Right product M * J_{2k} without forming J: [-M_p, M_q] column-wise.
template <typename Derived>
MatrixX<typename Derived::Scalar> apply_j_right(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.cols() % 2 != 0) {
    throw ValidationError("apply_j_right: odd column count");
  }
  const Index k = m.cols() / 2;
  MatrixX<typename Derived::Scalar> out(m.rows(), m.cols());
  out.leftCols(k) = -m.rightCols(k);
  out.rightCols(k) = m.leftCols(k);
  return out;
}

/// X# = -J_{2s} X^dagger J_{2r} for a 2r x 2s matrix X. For real X the
/// dagger is the plain transpose.
template <typename Derived>
MatrixX<typename Derived::Scalar> sharp_adjoint(
    const Eigen::MatrixBase<Derived>& x) {
  detail::require_even(x, "sharp_adjoint");
  return -apply_j_right(apply_j_left(x.adjoint()));
}

/// True iff ||T J T^dagger - J||_max <= tol.
template <typename Derived>
bool is_symplectic(const Eigen::MatrixBase<Derived>& t,
                   typename Eigen::NumTraits<typename Derived::Scalar>::Real
                       tol) {
  detail::require_even_square(t, "is_symplectic");
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> j = symplectic_form<Scalar>(t.rows() / 2);
  return max_abs(t * j * t.adjoint() - j) <= tol;
}

/// True iff ||X# + X||_max <= tol, equivalently J X is (Hermitian)
/// symmetric.
template <typename Derived>
bool is_sharp_skew(const Eigen::MatrixBase<Derived>& x,
                   typename Eigen::NumTraits<typename Derived::Scalar>::Real
                       tol) {
  detail::require_even_square(x, "is_sharp_skew");
  return max_abs(sharp_adjoint(x) + x) <= tol;
}

template <typename Derived>
bool is_orthogonal(const Eigen::MatrixBase<Derived>& t,
                   typename Eigen::NumTraits<typename Derived::Scalar>::Real
                       tol) {
  if (t.rows() != t.cols()) return false;
  using Scalar = typename Derived::Scalar;
  return max_abs(t * t.adjoint() -
                 MatrixX<Scalar>::Identity(t.rows(), t.rows())) <= tol;
}

/// Tolerances and conditioning cap shared by the Cayley transforms.
struct CayleyOptions {
  /// Relative structural tolerance, scaled by max(1, ||input||_max) (and its
  /// square for the symplectic test).
  double structure_tol = 1e-9;
  /// Maximum admissible condition number of the matrix being inverted.
  double condition_cap = 1e12;
};

namespace detail {

template <typename Scalar>
Scalar reciprocal_condition(const MatrixX<Scalar>& m) {
  if (m.size() == 0) return 1;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m);
  const auto& s = svd.singularValues();
  const Scalar smax = s(0);
  if (smax == 0) return 0;
  return s(s.size() - 1) / smax;
}

}  // namespace detail

/// Sigma = (X - I)(X + I)^{-1}. Maps a real sharp-skew X to a real
/// symplectic Sigma without unit eigenvalues.
template <typename Derived>
MatrixX<typename Derived::Scalar> cayley_sigma_from_x(
    const Eigen::MatrixBase<Derived>& x, const CayleyOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  detail::require_even_square(x, "cayley_sigma_from_x");
  detail::require_finite(x, "cayley_sigma_from_x");
  const Scalar scale = std::max<Scalar>(1, max_abs(x));
  if (!is_sharp_skew(x, Scalar(opts.structure_tol) * scale)) {
    throw ValidationError("cayley_sigma_from_x: X is not sharp-skew (||X# + X||"
                          "_max exceeds tolerance)");
  }
  const Index n = x.rows();
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(n, n);
  const MatrixX<Scalar> plus = x + id;
  if (detail::reciprocal_condition(plus) < Scalar(1) / Scalar(opts.condition_cap)) {
    throw DomainError("cayley_sigma_from_x: X + I is singular or "
                      "ill-conditioned (X has an eigenvalue near -1)");
  }
  // (X - I) and (X + I)^{-1} commute.
  return plus.partialPivLu().solve(MatrixX<Scalar>(x - id));
}

/// X = (I + Sigma)(I - Sigma)^{-1}, inverse of cayley_sigma_from_x.
template <typename Derived>
MatrixX<typename Derived::Scalar> cayley_x_from_sigma(
    const Eigen::MatrixBase<Derived>& sigma, const CayleyOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  detail::require_even_square(sigma, "cayley_x_from_sigma");
  detail::require_finite(sigma, "cayley_x_from_sigma");
  const Scalar scale = std::max<Scalar>(1, max_abs(sigma));
  if (!is_symplectic(sigma, Scalar(opts.structure_tol) * scale * scale)) {
    throw ValidationError("cayley_x_from_sigma: Sigma is not symplectic");
  }
  const Index n = sigma.rows();
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(n, n);
  const MatrixX<Scalar> minus = id - sigma;
  if (detail::reciprocal_condition(minus) <
      Scalar(1) / Scalar(opts.condition_cap)) {
    std::ostringstream os;
    os << "cayley_x_from_sigma: Sigma has a unit eigenvalue; eigenvalues:";
    Eigen::EigenSolver<MatrixX<Scalar>> es(MatrixX<Scalar>(sigma), false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      os << " " << es.eigenvalues()(i);
    }
    throw DomainError(os.str());
  }
  return minus.partialPivLu().solve(MatrixX<Scalar>(id + sigma));
}

/// The orthogonal 2m x 2m permutation (m = m_a + m_b) that reorders the
/// quadratures (q_a, q_b, p_a, p_b) into (q_a, p_a, q_b, p_b). Satisfies
/// Pi J_{2m} Pi^T = diag(J_{2m_a}, J_{2m_b}).
template <typename Scalar = double>
MatrixX<Scalar> build_partition_permutation(Index m_a, Index m_b) {
  if (m_a < 0 || m_b < 0 || m_a + m_b == 0) {
    throw ValidationError("build_partition_permutation: need m_a, m_b >= 0, "
                          "not both zero");
  }
  const Index m = m_a + m_b;
  MatrixX<Scalar> pi = MatrixX<Scalar>::Zero(2 * m, 2 * m);
  for (Index i = 0; i < m_a; ++i) {
    pi(i, i) = 1;
    pi(m_a + i, m + i) = 1;
  }
  for (Index i = 0; i < m_b; ++i) {
    pi(2 * m_a + i, m_a + i) = 1;
    pi(2 * m_a + m_b + i, m + m_a + i) = 1;
  }
  return pi;
}

/// Quadrature form of a unitary scattering matrix S:
/// D = 1/2 [[S + S^#, i(S - S^#)], [-i(S - S^#), S + S^#]]
///   = [[Re S, -Im S], [Im S, Re S]].
template <typename Derived>
MatrixX<typename Eigen::NumTraits<typename Derived::Scalar>::Real>
unitary_to_quadrature(const Eigen::MatrixBase<Derived>& s,
                      typename Eigen::NumTraits<typename Derived::Scalar>::Real
                          tol = 1e-10) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (s.rows() != s.cols()) {
    throw ValidationError("unitary_to_quadrature: S must be square");
  }
  if (!is_orthogonal(s, tol)) {
    throw ValidationError("unitary_to_quadrature: S is not unitary");
  }
  const Index m = s.rows();
  MatrixX<Real> d(2 * m, 2 * m);
  d.topLeftCorner(m, m) = s.real();
  d.topRightCorner(m, m) = -s.imag();
  d.bottomLeftCorner(m, m) = s.imag();
  d.bottomRightCorner(m, m) = s.real();
  return d;
}

/// Real coupling matrix from L = L_q q + L_p p:
/// C = [[L_q + L_q^#, L_p + L_p^#], [-i(L_q - L_q^#), -i(L_p - L_p^#)]].
template <typename DerivedQ, typename DerivedP>
MatrixX<typename Eigen::NumTraits<typename DerivedQ::Scalar>::Real>
coupling_to_quadrature(const Eigen::MatrixBase<DerivedQ>& l_q,
                       const Eigen::MatrixBase<DerivedP>& l_p) {
  using Real = typename Eigen::NumTraits<typename DerivedQ::Scalar>::Real;
  if (l_q.rows() != l_p.rows() || l_q.cols() != l_p.cols()) {
    throw ValidationError("coupling_to_quadrature: L_q and L_p shapes differ");
  }
  const Index m = l_q.rows();
  const Index n = l_q.cols();
  MatrixX<Real> c(2 * m, 2 * n);
  c.topLeftCorner(m, n) = 2 * l_q.real();
  c.topRightCorner(m, n) = 2 * l_p.real();
  c.bottomLeftCorner(m, n) = 2 * l_q.imag();
  c.bottomRightCorner(m, n) = 2 * l_p.imag();
  return c;
}

/// diag(a, b) for two square blocks.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> block_diag(
    const Eigen::MatrixBase<DerivedA>& a,
    const Eigen::MatrixBase<DerivedB>& b) {
  MatrixX<typename DerivedA::Scalar> out =
      MatrixX<typename DerivedA::Scalar>::Zero(a.rows() + b.rows(),
                                               a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace qfb
