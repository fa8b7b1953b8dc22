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
/// Block-interleaved SVD of an even-dimension matrix.
///
/// For a real 2r x 2s matrix T the ordinary SVD T = U That V^T is reindexed
/// into T = Ut Tt Vt^T with Tt = diag(T1, T2), where T1 and T2 are r x s and
/// nonzero only on their main diagonals. The nonzero singular values are
/// split so that T1 carries ceil(rank/2) of them and T2 carries floor(rank/2);
/// each block therefore has at most ceil(rank/2) nonzero diagonal entries.

#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "qfb/symplectic.hpp"

namespace qfb {

template <typename Scalar>
struct SpecialSvd {
  MatrixX<Scalar> u_tilde;  // 2r x 2r orthogonal
  MatrixX<Scalar> t_tilde;  // 2r x 2s, diag(T1, T2)
  MatrixX<Scalar> v_tilde;  // 2s x 2s orthogonal
  Index rank = 0;
  /// Trailing zeros on the diagonals of (T1, T2).
  std::pair<Index, Index> nullity_split{0, 0};
  /// Ordinary-SVD column feeding each column of u_tilde / v_tilde.
  std::vector<Index> u_source;
  std::vector<Index> v_source;

  Index half_rows() const { return t_tilde.rows() / 2; }
  Index half_cols() const { return t_tilde.cols() / 2; }
  /// Number of diagonal slots per block, min(r, s).
  Index block_diag_size() const { return std::min(half_rows(), half_cols()); }

  /// Main diagonal of T1 (length min(r, s)).
  VectorX<Scalar> t1_diagonal() const {
    return t_tilde.topLeftCorner(half_rows(), half_cols()).diagonal();
  }
  /// Main diagonal of T2 (length min(r, s)).
  VectorX<Scalar> t2_diagonal() const {
    return t_tilde.bottomRightCorner(half_rows(), half_cols()).diagonal();
  }

  MatrixX<Scalar> reconstruct() const {
    return u_tilde * t_tilde * v_tilde.transpose();
  }

  /// Column permutation P1 with u_tilde = U * P1 (likewise for V). Provided
  /// for audit; the factorization itself never materializes it.
  Eigen::PermutationMatrix<Eigen::Dynamic> left_permutation() const {
    return make_permutation(u_source);
  }
  Eigen::PermutationMatrix<Eigen::Dynamic> right_permutation() const {
    return make_permutation(v_source);
  }

 private:
  static Eigen::PermutationMatrix<Eigen::Dynamic> make_permutation(
      const std::vector<Index>& source) {
    // (U * P).col(j) = U.col(source[j])  <=>  P maps source[j] -> j.
    Eigen::PermutationMatrix<Eigen::Dynamic> p(
        static_cast<Index>(source.size()));
    for (std::size_t j = 0; j < source.size(); ++j) {
      p.indices()(source[j]) = static_cast<int>(j);
    }
    return p;
  }
};

/// Numerical rank: singular values above rank_tol * sigma_max.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& t, double rank_tol) {
  if (t.size() == 0) return 0;
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(t);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > Scalar(rank_tol) * s(0)) ++rank;
  }
  return rank;
}

template <typename Derived>
SpecialSvd<typename Derived::Scalar> special_svd(
    const Eigen::MatrixBase<Derived>& t, double rank_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  detail::require_even(t, "special_svd");
  detail::require_finite(t, "special_svd");

  const Index rows = t.rows();
  const Index cols = t.cols();
  const Index r = rows / 2;
  const Index s = cols / 2;
  const Index k = std::min(r, s);

  SpecialSvd<Scalar> out;
  out.t_tilde = MatrixX<Scalar>::Zero(rows, cols);

  if (rows == 0 || cols == 0) {
    out.u_tilde = MatrixX<Scalar>::Identity(rows, rows);
    out.v_tilde = MatrixX<Scalar>::Identity(cols, cols);
    for (Index i = 0; i < rows; ++i) out.u_source.push_back(i);
    for (Index i = 0; i < cols; ++i) out.v_source.push_back(i);
    return out;
  }

  Eigen::JacobiSVD<MatrixX<Scalar>> svd(t, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  const MatrixX<Scalar>& u = svd.matrixU();
  const MatrixX<Scalar>& v = svd.matrixV();
  const VectorX<Scalar>& sv = svd.singularValues();  // length 2k, sorted

  Index rank = 0;
  if (sv(0) > 0) {
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > Scalar(rank_tol) * sv(0)) ++rank;
    }
  }
  out.rank = rank;

  const Index nonzero1 = (rank + 1) / 2;
  const Index nonzero2 = rank - nonzero1;
  out.nullity_split = {k - nonzero1, k - nonzero2};

  // Singular-value index placed at diagonal slot i of T1 and of T2. The
  // sub-threshold values fill the trailing slots, T1 first.
  std::vector<Index> slot1(k), slot2(k);
  Index next_zero = rank;
  for (Index i = 0; i < nonzero1; ++i) slot1[i] = i;
  for (Index i = 0; i < nonzero2; ++i) slot2[i] = nonzero1 + i;
  for (Index i = nonzero1; i < k; ++i) slot1[i] = next_zero++;
  for (Index i = nonzero2; i < k; ++i) slot2[i] = next_zero++;

  out.u_source.assign(rows, -1);
  out.v_source.assign(cols, -1);
  for (Index i = 0; i < k; ++i) {
    const Index a = slot1[i];
    const Index b = slot2[i];
    out.t_tilde(i, i) = a < rank ? sv(a) : Scalar(0);
    out.t_tilde(r + i, s + i) = b < rank ? sv(b) : Scalar(0);
    out.u_source[i] = a;
    out.u_source[r + i] = b;
    out.v_source[i] = a;
    out.v_source[s + i] = b;
  }
  // Columns beyond the 2k singular directions fill the remaining slots in
  // order; only one side has any.
  Index next_u = 2 * k;
  for (Index j = 0; j < rows; ++j) {
    if (out.u_source[j] < 0) out.u_source[j] = next_u++;
  }
  Index next_v = 2 * k;
  for (Index j = 0; j < cols; ++j) {
    if (out.v_source[j] < 0) out.v_source[j] = next_v++;
  }

  out.u_tilde.resize(rows, rows);
  for (Index j = 0; j < rows; ++j) out.u_tilde.col(j) = u.col(out.u_source[j]);
  out.v_tilde.resize(cols, cols);
  for (Index j = 0; j < cols; ++j) out.v_tilde.col(j) = v.col(out.v_source[j]);
  return out;
}

}  // namespace qfb
