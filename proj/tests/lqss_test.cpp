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

#include "qfb/lqss.hpp"

#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace qfb;
using namespace qfb::testing;

namespace {

TwoPortLqss<double> two_port(const LqssParams<double>& ext, const Mat& c) {
  return {ext.n, ext.r, ext.c, ext.d, c};
}

}  // namespace

TEST(lqss, validation) {
  Rng rng(31);
  LqssParams<double> ok = random_lqss(rng, 2, 1);
  EXPECT_NO_THROW(ok.validate());

  LqssParams<double> asym = ok;
  asym.r(0, 1) += 1;
  EXPECT_THROW(asym.validate(), ValidationError);

  LqssParams<double> not_symplectic = ok;
  not_symplectic.d *= 2;
  EXPECT_THROW(not_symplectic.validate(), ValidationError);

  LqssParams<double> bad_c = ok;
  bad_c.c = Mat::Zero(2, 6);
  EXPECT_THROW(bad_c.validate(), ValidationError);

  EXPECT_NO_THROW(LqssParams<double>::closed(Mat::Identity(4, 4)).validate());
}

TEST(lqss, realizability_identity_randomized) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = rng.integer(1, 4);
    const Index m = rng.integer(0, 4);
    const LqssParams<double> sys = random_lqss(rng, n, m);
    const auto dyn = single_dynamics(sys);
    const double scale = std::max(1.0, max_abs(dyn.a)) *
                         std::max(1.0, max_abs(dyn.b_ext)) *
                         std::max(1.0, max_abs(dyn.b_ext));
    EXPECT_LE(realizability_residual(sys), 1e-12 * scale);
  }
}

TEST(lqss, direct_dynamics_decoupled) {
  Rng rng(33);
  DirectInteraction<double> di{LqssParams<double>::closed(rng.symmetric(4)),
                               LqssParams<double>::closed(rng.symmetric(6)),
                               Mat::Zero(4, 6)};
  const auto dyn = direct_dynamics(di);
  EXPECT_EQ(dyn.a, block_diag(Mat(symplectic_form(2) * di.sys_a.r),
                              Mat(symplectic_form(3) * di.sys_b.r)));
  EXPECT_EQ(dyn.b_ext.rows(), 10);
  EXPECT_EQ(dyn.b_ext.cols(), 0);
}

TEST(lqss, direct_dynamics_single_modes) {
  DirectInteraction<double> di{LqssParams<double>::closed(Mat::Zero(2, 2)),
                               LqssParams<double>::closed(Mat::Zero(2, 2)),
                               Mat::Identity(2, 2)};
  Mat expected = Mat::Zero(4, 4);
  expected.topRightCorner(2, 2) = symplectic_form(1);
  expected.bottomLeftCorner(2, 2) = symplectic_form(1);
  EXPECT_EQ(direct_dynamics(di).a, expected);
}

TEST(lqss, direct_dynamics_blocks) {
  Rng rng(34);
  DirectInteraction<double> di{random_lqss(rng, 2, 1), random_lqss(rng, 3, 2),
                               example_r_ab()};
  const auto dyn = direct_dynamics(di);
  const Mat j4 = reference_j(2), j6 = reference_j(3);
  EXPECT_LE(max_abs(Mat(dyn.a.topRightCorner(4, 6)) - j4 * di.r_ab), 0.0);
  EXPECT_LE(max_abs(Mat(dyn.a.bottomLeftCorner(6, 4)) - j6 * di.r_ab.transpose()),
            0.0);
  const Mat aa = j4 * di.sys_a.r - 0.5 * reference_sharp(di.sys_a.c) * di.sys_a.c;
  EXPECT_LE(max_abs(Mat(dyn.a.topLeftCorner(4, 4)) - aa), 1e-12);
  const Mat ba = -reference_sharp(di.sys_a.c) * di.sys_a.d;
  EXPECT_LE(max_abs(Mat(dyn.b_ext.topLeftCorner(4, 2)) - ba), 1e-12);
  EXPECT_EQ(dyn.c_ext, block_diag(di.sys_a.c, di.sys_b.c));
  EXPECT_EQ(dyn.d_ext, block_diag(di.sys_a.d, di.sys_b.d));

  const Mat h = di.composite_hamiltonian();
  EXPECT_EQ(h, Mat(h.transpose()));

  DirectInteraction<double> bad = di;
  bad.r_ab = Mat::Zero(4, 4);
  EXPECT_THROW(direct_dynamics(bad), ValidationError);
}

TEST(lqss, closed_loop_without_coupling_is_open) {
  Rng rng(35);
  const auto a = random_lqss(rng, 2, 1);
  const auto b = random_lqss(rng, 1, 1);
  const Mat sigma = rng.symplectic(2);
  const auto dyn = feedback_closed_loop(two_port(a, Mat::Zero(4, 4)),
                                        two_port(b, Mat::Zero(4, 2)), sigma);
  EXPECT_LE(max_abs(dyn.a - block_diag(single_dynamics(a).a, single_dynamics(b).a)),
            1e-14);
}

TEST(lqss, closed_loop_sigma_minus_identity) {
  // (I - S)^{-1} = I/2 and (I - S)^{-1} S = -I/2 when S = -I.
  Rng rng(36);
  const auto a = random_lqss(rng, 2, 0);
  const auto b = random_lqss(rng, 2, 0);
  const Mat ca = rng.matrix(2, 4), cb = rng.matrix(2, 4);
  const auto dyn = feedback_closed_loop(two_port(a, ca), two_port(b, cb),
                                        Mat(-Mat::Identity(2, 2)));
  EXPECT_LE(max_abs(Mat(dyn.a.topRightCorner(4, 4)) +
                    0.5 * reference_sharp(ca) * cb),
            1e-13);
  EXPECT_LE(max_abs(Mat(dyn.a.bottomLeftCorner(4, 4)) -
                    0.5 * reference_sharp(cb) * ca),
            1e-13);
  // Diagonal: -1/2 C# C + 1/2 C# C cancels.
  EXPECT_LE(max_abs(Mat(dyn.a.topLeftCorner(4, 4)) - reference_j(2) * a.r), 1e-13);
}

TEST(lqss, closed_loop_errors) {
  Rng rng(37);
  const auto a = random_lqss(rng, 1, 0);
  const auto b = random_lqss(rng, 1, 0);
  const Mat c = rng.matrix(2, 2);
  EXPECT_THROW(feedback_closed_loop(two_port(a, c), two_port(b, c),
                                    Mat(Mat::Identity(2, 2))),
               AlgebraicLoopError);
  EXPECT_THROW(feedback_closed_loop(two_port(a, c), two_port(b, rng.matrix(4, 2)),
                                    Mat(-Mat::Identity(2, 2))),
               ValidationError);
  EXPECT_THROW(feedback_closed_loop(two_port(a, c), two_port(b, c),
                                    Mat(-Mat::Identity(4, 4))),
               ValidationError);
}

TEST(lqss, x_form_matches_sigma_form_randomized) {
  Rng rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    const Index na = rng.integer(1, 3), nb = rng.integer(1, 3), m = rng.integer(1, 3);
    const auto a = random_lqss(rng, na, rng.integer(0, 2));
    const auto b = random_lqss(rng, nb, rng.integer(0, 2));
    const auto sa = two_port(a, rng.matrix(2 * m, 2 * na));
    const auto sb = two_port(b, rng.matrix(2 * m, 2 * nb));
    const Mat x = rng.sharp_skew(m);
    const Mat sigma = cayley_sigma_from_x(x);
    const Mat via_sigma = feedback_closed_loop(sa, sb, sigma).a;
    const Mat via_x = feedback_drift_from_x(sa, sb, x);
    EXPECT_LE(max_abs(via_sigma - via_x), 1e-10 * std::max(1.0, max_abs(via_x)));
  }
}

TEST(lqss, partitioned_form) {
  Rng rng(39);
  {
    const auto sys = random_lqss(rng, 2, 2);
    const auto part = partitioned_form(sys, 2, 0);
    EXPECT_EQ(part.c_a, sys.c);
    EXPECT_EQ(part.d_aa, sys.d);
    EXPECT_EQ(part.c_b.rows(), 0);
  }
  {
    LqssParams<double> sys{2, rng.symmetric(4), Mat::Identity(4, 4),
                           Mat::Identity(4, 4)};
    const auto part = partitioned_form(sys, 1, 1);
    const Mat pi = build_partition_permutation(1, 1);
    EXPECT_EQ(part.c_a, Mat(pi.topRows(2)));
    EXPECT_EQ(part.c_b, Mat(pi.bottomRows(2)));
    EXPECT_EQ(part.d_aa, Mat(Mat::Identity(2, 2)));
    EXPECT_EQ(part.d_ab, Mat(Mat::Zero(2, 2)));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const auto sys = random_lqss(rng, rng.integer(1, 3), 3);
    const auto part = partitioned_form(sys, 2, 1);
    const Mat lhs = 0.5 * sharp_adjoint(part.c_a) * part.c_a +
                    0.5 * sharp_adjoint(part.c_b) * part.c_b;
    EXPECT_LE(max_abs(lhs - 0.5 * sharp_adjoint(sys.c) * sys.c),
              1e-12 * std::max(1.0, max_abs(lhs)));
    const auto [c, d] = part.reassemble();
    EXPECT_EQ(c, sys.c);
    EXPECT_EQ(d, sys.d);
  }
  EXPECT_THROW(partitioned_form(random_lqss(rng, 1, 2), 2, 1), ValidationError);
}
