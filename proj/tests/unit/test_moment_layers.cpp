// Copyright 2026 The MoNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "monet/moment_layers.hpp"
#include "monet/rng.hpp"
#include "monet/verification.hpp"
#include "test_util.hpp"

namespace monet {
namespace {

using testing::mat;

TEST(HmForward, TwoByTwo) {
  const HomogeneousFeatures h = hm_forward(mat({{2, 3}, {4, 5}}));
  const double r = 1.0 / std::sqrt(2.0);
  testing::expect_near(h.matrix, mat({{r, 2 * r, 3 * r}, {r, 4 * r, 5 * r}}), 1e-15);
  EXPECT_EQ(h.n, 2);
  EXPECT_EQ(h.c, 2);
}

TEST(HmForward, SingleZeroLocation) {
  testing::expect_near(hm_forward(mat({{0}})).matrix, mat({{1, 0}}), 0.0);
}

TEST(HmForward, GramHoldsMeanInFirstRow) {
  const HomogeneousFeatures h = hm_forward(mat({{2, 3}, {4, 5}}));
  const Matrix g = h.matrix.transpose() * h.matrix;
  EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g(0, 1), 3.0, 1e-14);
  EXPECT_NEAR(g(0, 2), 4.0, 1e-14);
}

TEST(HmForward, RejectsEmpty) { EXPECT_THROW(hm_forward(Matrix(0, 3)), InvalidArgument); }

TEST(HmBackward, DropsConstantColumn) {
  testing::expect_near(hm_backward(mat({{7, 2}})), mat({{2}}), 0.0);
  testing::expect_near(hm_backward(Matrix::Ones(4, 3)), Matrix::Constant(4, 2, 0.5), 1e-15);
}

TEST(HmBackward, MatchesFiniteDifferences) {
  Rng rng(30);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_normal(6, 3, rng);
    const Matrix w = random_normal(6, 4, rng);
    const ScalarFn f = [&](const Vector& p) {
      return hm_forward(unflatten(p, 6, 3)).matrix.cwiseProduct(w).sum();
    };
    const GradCheckReport r =
        gradcheck("hm", f, flatten(hm_backward(w)), flatten(x), kGradStep, 1e-7);
    EXPECT_TRUE(r.pass) << r.max_rel_err;
  }
}

TEST(SsqrtForward, DiagonalAndIdentity) {
  const SsqrtResult d = ssqrt_forward(mat({{3, 0}, {0, 2}}));
  testing::expect_near(d.y.transpose() * d.y, mat({{3, 0}, {0, 2}}), 1e-13);

  const SsqrtResult id = ssqrt_forward(Matrix::Identity(3, 3));
  testing::expect_near(id.y.transpose() * id.y, Matrix::Identity(3, 3), 1e-13);
}

TEST(SsqrtForward, MatchesEigenOracleOnSeededTall) {
  Rng rng(8);
  const Matrix xt = random_normal(8, 3, rng);
  const SsqrtResult r = ssqrt_forward(xt);
  EXPECT_LE(relative_frobenius(r.y.transpose() * r.y, sqrtm_oracle(xt.transpose() * xt)), 1e-10);
}

TEST(SsqrtForward, RowsBeyondRetainedRankAreZero) {
  Rng rng(9);
  const Matrix xt = with_singular_values(7, 4, testing::vec({3.0, 2.0, 0.0, 0.0}), rng);
  const SsqrtResult r = ssqrt_forward(xt);
  EXPECT_EQ(r.cache.e, 2);
  EXPECT_EQ(r.y.rows(), 7);
  EXPECT_EQ(r.y.bottomRows(5).cwiseAbs().maxCoeff(), 0.0);
  // The eigen oracle takes roots of round-off eigenvalues here, so check by squaring.
  const Matrix root = r.y.transpose() * r.y;
  EXPECT_LE(relative_frobenius(root * root, xt.transpose() * xt), 1e-12);
}

TEST(SsqrtForward, Errors) {
  EXPECT_THROW(ssqrt_forward(Matrix::Ones(2, 3)), InvalidArgument);  // n < m
  EXPECT_THROW(ssqrt_forward(Matrix::Zero(4, 2)), InvalidArgument);  // nothing above epsilon
}

// Y^T Y squared recovers X~^T X~.
TEST(SsqrtForward, SquareOfRootIsGram) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.below(6));
    const Index n = m + static_cast<Index>(rng.below(6));
    const Matrix xt = random_normal(n, m, rng);
    const SsqrtResult r = ssqrt_forward(xt);
    const Matrix root = r.y.transpose() * r.y;
    EXPECT_LE(relative_frobenius(root * root, xt.transpose() * xt), 1e-9);
  }
}

// Left-multiplying by an orthogonal matrix does not change the Gram, hence not Y^T Y.
TEST(SsqrtForward, InvariantToOrthogonalLeftFactor) {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix xt = random_normal(9, 4, rng);
    const Matrix q = random_orthonormal(9, 9, rng);
    const SsqrtResult a = ssqrt_forward(xt);
    const SsqrtResult b = ssqrt_forward(q * xt);
    EXPECT_LE(relative_frobenius(a.y.transpose() * a.y, b.y.transpose() * b.y), 1e-10);
  }
}

TEST(SsqrtBackward, ZeroUpstreamGivesZero) {
  Rng rng(2);
  const SsqrtResult r = ssqrt_forward(random_normal(6, 3, rng));
  EXPECT_EQ(ssqrt_backward(Matrix::Zero(6, 3), r.cache).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SsqrtBackward, ScalarCase) {
  const SsqrtResult r = ssqrt_forward(mat({{4}}));
  EXPECT_NEAR(r.y(0, 0), 2.0, 1e-15);
  for (double g : {1.0, -3.0, 0.5}) {
    EXPECT_NEAR(ssqrt_backward(mat({{g}}), r.cache)(0, 0), 0.25 * g, 1e-15);
  }
}

TEST(SsqrtBackward, MatchesFiniteDifferencesOnSeparatedSpectra) {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    Vector s(4);
    for (Index i = 0; i < 4; ++i) s(i) = 4.0 - 0.8 * static_cast<double>(i) + 0.2 * rng.uniform();
    const Matrix xt = with_singular_values(10, 4, s, rng);
    const Matrix w = random_normal(10, 4, rng);
    const ScalarFn f = [&](const Vector& p) {
      return ssqrt_forward(unflatten(p, 10, 4)).y.cwiseProduct(w).sum();
    };
    // The loss touches Y directly, so the sign convention has to be stable under
    // perturbation; it is because each column's dominant entry stays dominant.
    const SsqrtResult r = ssqrt_forward(xt);
    const Matrix analytic = ssqrt_backward(w, r.cache);
    const GradCheckReport rep = gradcheck("ssqrt", f, flatten(analytic), flatten(xt), kGradStep, 1e-5);
    EXPECT_TRUE(rep.pass) << "trial " << trial << " rel " << rep.max_rel_err;
  }
}

TEST(SsqrtBackward, RankDeficientInputMatchesFiniteDifferencesOfGramLoss) {
  Rng rng(19);
  const Matrix xt = with_singular_values(8, 4, testing::vec({3.0, 2.0, 1.0, 0.0}), rng);
  const Matrix w = random_normal(4, 4, rng);
  const Matrix sym = w + w.transpose();
  const ScalarFn f = [&](const Vector& p) {
    const SsqrtResult r = ssqrt_forward(unflatten(p, 8, 4));
    return (r.y.transpose() * r.y).cwiseProduct(sym).sum();
  };
  const SsqrtResult r = ssqrt_forward(xt);
  const Matrix grad_y = r.y * (sym + sym.transpose());
  const GradCheckReport rep =
      gradcheck("ssqrt-rank3", f, flatten(ssqrt_backward(grad_y, r.cache)), flatten(xt), kGradStep, 1e-5);
  EXPECT_TRUE(rep.pass) << rep.max_rel_err;
}

TEST(SsqrtBackward, SeparationGuard) {
  Rng rng(3);
  const Matrix xt = with_singular_values(6, 3, testing::vec({2.0, 2.0, 1.0}), rng);
  const SsqrtResult r = ssqrt_forward(xt);
  const Matrix g = random_normal(6, 3, rng);
  try {
    ssqrt_backward(g, r.cache, GuardMode::kVerify);
    FAIL() << "expected SeparationError";
  } catch (const SeparationError& e) {
    EXPECT_EQ(e.first(), 0);
    EXPECT_EQ(e.second(), 1);
  }
  const Matrix clamped = ssqrt_backward(g, r.cache, GuardMode::kTrain);
  EXPECT_TRUE(all_finite(clamped));
}

TEST(ScaleLayer, ForwardAndAdjoint) {
  const Matrix x = mat({{2, 4}, {6, 8}, {1, 1}, {0, 3}});
  testing::expect_near(scale_forward(x), 0.5 * x, 1e-15);
  testing::expect_near(scale_backward(x), 0.5 * x, 1e-15);
}

}  // namespace
}  // namespace monet
