// Copyright 2026 The sigmarec Authors.
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

#include "sigma/autodiff.hpp"

#include <gtest/gtest.h>

#include "sigma/errors.hpp"
#include "support/testing.hpp"

namespace sigma::ad {
namespace {

using testing::gradient_error;

constexpr double kTol = 1e-6;

class AutodiffTest : public ::testing::Test {
 protected:
  Rng rng{11};
  Var p(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    return parameter(uniform_matrix(r, c, rng, lo, hi));
  }
};

TEST_F(AutodiffTest, MatmulGradients) {
  Var a = p(3, 4), b = p(4, 2), c = p(5, 4);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(matmul(a, b))); }), kTol);
  EXPECT_LT(gradient_error(b, [&] { return sum(square(matmul(a, b))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(matmul_nt(a, c))); }), kTol);
  EXPECT_LT(gradient_error(c, [&] { return sum(square(matmul_nt(a, c))); }), kTol);
}

TEST_F(AutodiffTest, ElementwiseGradients) {
  Var a = p(3, 4), b = p(3, 4), row = p(1, 4), col = p(3, 1);
  Var pos = p(3, 4, 0.5, 2.0);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(add(a, b), sub(a, b))); }), kTol);
  EXPECT_LT(gradient_error(row, [&] { return sum(square(add_row(a, row))); }), kTol);
  EXPECT_LT(gradient_error(col, [&] { return sum(square(mul_col(a, col))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(tanh(scale(add_scalar(a, 0.3), 2.0))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(sigmoid(a), exp(a))); }), kTol);
  EXPECT_LT(gradient_error(pos, [&] { return sum(log(pos)); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(relu(a), b)); }), 1e-5);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(abs(a), b)); }), 1e-5);
}

TEST_F(AutodiffTest, ClampBlocksGradientOutsideRange) {
  Var a = parameter(Matrix{{-3.0, 0.5, 4.0}});
  backward(sum(clamp(a, -1.0, 2.0)));
  EXPECT_EQ(a.grad()(0, 0), 0.0);
  EXPECT_EQ(a.grad()(0, 1), 1.0);
  EXPECT_EQ(a.grad()(0, 2), 0.0);
}

TEST_F(AutodiffTest, DetachStopsGradient) {
  Var a = p(2, 2);
  backward(sum(mul(detach(a), a)));
  EXPECT_LT((a.grad() - a.value()).norm(), 1e-12);
}

TEST_F(AutodiffTest, ReductionAndShapeGradients) {
  Var a = p(4, 6), w = p(4, 6);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(row_sum(a))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(col_sum(a))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(reshape(a, 4, 6), w)); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(reshape(a, 8, 3))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(concat_cols({a, scale(a, 2.0)}))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(slice_cols(a, 1, 3))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(slice_rows(a, 1, 2))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(gather_rows(a, {3, 0, 3, 1}))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(repeat_rows(a, 3))); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(square(tile_rows(a, 2))); }), kTol);
}

TEST_F(AutodiffTest, RowOperatorGradients) {
  Var a = p(3, 4), b = p(3, 5), w = p(3, 4);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(softmax_rows(a), w)); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(l2_normalize_rows(a), w)); }), kTol);
  Var w2 = p(3, 20);
  EXPECT_LT(gradient_error(a, [&] { return sum(mul(row_outer(a, b), w2)); }), kTol);
  EXPECT_LT(gradient_error(b, [&] { return sum(mul(row_outer(a, b), w2)); }), kTol);
  EXPECT_LT(gradient_error(a, [&] { return softmax_xent(a, {0, 3, 2}); }), kTol);
}

TEST_F(AutodiffTest, RowOuterLayout) {
  Matrix a{{1.0, 2.0}}, b{{3.0, 4.0, 5.0}};
  Matrix out = row_outer(constant(a), constant(b)).value();
  Matrix expected{{3.0, 4.0, 5.0, 6.0, 8.0, 10.0}};
  EXPECT_EQ(out, expected);
}

TEST_F(AutodiffTest, StraightThroughPassesSoftGradient) {
  Var logits = p(2, 3);
  Matrix hard = Matrix::Zero(2, 3);
  hard(0, 1) = hard(1, 2) = 1.0;
  Var w = constant(uniform_matrix(2, 3, rng, -1, 1));
  Var st = straight_through(hard, softmax_rows(logits));
  EXPECT_EQ(st.value(), hard);
  backward(sum(mul(st, w)));
  Matrix via_st = logits.grad();
  logits.zero_grad();
  backward(sum(mul(softmax_rows(logits), w)));
  EXPECT_LT((via_st - logits.grad()).norm(), 1e-12);
}

TEST_F(AutodiffTest, GradientsAccumulateOverSharedUse) {
  Var a = parameter(Matrix::Constant(1, 1, 3.0));
  backward(sum(add(mul(a, a), scale(a, 2.0))));
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 8.0);
}

TEST_F(AutodiffTest, NoGradGuardBuildsConstants) {
  Var a = p(2, 2);
  {
    NoGradGuard guard;
    EXPECT_FALSE(matmul(a, a).requires_grad());
  }
  EXPECT_TRUE(matmul(a, a).requires_grad());
}

TEST_F(AutodiffTest, DropoutIsIdentityWithoutRng) {
  Var a = p(4, 4);
  EXPECT_EQ(dropout(a, 0.5, nullptr).value(), a.value());
  Rng r(3);
  Matrix d = dropout(a, 0.5, &r).value();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    EXPECT_TRUE(d.data()[i] == 0.0 || std::abs(d.data()[i] - 2.0 * a.value().data()[i]) < 1e-12);
  }
}

TEST_F(AutodiffTest, BackwardNeedsScalarRoot) { EXPECT_THROW(backward(p(2, 2)), DomainError); }

}  // namespace
}  // namespace sigma::ad
