// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "panfuse/losses.hpp"
#include "panfuse/tensor.hpp"

using namespace panfuse;

TEST(FeatureMapTest, LayoutIsChannelMajor) {
  FeatureMap m(2, 3, 4);
  EXPECT_EQ(m.size(), 24u);
  EXPECT_EQ(m.index(1, 2, 3), 23u);
  EXPECT_EQ(m.index(1, 0, 0), 12u);
  m(1, 0, 1) = 5.0;
  EXPECT_EQ(m[13], 5.0);
  EXPECT_THROW(FeatureMap({2, 2, 2}, std::vector<double>(7)), ShapeError);
}

TEST(ElementwiseTest, AddIdentityAndOnes) {
  Rng rng(1);
  const auto b = oracle::random_map(2, 2, 2, rng);
  EXPECT_EQ(elementwise_add(FeatureMap::zeros(2, 2, 2), b), b);
  const auto two = elementwise_add(FeatureMap::ones(1, 1, 1), FeatureMap::ones(1, 1, 1));
  EXPECT_EQ(two[0], 2.0);
}

TEST(ElementwiseTest, RandomMatchesScalarLoop) {
  Rng rng(7);
  const auto a = oracle::random_map(3, 4, 4, rng);
  const auto b = oracle::random_map(3, 4, 4, rng);
  const auto sum = elementwise_add(a, b);
  const auto prod = elementwise_mul(a, b);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t h = 0; h < 4; ++h) {
      for (std::size_t w = 0; w < 4; ++w) {
        EXPECT_EQ(sum(c, h, w), a(c, h, w) + b(c, h, w));
        EXPECT_EQ(prod(c, h, w), a(c, h, w) * b(c, h, w));
      }
    }
  }
}

TEST(ElementwiseTest, MulIdentities) {
  Rng rng(3);
  const auto a = oracle::random_map(2, 3, 2, rng);
  EXPECT_EQ(elementwise_mul(a, FeatureMap::ones(2, 3, 2)), a);
  EXPECT_EQ(elementwise_mul(a, FeatureMap::zeros(2, 3, 2)), FeatureMap::zeros(2, 3, 2));
}

TEST(ElementwiseTest, ShapeMismatchNamesBothShapes) {
  try {
    elementwise_add(FeatureMap(1, 2, 3), FeatureMap(1, 3, 2));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("(1x2x3)"), std::string::npos);
    EXPECT_NE(what.find("(1x3x2)"), std::string::npos);
  }
  EXPECT_THROW(elementwise_mul(FeatureMap(2, 2, 2), FeatureMap(1, 2, 2)), ShapeError);
}

TEST(ElementwiseTest, CommutativeAndAssociativeWhereExact) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_map(2, 3, 3, rng);
    const auto b = oracle::random_map(2, 3, 3, rng);
    EXPECT_EQ(elementwise_add(a, b), elementwise_add(b, a));
    EXPECT_EQ(elementwise_mul(a, b), elementwise_mul(b, a));
    // Floating-point addition is only associative up to rounding.
    const auto c = oracle::random_map(2, 3, 3, rng);
    const auto left = elementwise_add(elementwise_add(a, b), c);
    const auto right = elementwise_add(a, elementwise_add(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) EXPECT_NEAR(left[i], right[i], 1e-15);
  }
}

TEST(Conv1x1Test, IdentityAndConstant) {
  Rng rng(4);
  const auto x = oracle::random_map(3, 2, 5, rng);
  EXPECT_EQ(conv1x1(x, Matrix::identity(3), std::vector<double>(3, 0.0)), x);
  const auto k = conv1x1(x, Matrix(2, 3, 0.0), std::vector<double>{4.5, 4.5});
  EXPECT_EQ(k, FeatureMap(2, 2, 5, 4.5));
}

TEST(Conv1x1Test, RandomMatchesPerPixelDotProducts) {
  Rng rng(11);
  const auto x = oracle::random_map(4, 3, 5, rng);
  Matrix w(2, 4);
  for (double& v : w.data()) v = rng.uniform(-1, 1);
  const std::vector<double> b{rng.uniform(-1, 1), rng.uniform(-1, 1)};
  const auto got = conv1x1(x, w, b);
  const auto want = oracle::conv1x1(x, w, b);
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-14);
}

TEST(Conv1x1Test, ChannelMismatch) {
  EXPECT_THROW(conv1x1(FeatureMap(3, 2, 2), Matrix(2, 4), std::vector<double>(2)), ShapeError);
  EXPECT_THROW(conv1x1(FeatureMap(4, 2, 2), Matrix(2, 4), std::vector<double>(3)), ShapeError);
}

TEST(Conv1x1Test, IsLinearWithZeroBias) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_map(3, 3, 3, rng);
    const auto y = oracle::random_map(3, 3, 3, rng);
    Matrix w(2, 3);
    for (double& v : w.data()) v = rng.uniform(-2, 2);
    const std::vector<double> zero(2, 0.0);
    const double alpha = rng.uniform(-3, 3);
    const double beta = rng.uniform(-3, 3);
    const auto lhs = conv1x1(elementwise_add(scale(x, alpha), scale(y, beta)), w, zero);
    const auto rhs = elementwise_add(scale(conv1x1(x, w, zero), alpha), scale(conv1x1(y, w, zero), beta));
    for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
  }
}

TEST(Conv1x1Test, BackwardMatchesFiniteDifferences) {
  Rng rng(19);
  const auto x = oracle::random_map(3, 2, 3, rng);
  Matrix w(2, 3);
  for (double& v : w.data()) v = rng.uniform(-1, 1);
  const std::vector<double> b{0.3, -0.2};
  const auto r = oracle::random_map(2, 2, 3, rng);
  auto loss = [&](const FeatureMap& in) {
    const auto out = conv1x1(in, w, b);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += r[i] * out[i];
    return s;
  };
  const auto grad = conv1x1_backward(r, x, w);
  const auto numeric = finite_diff_gradient(loss, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(grad.input[i], numeric[i], 1e-8);
  // Weight gradient by direct summation.
  for (std::size_t o = 0; o < 2; ++o) {
    double gb = 0.0;
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t c = 0; c < 3; ++c) gb += r(o, h, c);
    }
    EXPECT_NEAR(grad.bias[o], gb, 1e-14);
    for (std::size_t i = 0; i < 3; ++i) {
      double gw = 0.0;
      for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t c = 0; c < 3; ++c) gw += r(o, h, c) * x(i, h, c);
      }
      EXPECT_NEAR(grad.weights(o, i), gw, 1e-14);
    }
  }
}

TEST(SigmoidTest, KnownValues) {
  const auto half = sigmoid(FeatureMap(2, 2, 2, 0.0));
  for (double v : half.data()) EXPECT_EQ(v, 0.5);
  const auto big = sigmoid(FeatureMap(1, 1, 1, 1000.0));
  EXPECT_FALSE(std::isnan(big[0]));
  EXPECT_NEAR(big[0], 1.0, 1e-15);
  const auto small = sigmoid(FeatureMap(1, 1, 1, -1000.0));
  EXPECT_FALSE(std::isnan(small[0]));
  EXPECT_GE(small[0], 0.0);
  EXPECT_NEAR(sigmoid(FeatureMap(1, 1, 1, std::log(3.0)))[0], 0.75, 1e-15);
}

TEST(SigmoidTest, OutputsInUnitIntervalAndMatchFormula) {
  Rng rng(23);
  const auto x = oracle::random_map(2, 4, 4, rng, -30, 30);
  const auto s = sigmoid(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GT(s[i], 0.0);
    EXPECT_LT(s[i], 1.0);
    EXPECT_NEAR(s[i], oracle::logistic(x[i]), 1e-15);
  }
}

TEST(FiniteDiffTest, SumGivesOnes) {
  Rng rng(5);
  const auto x = oracle::random_map(2, 3, 2, rng);
  const auto g = finite_diff_gradient([](const FeatureMap& m) { return sum(m); }, x, 1e-5);
  for (double v : g.data()) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(FiniteDiffTest, SquaresGiveTwoAtOnes) {
  const auto x = FeatureMap::ones(1, 2, 3);
  const auto g = finite_diff_gradient(
      [](const FeatureMap& m) {
        double s = 0.0;
        for (double v : m.data()) s += v * v;
        return s;
      },
      x, 1e-5);
  for (double v : g.data()) EXPECT_NEAR(v, 2.0, 1e-9);
}

TEST(FiniteDiffTest, PolynomialsMatchClosedForm) {
  // f(x) = sum_i a_i x_i^3 + b_i x_i^2 + x_0 x_i  has gradient
  // 3 a_i x_i^2 + 2 b_i x_i + x_0 (+ sum_j x_j at i = 0, counting the i = 0 term twice).
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_map(1, 2, 3, rng, -2, 2);
    const auto a = oracle::random_map(1, 2, 3, rng, -1, 1);
    const auto b = oracle::random_map(1, 2, 3, rng, -1, 1);
    auto f = [&](const FeatureMap& m) {
      double s = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) s += a[i] * m[i] * m[i] * m[i] + b[i] * m[i] * m[i] + m[0] * m[i];
      return s;
    };
    const auto g = finite_diff_gradient(f, x, 1e-5);
    double sum_x = 0.0;
    for (double v : x.data()) sum_x += v;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double want = 3 * a[i] * x[i] * x[i] + 2 * b[i] * x[i] + x[0];
      if (i == 0) want += sum_x;
      EXPECT_LE(std::abs(g[i] - want), 1e-6 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(FiniteDiffTest, FocalLossMatchesAnalyticBackward) {
  Rng rng(3);
  const auto pred = oracle::random_map(1, 4, 4, rng, 0.05, 0.95);
  LabelMap target(4, 4);
  for (std::size_t i = 0; i < 16; ++i) target[i] = rng.uniform() < 0.5 ? 1 : 0;
  const auto numeric = finite_diff_gradient([&](const FeatureMap& p) { return focal_loss(p, target); }, pred, 1e-5);
  const auto analytic = focal_loss_backward(pred, target);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    EXPECT_LE(std::abs(numeric[i] - analytic[i]), 1e-5 * std::abs(analytic[i]));
  }
}

TEST(FiniteDiffTest, NonFiniteEvaluationThrows) {
  const auto x = FeatureMap::ones(1, 1, 2);
  EXPECT_THROW(finite_diff_gradient([](const FeatureMap& m) { return std::log(m[0] - 1.0); }, x, 1e-5), NumericError);
  EXPECT_THROW(finite_diff_gradient([](const FeatureMap&) { return 0.0; }, x, 0.0), ValidationError);
}
