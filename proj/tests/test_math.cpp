#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "denn/error.hpp"
#include "denn/math.hpp"
#include "denn/rng.hpp"
#include "support/oracles.hpp"

using namespace denn;

TEST(CosineSim, IdenticalAndOrthogonal) {
  EXPECT_DOUBLE_EQ(cosine_sim(DenseVector{1, 0}, DenseVector{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_sim(DenseVector{1, 0}, DenseVector{0, 1}), 0.0);
}

TEST(CosineSim, FortyFiveDegrees) {
  // 1/sqrt(2) to 17 significant digits. The 8-digit rounding 0.70710678 is
  // itself 1.2e-9 away, more than the tolerance.
  EXPECT_NEAR(cosine_sim(DenseVector{1, 1}, DenseVector{1, 0}), 0.70710678118654752, 1e-9);
  EXPECT_NEAR(cosine_sim(DenseVector{1, 1}, DenseVector{1, 0}), oracle::cosine({1, 1}, {1, 0}), 1e-15);
}

TEST(CosineSim, ZeroNormIsAnError) {
  try {
    cosine_sim(DenseVector{0, 0}, DenseVector{1, 0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
  EXPECT_THROW(cosine_sim(DenseVector{1, 0}, DenseVector{0, 0}), Error);
}

TEST(CosineSim, LengthMismatch) {
  try {
    cosine_sim(DenseVector{1, 0}, DenseVector{1, 0, 0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(CosineSim, SymmetricScaleInvariantAndBounded) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    DenseVector a(n), b(n);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    const double ab = cosine_sim(a, b);
    EXPECT_EQ(ab, cosine_sim(b, a));
    EXPECT_GE(ab, -1.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(ab, oracle::cosine(a, b), 1e-12);
    const double c = rng.uniform(0.01, 100.0);
    DenseVector ca(a);
    for (auto& x : ca) x *= c;
    EXPECT_NEAR(cosine_sim(a, ca), 1.0, 1e-9);
  }
}

TEST(SoftmaxTemp, EqualScoresAreUniform) {
  for (double tau : {0.01, 0.05, 1.0, 7.0}) {
    const auto p = softmax_temp(std::vector<double>{0.3, 0.3, 0.3}, tau);
    for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  }
}

TEST(SoftmaxTemp, TwoScores) {
  const auto p = softmax_temp(std::vector<double>{0.1, 0.0}, 0.05);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.88079708, 1e-8);
  EXPECT_NEAR(p[1], 0.11920292, 1e-8);
}

TEST(SoftmaxTemp, Singleton) {
  const auto p = softmax_temp(std::vector<double>{-42.0}, 0.5);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], 1.0);
}

TEST(SoftmaxTemp, Errors) {
  EXPECT_THROW(softmax_temp(std::vector<double>{}, 1.0), Error);
  EXPECT_THROW(softmax_temp(std::vector<double>{1.0}, 0.0), Error);
  EXPECT_THROW(softmax_temp(std::vector<double>{1.0}, -1.0), Error);
}

TEST(SoftmaxTemp, ShiftInvariantNormalizedAndMatchesOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<double> s(n);
    for (auto& x : s) x = rng.uniform(-1.0, 1.0);
    const double tau = rng.uniform(0.02, 2.0);
    const auto p = softmax_temp(s, tau);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    const auto ref = oracle::softmax(s, tau);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], ref[i], 1e-12);

    const double shift = rng.uniform(-50.0, 50.0);
    std::vector<double> shifted(s);
    for (auto& x : shifted) x += shift;
    const auto q = softmax_temp(shifted, tau);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], q[i], 1e-9);
  }
}

TEST(SoftmaxTemp, LargeScoresDoNotOverflow) {
  const auto p = softmax_temp(std::vector<double>{1000.0, 999.0}, 0.01);
  EXPECT_TRUE(std::isfinite(p[0]));
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
}

TEST(Sigmoid, Basics) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_LT(sigmoid(700.0), 1.0 + 1e-15);
  EXPECT_GT(sigmoid(700.0), 0.999999);
  EXPECT_GE(sigmoid(-700.0), 0.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-700.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(700.0)));
}

TEST(Sigmoid, ComplementIdentity) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-700.0, 700.0);
    EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-12);
  }
}

TEST(LogSumExp, MatchesDirectEvaluation) {
  const std::vector<double> x{0.5, -1.25, 2.0};
  const double direct = std::log(std::exp(0.5) + std::exp(-1.25) + std::exp(2.0));
  EXPECT_NEAR(log_sum_exp(x), direct, 1e-14);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(log_sum_exp(std::vector<double>{1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
}

TEST(AllFinite, DetectsNanAndInf) {
  EXPECT_TRUE(all_finite(std::vector<double>{1.0, -2.0}));
  EXPECT_FALSE(all_finite(std::vector<double>{1.0, std::nan("")}));
  EXPECT_FALSE(all_finite(std::vector<double>{std::numeric_limits<double>::infinity()}));
}
