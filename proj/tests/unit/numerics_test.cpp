#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "wavedecay/numerics.hpp"

namespace wavedecay::numerics {
namespace {

TEST(GaussLegendre, IntegratesPolynomialsOfDegreeNineteenExactly) {
  // x^19 on [0, 2]: 2^20 / 20.
  const double got = gauss_legendre([](double x) { return std::pow(x, 19); }, 0.0, 2.0);
  EXPECT_NEAR(got / (std::pow(2.0, 20) / 20.0), 1.0, 1e-13);
}

TEST(Integrate, MatchesClosedFormAntiderivatives) {
  EXPECT_NEAR(integrate([](double t) { return std::exp(-2.0 * t); }, 0.0, 1.0),
              (1.0 - std::exp(-2.0)) / 2.0, 1e-12);
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0,
              1e-12);
  // Integrable endpoint singularity: 1/sqrt(x) on (0, 1].
  EXPECT_NEAR(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10), 2.0,
              1e-7);
}

TEST(Integrate, ReversedLimitsFlipSign) {
  auto f = [](double x) { return x * x; };
  EXPECT_NEAR(integrate(f, 1.0, 0.0), -1.0 / 3.0, 1e-14);
  EXPECT_EQ(integrate(f, 0.5, 0.5), 0.0);
}

TEST(BisectIncreasing, FindsCubeRoot) {
  const double x = bisect_increasing([](double x) { return x * x * x; }, 2.0, 0.0, 2.0);
  EXPECT_NEAR(x, std::cbrt(2.0), 1e-14);
}

TEST(GoldenMaximize, FindsPeakOfConcaveFunction) {
  const auto m = golden_maximize([](double y) { return 3.0 * y - y * y; }, 0.0, 10.0);
  EXPECT_NEAR(m.arg, 1.5, 1e-6);
  EXPECT_NEAR(m.value, 2.25, 1e-12);
}

TEST(Spacing, LinspaceAndLogspaceHitEndpoints) {
  const auto a = linspace(0.0, 1.0, 5);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_DOUBLE_EQ(a[1], 0.25);
  EXPECT_DOUBLE_EQ(a.back(), 1.0);
  const auto b = logspace(-2.0, 2.0, 5);
  EXPECT_NEAR(b.front(), 0.01, 1e-17);
  EXPECT_NEAR(b[2], 1.0, 1e-15);
  EXPECT_NEAR(b.back(), 100.0, 1e-12);
}

TEST(InterpLinear, InterpolatesAndClamps) {
  const std::vector<double> xs{0.0, 1.0, 3.0};
  const std::vector<double> ys{1.0, 3.0, 7.0};
  EXPECT_DOUBLE_EQ(interp_linear(xs, ys, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(interp_linear(xs, ys, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(interp_linear(xs, ys, -1.0), 1.0);
  EXPECT_DOUBLE_EQ(interp_linear(xs, ys, 10.0), 7.0);
}

}  // namespace
}  // namespace wavedecay::numerics
