#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "support/random.hpp"
#include "wavedecay/damping.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

std::vector<DampingLaw> builtin_laws() {
  return {DampingLaw::linear(), DampingLaw::sublinear(0.5), DampingLaw::sublinear(0.2),
          DampingLaw::superlinear(),
          DampingLaw::from_table({0.0, 0.5, 1.0, 2.0}, {0.0, 0.2, 0.9, 2.0})};
}

/// Oracle for v + w g(v) = rhs: plain bisection on the bracket.
double bisection_oracle(const DampingLaw& law, double w, double rhs) {
  double lo = std::min(0.0, rhs);
  double hi = std::max(0.0, rhs);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid + w * law.g(mid) < rhs) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TEST(DampingLaw, LinearIsIdentity) {
  const auto law = DampingLaw::linear();
  EXPECT_EQ(law.g(2.0), 2.0);
  EXPECT_EQ(law.g(-3.5), -3.5);
  EXPECT_EQ(law.m(), 1.0);
  EXPECT_EQ(law.h0(0.3), 0.3);
}

TEST(DampingLaw, SublinearShapeAndH0) {
  const auto law = DampingLaw::sublinear(0.5);
  EXPECT_NEAR(law.g(0.25), 0.5, 1e-15);
  EXPECT_NEAR(law.g(-0.25), -0.5, 1e-15);
  EXPECT_NEAR(law.g(3.0), 3.0, 1e-15);
  EXPECT_NEAR(law.h0(0.25), 0.39685026299204984, 1e-12);
  EXPECT_NEAR(law.h0(1.0), 1.0, 1e-15);
  EXPECT_THROW(DampingLaw::sublinear(0.0), InvalidArgument);
  EXPECT_THROW(DampingLaw::sublinear(1.0), InvalidArgument);
}

TEST(DampingLaw, SuperlinearShapeAndH0Inverse) {
  const auto law = DampingLaw::superlinear();
  EXPECT_NEAR(law.g(0.5), 0.25 * std::exp(-4.0), 1e-15);
  EXPECT_NEAR(law.g(2.0), 2.0 / std::exp(1.0), 1e-15);
  EXPECT_NEAR(law.m(), std::exp(1.0), 1e-15);
  const double expected = std::pow(0.5, 1.5) * std::exp(-2.0);
  EXPECT_NEAR(law.h0_inv(0.5), expected, 1e-15);
  EXPECT_NEAR(law.h0_inv(0.5), 0.04785, 1e-5);
  EXPECT_NEAR(law.h0(expected), 0.5, 1e-12);
  // h0 far below 1 against bisection on the closed-form inverse.
  for (double y : {1e-3, 1e-40, 1e-200}) {
    const double s = numerics::bisect_increasing([&](double v) { return law.h0_inv(v); }, y,
                                                 1e-6, 1.0);
    EXPECT_NEAR(law.h0(y) / s, 1.0, 1e-9) << y;
  }
}

TEST(DampingLaw, TableRejectsBadKnots) {
  EXPECT_THROW(DampingLaw::from_table({0.0}, {0.0}), InvalidArgument);
  EXPECT_THROW(DampingLaw::from_table({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(DampingLaw::from_table({0.5, 1.0}, {0.5, 1.0}), InvalidArgument);
  EXPECT_THROW(DampingLaw::from_table({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(DampingLaw::from_table({0.0, 1.0}, {0.0, 1.0}, 1.5), InvalidArgument);
}

TEST(DampingLaw, TableInterpolatesAndExtendsOddly) {
  const auto law = DampingLaw::from_table({0.0, 0.5, 1.0, 2.0}, {0.0, 0.2, 0.9, 2.0});
  EXPECT_NEAR(law.g(0.25), 0.1, 1e-15);
  EXPECT_NEAR(law.g(-0.25), -0.1, 1e-15);
  EXPECT_NEAR(law.g(1.5), 1.45, 1e-15);
}

TEST(DampingLawProperty, MonotoneOddAndEnvelopeOnSamples) {
  for (const auto& law : builtin_laws()) {
    const auto s = numerics::linspace(-5.0, 5.0, 4001);
    for (std::size_t k = 1; k < s.size(); ++k) {
      EXPECT_LE(law.g(s[k - 1]), law.g(s[k])) << law.name() << " at " << s[k];
      EXPECT_GE(law.g(s[k]) * s[k], 0.0);
      EXPECT_NEAR(law.g(-s[k]), -law.g(s[k]), 1e-15);
    }
    const double eta = law.eta();
    for (double x : numerics::linspace(eta * 1.0001, 10.0 * eta, 500)) {
      const double ratio = law.g(x) / x;
      EXPECT_GE(ratio, 1.0 / law.m() - 1e-12) << law.name();
      EXPECT_LE(ratio, law.m() + 1e-12) << law.name();
    }
    EXPECT_GT(sampled_epsilon0(law), 0.0) << law.name();
  }
}

TEST(HFunction, ReferenceValues) {
  const HFunction lin(DampingLaw::linear(), 3.0);
  EXPECT_DOUBLE_EQ(lin(1.7), 3.4);
  EXPECT_DOUBLE_EQ(lin.inverse(3.4), 1.7);

  const HFunction sub(DampingLaw::sublinear(0.5), 1.0);
  EXPECT_NEAR(sub(1.0), 2.0, 1e-15);
  EXPECT_NEAR(sub.inverse(2.0), 1.0, 1e-12);
  EXPECT_EQ(sub(0.0), 0.0);
  EXPECT_THROW(HFunction(DampingLaw::linear(), 0.0), InvalidArgument);
}

TEST(HFunctionProperty, RoundTripAndDominatesIdentity) {
  for (const auto& law : builtin_laws()) {
    for (double mass : {0.05, 1.0, 7.5}) {
      const HFunction h(law, mass);
      double prev = 0.0;
      for (double y : numerics::logspace(-8.0, 4.0, 241)) {
        const double x = h.inverse(y);
        // Superlinear preimages of small y lie below the double range.
        if (x > 1e-290) EXPECT_NEAR(h(x) / y, 1.0, 1e-9) << law.name() << " mass " << mass << " y " << y;
        EXPECT_GE(h(y), y);
        EXPECT_GT(h(y), prev);
        prev = h(y);
      }
    }
  }
}

TEST(ImplicitDampSolve, ReferenceValues) {
  EXPECT_EQ(implicit_damp_solve(DampingLaw::superlinear(), 0.0, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(implicit_damp_solve(DampingLaw::linear(), 1.0, 2.0), 1.0);
  const double v = implicit_damp_solve(DampingLaw::sublinear(0.5), 1.0, 1.0);
  EXPECT_NEAR(v, 0.3819660112501051, 1e-12);
  EXPECT_NEAR(v, bisection_oracle(DampingLaw::sublinear(0.5), 1.0, 1.0), 1e-12);
}

TEST(ImplicitDampSolveProperty, ResidualContractionAndMonotonicity) {
  testing::Gen gen(7);
  for (const auto& law : builtin_laws()) {
    for (int trial = 0; trial < 2000; ++trial) {
      const double w = gen.log_uniform(1e-6, 10.0);
      const double r1 = gen.uniform(-3.0, 3.0);
      const double r2 = r1 + gen.uniform(0.0, 1.0);
      const double v1 = implicit_damp_solve(law, w, r1);
      const double v2 = implicit_damp_solve(law, w, r2);
      EXPECT_LE(std::abs(v1 + w * law.g(v1) - r1), 1e-12 * (1.0 + std::abs(r1)))
          << law.name() << " w=" << w << " rhs=" << r1;
      EXPECT_LE(std::abs(v1), std::abs(r1));
      EXPECT_LE(v1, v2 + 1e-15);
      EXPECT_NEAR(v1, bisection_oracle(law, w, r1), 1e-10 * (1.0 + std::abs(r1)));
    }
  }
}

}  // namespace
}  // namespace wavedecay
