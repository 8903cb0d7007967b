#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "support/random.hpp"
#include "wavedecay/decay_bounds.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Slope of ln S against ln(1 + t) over [t0, t1].
double poly_exponent(const OdeSolution& sol, double t0, double t1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    if (sol.t[k] < t0 || sol.t[k] > t1) continue;
    const double x = std::log1p(sol.t[k]);
    const double y = std::log(sol.S[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TEST(DissipationMap, ClosedFormsAndInverses) {
  const auto lin = DissipationMap::linear_pipeline(2.0, 4.0);
  EXPECT_DOUBLE_EQ(lin(1.0), 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(lin.inverse(1.0 / 8.0), 1.0);
  const auto pw = DissipationMap::power(3.0, 1.5);
  EXPECT_DOUBLE_EQ(pw(4.0), 24.0);
  EXPECT_NEAR(pw.inverse(24.0), 4.0, 1e-12);
  const auto sup = DissipationMap::superlinear(2.0);
  EXPECT_NEAR(sup(0.5), 2.0 * std::pow(0.5, 1.5) * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(sup(sup.inverse(0.01)), 0.01, 1e-10);
  const HFunction h(DampingLaw::sublinear(0.5), 1.5);
  const auto t2 = DissipationMap::nonlinear_pipeline(0.8, 10.0, h);
  for (double s : {1e-6, 1e-3, 0.5, 3.0}) {
    EXPECT_NEAR(t2(s), h.inverse(s / 10.0) / 3.2, 1e-15);
    EXPECT_NEAR(t2.inverse(t2(s)) / s, 1.0, 1e-9);
  }
  EXPECT_EQ(lin(0.0), 0.0);
  EXPECT_THROW(DissipationMap::power(1.0, 0.5), InvalidArgument);
}

TEST(SolveOde, LinearWithExponentialForcing) {
  const OdeProblem prob{DissipationMap::linear_pipeline(1.0, 1.0), GammaProfile::exponential(1.0, 2.0), 1.0};
  const auto sol = solve_ode(prob, 5.0, 0.25);
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    const double t = sol.t[k];
    const double exact = 2.0 * std::exp(-t) - std::exp(-2.0 * t);
    EXPECT_LT(rel_err(sol.S[k], exact), 1e-6) << t;
  }
  EXPECT_NEAR(sol.S[4], 0.60042, 1e-5);
  EXPECT_NEAR(sol.dense(1.0), sol.S[4], 1e-12);
}

TEST(SolveOde, LinearHomogeneous) {
  const double T = 0.75, C_T = 3.0, S0 = 2.5;
  const OdeProblem prob{DissipationMap::linear_pipeline(T, C_T), GammaProfile::zero(), S0};
  const auto sol = solve_ode(prob, 40.0, 0.5);
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    EXPECT_LT(rel_err(sol.S[k], S0 * std::exp(-sol.t[k] / (T * C_T))), 1e-6);
  }
}

TEST(SolveOde, ThreeHalvesPowerUnforced) {
  const OdeProblem prob{DissipationMap::power(1.0, 1.5), GammaProfile::zero(), 1.0};
  const auto sol = solve_ode_at(prob, {0.0, 1.0, 4.0, 100.0});
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    EXPECT_LT(rel_err(sol.S[k], std::pow(1.0 + sol.t[k] / 2.0, -2.0)), 1e-6);
  }
  EXPECT_NEAR(sol.S[2], 1.0 / 9.0, 1e-7);
}

TEST(SolveOde, RejectsNegativeInitialValue) {
  const OdeProblem prob{DissipationMap::linear(1.0), GammaProfile::zero(), -1.0};
  EXPECT_THROW(solve_ode(prob, 1.0, 0.1), InvalidArgument);
}

TEST(Envelope, ReferenceValues) {
  const OdeProblem prob{DissipationMap::linear_pipeline(1.0, 1.0), GammaProfile::zero(), 1.0};
  const auto sol = solve_ode(prob, 5.0, 0.01);
  const auto B = envelope(sol.dense, GammaProfile::zero(), 1.0, 5.0, {2.0, 3.0});
  EXPECT_NEAR(B.B[0], 4.0, 1e-6);
  EXPECT_NEAR(B.B[1], 4.0 * std::exp(-1.0), 1e-6);

  const OdeProblem null{DissipationMap::linear(1.0), GammaProfile::zero(), 0.0};
  const auto zero = solve_ode(null, 3.0, 0.1);
  for (double b : envelope(zero.dense, GammaProfile::zero(), 1.0, 3.0, {1.0, 2.0, 3.0}).B) {
    EXPECT_EQ(b, 0.0);
  }

  const double c = 0.3, T = 0.5;
  const OdeProblem cst{DissipationMap::linear(1.0), GammaProfile::constant(c), 1.0};
  const auto sc = solve_ode(cst, 4.0, 0.01);
  for (double factor : {1.0, 2.0}) {
    const auto Bc = envelope(sc.dense, GammaProfile::constant(c), T, 4.0, {1.0, 3.0}, factor);
    for (std::size_t k = 0; k < 2; ++k) {
      const double want = 4.0 * std::exp(T) * (sc.dense(Bc.t[k] - T) + factor * c * T);
      EXPECT_NEAR(Bc.B[k], want, 1e-9 * want);
    }
  }
  EXPECT_THROW(envelope(sol.dense, GammaProfile::zero(), 6.0, 5.0, {6.0}), InvalidArgument);
}

TEST(Envelope, UnforcedEnvelopeIsNonincreasing) {
  const OdeProblem prob{DissipationMap::power(2.0, 2.0), GammaProfile::zero(), 3.0};
  const auto sol = solve_ode(prob, 50.0, 0.1);
  const auto B = envelope(sol.dense, GammaProfile::zero(), 1.0, 50.0, numerics::linspace(1.0, 50.0, 400));
  for (std::size_t k = 1; k < B.B.size(); ++k) EXPECT_LE(B.B[k], B.B[k - 1]);
}

TEST(DiscreteIteration, ReferenceValues) {
  auto half = [](double x) { return 0.5 * x; };
  const auto w = discrete_iteration(1.0, half, std::vector<double>(10, 0.0), 10);
  ASSERT_EQ(w.size(), 11u);
  for (std::size_t m = 0; m < w.size(); ++m) EXPECT_DOUBLE_EQ(w[m], std::pow(2.0, -double(m)));

  const auto fixed = discrete_iteration(5.0, half, std::vector<double>(80, 0.7), 80);
  EXPECT_NEAR(fixed.back(), 0.7, 1e-12);

  const auto quad = discrete_iteration(0.5, [](double s) { return s * s / 4.0; }, {0.0}, 1);
  EXPECT_DOUBLE_EQ(quad[1], 0.4375);
}

TEST(DiscreteIteration, RejectsNonMonotoneComplement) {
  // I - l decreases once l' > 1.
  EXPECT_THROW(discrete_iteration(3.0, [](double s) { return s * s; }, {0.0}, 1),
               InvalidArgument);
  EXPECT_THROW(discrete_iteration(1.0, [](double s) { return s + 1.0; }, {0.0}, 1),
               InvalidArgument);
}

TEST(DominanceCheck, ReferenceValues) {
  const std::vector<double> t{0.0, 1.0, 2.0};
  const std::vector<double> S{1.0, 0.5, 0.25};
  const auto same = dominance_check(t, S, S);
  EXPECT_TRUE(same.pass);
  EXPECT_EQ(same.max_violation, 0.0);
  const auto low = dominance_check(t, S, {0.9, 0.4, 0.15});
  EXPECT_FALSE(low.pass);
  EXPECT_NEAR(low.max_violation, 0.1, 1e-12);
}

TEST(InversePsi, LinearAndPowerClosedForms) {
  const InversePsi lin(DissipationMap::linear(1.0), 2.0, 50.0);
  for (double x : {1e-6, 0.01, 1.0, 2.0}) EXPECT_NEAR(lin.psi(x), std::log(2.0 / x), 1e-9);
  for (double tau : {0.0, 0.3, 5.0, 40.0}) {
    EXPECT_NEAR(lin.inverse(tau) / (2.0 * std::exp(-tau)), 1.0, 1e-8);
  }
  const InversePsi pw(DissipationMap::power(1.0, 1.5), 1.0, 1e4);
  for (double tau : {0.5, 4.0, 100.0, 5000.0}) {
    EXPECT_NEAR(pw.inverse(tau) / std::pow(1.0 + tau / 2.0, -2.0), 1.0, 1e-8) << tau;
  }
}

TEST(Classify, UnforcedLinearIsExponential) {
  const double C = 0.4;
  const auto cl = classify(DissipationMap::linear(C), GammaProfile::zero(), 2.0);
  EXPECT_EQ(cl.tag, DecayCase::unforced);
  ASSERT_TRUE(cl.prediction.valid);
  EXPECT_EQ(cl.prediction.model, DecayModel::exponential);
  EXPECT_NEAR(cl.prediction.parameter, C, 1e-6);
  for (double t : {0.0, 1.0, 10.0, 50.0}) {
    EXPECT_NEAR(cl.bound(t) / (2.0 * std::exp(-C * t)), 1.0, 1e-7);
  }
}

TEST(Classify, LinearWithFasterExponentialForcing) {
  ClassifyOptions opts;
  opts.horizon = 60.0;
  const auto cl = classify(DissipationMap::linear(2.0), GammaProfile::exponential(1.0, 1.0), 1.0, opts);
  ASSERT_NE(cl.tag, DecayCase::unclassified) << cl.admissibility.diagnostics;
  ASSERT_TRUE(cl.prediction.valid);
  EXPECT_EQ(cl.prediction.model, DecayModel::exponential);
  EXPECT_NEAR(cl.prediction.parameter, 1.0, 0.02);
}

TEST(Classify, ThreeHalvesPowerWithQuadraticForcingIsFourThirds) {
  ClassifyOptions opts;
  opts.horizon = 1e4;
  const auto cl = classify(DissipationMap::power(1.0, 1.5), GammaProfile::power_law(1.0, 2.0), 1.0, opts);
  ASSERT_NE(cl.tag, DecayCase::unclassified) << cl.admissibility.diagnostics;
  EXPECT_TRUE(cl.admissibility.kappa_ok);
  EXPECT_TRUE(cl.admissibility.initial_ok);
  ASSERT_TRUE(cl.prediction.valid);
  EXPECT_EQ(cl.prediction.model, DecayModel::polynomial);
  EXPECT_NEAR(cl.prediction.parameter, 4.0 / 3.0, 0.1 * 4.0 / 3.0);
}

TEST(Classify, MixedSignForcingIsUnclassified) {
  const GammaProfile bumpy([](double t) { return t < 1.0 ? 0.0 : 1.0 / (t * t); },
                           GammaProfile::Kind::custom, "late");
  const auto cl = classify(DissipationMap::linear(1.0), bumpy, 1.0);
  EXPECT_EQ(cl.tag, DecayCase::unclassified);
  EXPECT_FALSE(cl.admissibility.diagnostics.empty());
}

TEST(HomogeneityConstant, PowerMapsGiveInverseCoefficient) {
  EXPECT_NEAR(homogeneity_constant(DissipationMap::power(2.0, 1.5), 10.0), 0.5, 1e-9);
  EXPECT_NEAR(homogeneity_constant(DissipationMap::linear(4.0), 10.0), 0.25, 1e-9);
}

TEST(LinearRateTable, ReferenceValues) {
  const auto fast = linear_rate_table(2.0, {GammaForm::Kind::exponential, 1.0, 1.0}, 1.0, 1.0, 50.0);
  EXPECT_EQ(fast.model, DecayModel::exponential);
  EXPECT_DOUBLE_EQ(fast.parameter, 1.0);

  const auto tie = linear_rate_table(1.0, {GammaForm::Kind::exponential, 1.0, 1.0}, 1.0, 1.0, 50.0);
  EXPECT_DOUBLE_EQ(tie.parameter, 1.0);
  EXPECT_NEAR(tie.shape(3.0), 4.0 * std::exp(-3.0), 1e-15);

  const auto slow = linear_rate_table(0.5, {GammaForm::Kind::exponential, 1.0, 1.0}, 1.0, 1.0, 50.0);
  EXPECT_DOUBLE_EQ(slow.parameter, 0.5);

  const auto poly = linear_rate_table(1.0, {GammaForm::Kind::polynomial, 1.0, 2.0}, 1.0, 1.0, 400.0);
  EXPECT_EQ(poly.model, DecayModel::polynomial);
  EXPECT_DOUBLE_EQ(poly.parameter, 2.0);

  EXPECT_THROW(linear_rate_table(1.0, {GammaForm::Kind::polynomial, 1.0, 1.0}, 1.0, 1.0, 50.0),
               InvalidArgument);
}

TEST(LinearRateTableProperty, EnvelopeDominatesIntegratedSolution) {
  testing::Gen gen(5);
  for (int trial = 0; trial < 12; ++trial) {
    const double C = gen.log_uniform(0.1, 3.0);
    const bool expo = trial % 2 == 0;
    const GammaForm form{expo ? GammaForm::Kind::exponential : GammaForm::Kind::polynomial,
                         gen.log_uniform(0.1, 5.0), expo ? gen.log_uniform(0.1, 3.0)
                                                         : gen.uniform(1.2, 4.0)};
    const double T = 1.0, E0 = gen.uniform(0.0, 3.0), H = 60.0;
    const auto env = linear_rate_table(C, form, T, E0, H);
    const GammaProfile gamma = expo ? GammaProfile::exponential(form.M, form.theta)
                                    : GammaProfile::power_law(form.M, form.theta);
    const auto sol = solve_ode(OdeProblem{DissipationMap::linear(C), gamma, E0}, H, 0.05);
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
      if (sol.t[k] < T) continue;
      EXPECT_GE(env(sol.t[k]) * (1.0 + 1e-6), sol.S[k]) << trial << " t=" << sol.t[k];
    }
  }
}

TEST(OdeProperty, ComparisonPrincipleInForcingAndDissipation) {
  testing::Gen gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const double gamma_exp = gen.uniform(1.0, 2.5);
    const double C = gen.log_uniform(0.2, 2.0);
    const double M = gen.log_uniform(0.1, 2.0);
    const double S0 = gen.uniform(0.1, 2.0);
    const auto times = numerics::linspace(0.0, 30.0, 61);
    auto solve = [&](double c, double m) {
      return solve_ode_at({DissipationMap::power(c, gamma_exp), GammaProfile::power_law(m, 2.0), S0},
                          times).S;
    };
    const auto base = solve(C, M);
    const auto more_force = solve(C, 1.5 * M);
    const auto more_damping = solve(1.5 * C, M);
    for (std::size_t k = 0; k < times.size(); ++k) {
      EXPECT_GE(more_force[k], base[k] * (1.0 - 1e-7));
      EXPECT_LE(more_damping[k], base[k] * (1.0 + 1e-7));
    }
  }
}

TEST(OdeProperty, UnforcedSolutionsDecreaseStrictly) {
  for (const auto& p : {DissipationMap::linear(0.5), DissipationMap::power(1.0, 1.5),
                        DissipationMap::superlinear(1.0)}) {
    const auto sol = solve_ode({p, GammaProfile::zero(), 1.0}, 100.0, 0.5);
    for (std::size_t k = 1; k < sol.S.size(); ++k) {
      EXPECT_LT(sol.S[k], sol.S[k - 1]) << p.label() << " t=" << sol.t[k];
      EXPECT_GT(sol.S[k], 0.0);
    }
  }
}

TEST(OdeProperty, OdeDominatesDiscreteIteration) {
  testing::Gen gen(23);
  for (int trial = 0; trial < 10; ++trial) {
    const double T = gen.uniform(0.5, 2.0);
    const double C = gen.uniform(0.05, 0.9) / T;  // keeps T p(x) below x
    const auto p = DissipationMap::linear(C);
    const auto gamma = GammaProfile::power_law(gen.log_uniform(0.01, 1.0), gen.uniform(1.1, 3.0));
    const double S0 = gen.uniform(0.0, 2.0);
    const std::size_t steps = 40;
    std::vector<double> delta(steps);
    for (std::size_t m = 0; m < steps; ++m) delta[m] = window_integral(gamma, m * T, T);
    const auto W = discrete_iteration(S0, [&](double x) { return T * p(x); }, delta, steps);
    std::vector<double> times;
    for (std::size_t m = 0; m <= steps; ++m) times.push_back(m * T);
    const auto sol = solve_ode_at({p, gamma, S0}, times);
    for (std::size_t m = 0; m <= steps; ++m) {
      EXPECT_GE(sol.S[m], W[m] - 1e-9 * (1.0 + S0)) << trial << " m=" << m;
    }
  }
}

TEST(ClassifyProperty, ClassifiedBoundsDominateTheSolution) {
  testing::Gen gen(31);
  int classified = 0;
  for (int trial = 0; trial < 16; ++trial) {
    const double gamma_exp = gen.uniform(1.0, 2.0);
    const auto p = DissipationMap::power(gen.log_uniform(0.3, 3.0), gamma_exp);
    const auto gamma = trial % 2 == 0 ? GammaProfile::power_law(gen.log_uniform(0.1, 2.0), gen.uniform(1.5, 4.0))
                                      : GammaProfile::exponential(gen.log_uniform(0.1, 2.0), gen.uniform(0.05, 1.0));
    const double S0 = gen.uniform(0.1, 3.0);
    ClassifyOptions opts;
    opts.horizon = 200.0;
    const auto cl = classify(p, gamma, S0, opts);
    if (cl.tag == DecayCase::unclassified) continue;
    ++classified;
    const auto sol = solve_ode({p, gamma, S0}, opts.horizon, 0.25);
    std::vector<double> y;
    for (double t : sol.t) y.push_back(cl.bound(t));
    const auto dom = dominance_check(sol.t, sol.S, y);
    EXPECT_TRUE(dom.pass) << "trial " << trial << " violation " << dom.max_violation << " at "
                          << dom.location;
  }
  EXPECT_GE(classified, 8);
}

TEST(DecayRates, SuperlinearMapGivesInverseLogDecay) {
  const OdeProblem prob{DissipationMap::superlinear(1.0), GammaProfile::power_law(1.0, 2.0), 1.0};
  const auto sol = solve_ode_at(prob, numerics::logspace(2.0, 4.0, 101));
  std::vector<double> scaled;
  for (std::size_t k = 0; k < sol.t.size(); ++k) scaled.push_back(sol.S[k] * std::log(sol.t[k]));
  auto sorted = scaled;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (double v : scaled) {
    EXPECT_GE(v, 0.2 * median);
    EXPECT_LE(v, 5.0 * median);
  }
}

TEST(DecayRates, SublinearExponentsFollowTheta) {
  // p(s) = s^{(1+r0)/(2 r0)} with r0 = 1/2.
  const auto p = DissipationMap::power(1.0, 1.5);
  const auto moderate = solve_ode({p, GammaProfile::power_law(1.0, 2.0), 1.0}, 1e4, 1.0);
  EXPECT_NEAR(poly_exponent(moderate, 1e3, 1e4), 4.0 / 3.0, 0.1 * 4.0 / 3.0);
  const auto saturated = solve_ode({p, GammaProfile::power_law(1.0, 5.0), 1.0}, 1e4, 1.0);
  EXPECT_NEAR(poly_exponent(saturated, 1e3, 1e4), 2.0, 0.2);
}

}  // namespace
}  // namespace wavedecay
