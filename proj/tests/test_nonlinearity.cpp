#include "bhc/nonlinearity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace bhc;

struct PrimitiveCase {
  double p;
  double t;
  double F;  // int_0^t s^{p-1} e^{32 pi^2 s^2} ds, 40-digit quadrature
};

class ExpPrimitive : public ::testing::TestWithParam<PrimitiveCase> {};

TEST_P(ExpPrimitive, MatchesHighPrecisionQuadrature) {
  const auto c = GetParam();
  const auto nl = Nonlinearity::exp_critical(c.p, kCriticalAlpha);
  EXPECT_NEAR(nl.F(c.t), c.F, 1e-12 * c.F);
  EXPECT_NEAR(nl.F(-c.t), c.F, 1e-12 * c.F);
}

INSTANTIATE_TEST_SUITE_P(Oracle, ExpPrimitive,
                         ::testing::Values(PrimitiveCase{4, 0.05, 2.6894856180303733155e-6},
                                           PrimitiveCase{4, 0.2, 17.875111387235832992},
                                           PrimitiveCase{4, 0.35, 11984976195419.242864},
                                           PrimitiveCase{4, 0.5, 7.6285605286917023296e+30},
                                           PrimitiveCase{4, 0.8, 6.1273402383335579894e+84},
                                           PrimitiveCase{5, 0.05, 1.1135187917418810618e-7},
                                           PrimitiveCase{5, 0.2, 3.4404414535780815725},
                                           PrimitiveCase{5, 0.35, 4141278656275.1361505},
                                           PrimitiveCase{5, 0.5, 3.7902839737261672501e+30},
                                           PrimitiveCase{5, 0.8, 4.889776986195875796e+84}));

TEST(Nonlinearity, PowerClosedForms) {
  const auto nl = Nonlinearity::power(4.0);
  EXPECT_DOUBLE_EQ(nl.f(2.0), 8.0);
  EXPECT_DOUBLE_EQ(nl.f(-2.0), -8.0);
  EXPECT_DOUBLE_EQ(nl.F(2.0), 4.0);
  EXPECT_DOUBLE_EQ(nl.fprime(2.0), 12.0);
  EXPECT_DOUBLE_EQ(nl.F(0.0), 0.0);
  EXPECT_TRUE(nl.is_homogeneous());
  EXPECT_FALSE(std::isfinite(nl.amplitude_limit()));
}

TEST(Nonlinearity, DerivativesMatchFiniteDifferences) {
  for (const auto& nl : {Nonlinearity::power(3.5), Nonlinearity::exp_critical(4.0, kCriticalAlpha),
                         Nonlinearity::exp_critical(4.5, 100.0)}) {
    for (double t : {0.03, 0.11, 0.27, -0.19}) {
      const double h = 1e-6 * std::abs(t);
      EXPECT_NEAR((nl.F(t + h) - nl.F(t - h)) / (2 * h), nl.f(t), 1e-7 * std::abs(nl.f(t))) << nl.to_string();
      EXPECT_NEAR((nl.f(t + h) - nl.f(t - h)) / (2 * h), nl.fprime(t), 1e-7 * std::abs(nl.fprime(t)))
          << nl.to_string();
    }
  }
}

TEST(Nonlinearity, PrimitiveContinuousAcrossSeriesSwitch) {
  // The series branch hands over to the closed form at alpha0 t^2 = 30.
  const auto nl = Nonlinearity::exp_critical(4.0, kCriticalAlpha);
  const double t = std::sqrt(30.0 / kCriticalAlpha);
  EXPECT_NEAR(nl.F(t * (1 - 1e-12)), nl.F(t * (1 + 1e-12)), 1e-9 * nl.F(t));
  EXPECT_NEAR(nl.F(t), nl.F_quadrature(t), 1e-10 * nl.F(t));
}

TEST(Nonlinearity, ParityAndFbar) {
  const auto nl = Nonlinearity::exp_critical(4.0, kCriticalAlpha);
  for (double t : {0.01, 0.1, 0.4}) {
    EXPECT_EQ(nl.f(-t), -nl.f(t));
    EXPECT_EQ(nl.F(-t), nl.F(t));
    EXPECT_DOUBLE_EQ(nl.Fbar(t, 2.0), nl.f(t) * t - 1.5 * nl.F(t));
  }
}

TEST(Nonlinearity, OverflowGuard) {
  const auto nl = Nonlinearity::exp_critical(4.0, kCriticalAlpha);
  EXPECT_NEAR(kCriticalAlpha * nl.amplitude_limit() * nl.amplitude_limit(), kExponentBudget, 1e-9);
  EXPECT_NO_THROW(nl.check_amplitude(0.99 * nl.amplitude_limit()));
  try {
    nl.check_amplitude(1.5);
    FAIL() << "expected OverflowGuardError";
  } catch (const OverflowGuardError& e) {
    EXPECT_DOUBLE_EQ(e.amplitude(), 1.5);
    EXPECT_DOUBLE_EQ(e.limit(), nl.amplitude_limit());
  }
}

TEST(Nonlinearity, ParseRoundTrip) {
  const auto a = Nonlinearity::parse("power:p=4");
  EXPECT_EQ(a.kind(), NlKind::PurePower);
  EXPECT_EQ(a.to_string(), "power:p=4");
  const auto b = Nonlinearity::parse("expcrit:p=4");
  EXPECT_DOUBLE_EQ(b.alpha0(), kCriticalAlpha);
  const auto c = Nonlinearity::parse(b.to_string());
  EXPECT_EQ(c.alpha0(), b.alpha0());
  EXPECT_EQ(c.p(), b.p());
}

TEST(Nonlinearity, ParseErrors) {
  for (const char* bad : {"power", "power:p=", "power:p=2", "power:p=4,alpha0=1", "expcrit:p=4,alpha0=-1",
                          "cubic:p=3", "power:q=4", "power:p=4x"})
    EXPECT_THROW(Nonlinearity::parse(bad), ConfigError) << bad;
}

TEST(Conditions, ExponentialCriticalFamily) {
  const auto nl = Nonlinearity::exp_critical(4.0, kCriticalAlpha);
  ConditionParams cp;
  const auto rep = check_conditions(nl, cp);
  EXPECT_TRUE(rep.admissible);
  EXPECT_TRUE(rep.all_passed());
  for (const char* name : {"f1", "f2", "f3", "f4", "f5", "f6", "f7"}) EXPECT_TRUE(rep.passed(name)) << name;
}

TEST(Conditions, VarrhoAboveTheSampledRatioFailsF5) {
  // f(t) e^{-32 pi^2 t^2} = t^3 stays below 1 on the representable range.
  ConditionParams cp;
  cp.varrho = 1.0;
  const auto rep = check_conditions(Nonlinearity::exp_critical(4.0, kCriticalAlpha), cp);
  EXPECT_FALSE(rep.passed("f5"));
  EXPECT_TRUE(rep.passed("f6"));
}

TEST(Conditions, PowerHasNoExponentialGrowth) {
  const auto rep = check_conditions(Nonlinearity::power(4.0), ConditionParams{});
  EXPECT_FALSE(rep.passed("f2"));
  EXPECT_TRUE(rep.passed("f3"));
  const auto* f2 = rep.find("f2");
  ASSERT_NE(f2, nullptr);
  EXPECT_TRUE(f2->witness_t.has_value());
}

TEST(Conditions, ThetaTooLargeViolatesAmbrosettiRabinowitz) {
  ConditionParams cp;
  cp.theta = 5.0;  // F(t) p-homogeneous with p = 4: 5 F > t f
  const auto rep = check_conditions(Nonlinearity::power(4.0), cp);
  EXPECT_FALSE(rep.passed("f3"));
}

TEST(Conditions, InadmissibleExponents) {
  ConditionParams cp;
  cp.theta = 2.0;
  const auto rep = check_conditions(Nonlinearity::power(4.0), cp);
  EXPECT_FALSE(rep.admissible);
  EXPECT_FALSE(rep.admissibility_detail.empty());
  EXPECT_THROW(check_conditions(Nonlinearity::power(4.0), cp, SampleSpec{1.0, 0.5, 10, 4}), ConfigError);
}

}  // namespace
