#include "bhc/functional.hpp"
#include "bhc/random_fields.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace bhc;

Field gaussian(const Grid& g, double w, double c) {
  return rescale_mass(sample(g,
                             [&](const std::array<double, 4>& x) {
                               return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) / (2 * w * w));
                             }),
                      c);
}

class Functional : public ::testing::Test {
 protected:
  Grid grid{16, 16.0};
  ProblemConfig power = ProblemConfig::make(grid, 0.7, 2.0, 1.0, Nonlinearity::power(4.0));
  ProblemConfig expo = ProblemConfig::make(grid, 0.5, 2.0, 0.3, Nonlinearity::exp_critical(4.0, kCriticalAlpha));
  Field u = rescale_mass(random_field(grid, 123), 1.0);
};

TEST_F(Functional, EnergyHomogeneityForPower) {
  const auto sn = seminorms(u);
  const double D = 2.0 * (0.5 * sn.lap_sq + 0.5 * power.beta * sn.grad_sq - energy(power, u));
  for (double t : {0.5, 2.0}) {
    const double expect = 0.5 * t * t * (sn.lap_sq + power.beta * sn.grad_sq) - 0.5 * std::pow(t, 8.0) * D;
    EXPECT_NEAR(energy(power, t * u), expect, 1e-11 * std::abs(expect) + 1e-12);
  }
}

TEST_F(Functional, GradientMatchesDirectionalDerivative) {
  for (const auto* cfg : {&power, &expo}) {
    const Field v = cfg == &expo ? 0.3 * u : u;
    const Field d = random_field(grid, 77);
    const double h = 1e-5;
    const double fd = (energy(*cfg, v + h * d) - energy(*cfg, v - h * d)) / (2 * h);
    const double an = inner(euler_gradient(*cfg, v), d);
    EXPECT_NEAR(fd, an, 1e-7 * std::max(1.0, std::abs(an)));
  }
}

TEST_F(Functional, FiberAtZeroReproducesEnergyAndPohozaev) {
  for (const auto* cfg : {&power, &expo}) {
    const Field v = cfg == &expo ? 0.3 * u : u;
    const FiberMap f(*cfg, v, FiberEvaluation::General);
    EXPECT_NEAR(f.value(0.0), energy(*cfg, v), 1e-12 * std::abs(energy(*cfg, v)));
    EXPECT_NEAR(f.derivative(0.0), pohozaev(*cfg, v), 1e-11 * std::abs(pohozaev(*cfg, v)));
  }
}

TEST_F(Functional, PohozaevIsTheFiberDerivative) {
  for (const auto* cfg : {&power, &expo}) {
    const Field v = cfg == &expo ? 0.3 * u : u;
    const FiberMap f(*cfg, v, FiberEvaluation::General);
    for (double s : {-0.4, 0.0, 0.15}) {
      const double h = 1e-4;
      const double fd = (f.value(s + h) - f.value(s - h)) / (2 * h);
      const double p = f.derivative(s);
      EXPECT_NEAR(fd, p, 1e-6 * std::max(std::abs(p), 4.0 * std::exp(4 * s) * f.lap_sq()));
      const double fd2 = (f.derivative(s + h) - f.derivative(s - h)) / (2 * h);
      EXPECT_NEAR(fd2, f.second(s), 1e-6 * std::max(std::abs(fd2), 16.0 * std::exp(4 * s) * f.lap_sq()));
    }
  }
}

TEST_F(Functional, PohozaevMatchesResampledDilation) {
  // H(u, s) built by interpolation on a fine grid, against P(u).
  const Grid fine(24, 16.0);
  const auto cfg = ProblemConfig::make(fine, 0.7, 2.0, 1.0, Nonlinearity::power(4.0));
  const Field g = gaussian(fine, 1.4, 1.0);
  const double h = 1e-3;
  const double fd = (energy(cfg, mass_preserving_scaling(g, h)) - energy(cfg, mass_preserving_scaling(g, -h))) / (2 * h);
  EXPECT_NEAR(fd, pohozaev(cfg, g), 1e-5 * seminorms(g).lap_sq);
}

TEST_F(Functional, AutoAndGeneralFiberAgreeForPower) {
  const FiberMap a(power, u, FiberEvaluation::Auto), b(power, u, FiberEvaluation::General);
  for (double s : {-1.0, 0.3, 0.8}) {
    EXPECT_NEAR(a.value(s), b.value(s), 1e-11 * std::abs(b.value(s)) + 1e-14);
    EXPECT_NEAR(a.second(s), b.second(s), 1e-10 * std::abs(b.second(s)));
  }
}

TEST_F(Functional, FiberHasOneMaximum) {
  const auto d = fiber_maximize(power, u);
  EXPECT_FALSE(d.multimodal);
  EXPECT_EQ(d.sign_changes, 1);
  EXPECT_LT(d.curvature_at_su, 0.0);
  EXPECT_GT(d.g_at_su, 0.0);
  EXPECT_LE(std::abs(d.gprime_at_su), 1e-8 * 4.0 * std::exp(4 * d.s_u) * seminorms(u).lap_sq);
}

TEST_F(Functional, SignFlipLeavesMaximizerUnchanged) {
  const Field m = -1.0 * u;
  EXPECT_EQ(fiber_maximize(power, m).s_u, fiber_maximize(power, u).s_u);
  EXPECT_EQ(reduced_energy(power, m), reduced_energy(power, u));
}

TEST_F(Functional, ReducedEnergyInvariantAlongFiber) {
  const double I = reduced_energy(power, u);
  for (double s : {-0.6, 0.4}) {
    const FiberMap shifted(power, u, FiberEvaluation::General, s);
    EXPECT_NEAR(fiber_maximize(shifted).g_at_su, I, 1e-10 * I);
  }
}

TEST_F(Functional, ReducedEnergyInvariantUnderResampledDilation) {
  // Spreading (s < 0) only reads values inside the box, so no wrap-around enters.
  // The residual mismatch is the grid pairing of F(u) = u^4/4, half as wide as u.
  const Grid fine(32, 16.0);
  const auto cfg = ProblemConfig::make(fine, 0.7, 2.0, 1.0, Nonlinearity::power(4.0));
  const Field g = gaussian(fine, 1.2, 1.0);
  const double I = reduced_energy(cfg, g);
  EXPECT_NEAR(reduced_energy(cfg, mass_preserving_scaling(g, -0.1)), I, 2e-4 * I);
}

TEST_F(Functional, PowerMaximizerHasClosedForm) {
  // beta = 0: s_u = log(4A / ((4p+mu-8) D)) / (4p+mu-12).
  const auto cfg = ProblemConfig::make(grid, 0.0, 2.0, 1.0, Nonlinearity::power(4.0));
  const double A = seminorms(u).lap_sq;
  const Field Fu = map_values(u, [&](double v) { return cfg.nl.F(v); });
  const double D = choquard_pairing(*cfg.kernel, Fu, Fu);
  const double s = std::log(4.0 * A / (10.0 * D)) / 6.0;
  EXPECT_NEAR(fiber_maximize(cfg, u).s_u, s, 1e-10);
}

TEST_F(Functional, PsiGrowsWithExponent4pPlusMuMinus12) {
  const std::vector<double> s = {0.0, 0.5};
  const auto psi = psi_scan(power, u, s);
  ASSERT_GT(psi[0], 0.0);
  EXPECT_NEAR(std::log(psi[1] / psi[0]) / 0.5, 4.0 * 4.0 + 2.0 - 12.0, 1e-10);
  const auto pe = psi_scan(expo, 0.3 * u, {-1.0, -0.5, 0.0, 0.3});
  for (std::size_t i = 1; i < pe.size(); ++i) EXPECT_GT(pe[i], pe[i - 1]);
}

TEST_F(Functional, LagrangeMultiplierIdentities) {
  const auto lm = lagrange_multiplier(power, u);
  EXPECT_NEAR(lm.direct * mass_sq(u), inner(euler_gradient(power, u), u), 1e-10 * std::abs(lm.direct));
  // lambda_direct - lambda_pohozaev = P/(2 ||u||^2) off shell.
  EXPECT_NEAR(lm.direct - lm.pohozaev, 0.5 * pohozaev(power, u) / mass_sq(u), 1e-10 * std::abs(lm.direct));
}

TEST_F(Functional, ReducedGradientIsTheDerivativeOfI) {
  const auto rg = reduced_gradient(power, u);
  EXPECT_NEAR(inner(rg.tangent, u), 0.0, 1e-10 * std::sqrt(mass_sq(rg.full)));
  const Field d = random_field(grid, 555);
  const double h = 1e-5;
  FiberOptions opt;
  const double fd = (reduced_energy(power, u + h * d, opt, FiberEvaluation::General) -
                     reduced_energy(power, u - h * d, opt, FiberEvaluation::General)) /
                    (2 * h);
  EXPECT_NEAR(fd, inner(rg.full, d), 1e-6 * std::sqrt(mass_sq(rg.full) * mass_sq(d)));
}

TEST_F(Functional, AlphaSurfaceConsistentWithFiber) {
  const auto a = alpha_surface(power, u, {1.0, 1.3}, {0.2});
  const FiberMap f(power, u);
  EXPECT_NEAR(a[0].alpha, f.value(0.2), 1e-11 * std::abs(f.value(0.2)));
  const auto b = alpha_surface(power, u, {1.3 - 1e-5, 1.3 + 1e-5}, {0.2});
  EXPECT_NEAR((b[1].alpha - b[0].alpha) / 2e-5, a[1].dalpha_dt, 1e-6 * std::abs(a[1].dalpha_dt));
}

TEST_F(Functional, ExponentialFiberRespectsOverflowGuard) {
  const Field v = 0.3 * u;
  const FiberMap f(expo, v);
  EXPECT_TRUE(std::isfinite(f.s_overflow()));
  EXPECT_THROW(f.value(f.s_overflow() + 0.1), OverflowGuardError);
  const auto d = fiber_maximize(f);
  EXPECT_LE(d.s_hi, f.s_overflow());
  EXPECT_LT(d.s_u, d.s_hi);
}

TEST_F(Functional, LinearProblemHasNoFiberMaximum) {
  auto cfg = power;
  cfg.nonlocal = false;
  EXPECT_THROW(fiber_maximize(cfg, u), NumericalFailure);
  EXPECT_THROW(FiberMap(power, Field(grid)), std::invalid_argument);
}

TEST(ProblemConfigTest, ValidatesScalars) {
  const Grid g(8, 8.0);
  EXPECT_THROW(ProblemConfig::make(g, -1.0, 2.0, 1.0, Nonlinearity::power(4)), ConfigError);
  EXPECT_THROW(ProblemConfig::make(g, 0.0, 5.0, 1.0, Nonlinearity::power(4)), ConfigError);
  EXPECT_THROW(ProblemConfig::make(g, 0.0, 2.0, 0.0, Nonlinearity::power(4)), ConfigError);
}

}  // namespace
