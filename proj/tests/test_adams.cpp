#include "bhc/adams.hpp"
#include "bhc/riesz.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace bhc;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Canonical-cutoff moments and norms from 30-digit mpmath quadrature.
constexpr double kM1 = 0.057846829520544003;
constexpr double kM2 = 0.86584429251009917;
constexpr double kM3Literal = -7.4153780652566233;
constexpr double kM3Laplacian = 28.946206115005633;

struct NormCase {
  int n;
  double l2, grad, lap;
};

class AdamsNormOracle : public ::testing::TestWithParam<NormCase> {};

TEST_P(AdamsNormOracle, QuadratureMatchesHighPrecision) {
  const auto c = GetParam();
  const auto a = adams_norms(c.n);
  EXPECT_LE(rel(a.quadrature.l2, c.l2), 1e-12);
  EXPECT_LE(rel(a.quadrature.grad, c.grad), 1e-12);
  EXPECT_LE(rel(a.quadrature.lap, c.lap), 1e-12);
}

TEST_P(AdamsNormOracle, L2AndGradientClosedFormsAreExact) {
  const auto a = adams_norms(GetParam().n);
  EXPECT_LE(rel(a.closed.l2, a.quadrature.l2), 1e-12);
  EXPECT_LE(rel(a.closed.grad, a.quadrature.grad), 1e-12);
}

TEST_P(AdamsNormOracle, LaplacianClosedFormHoldsWithTheLaplacianMoment) {
  const auto a = adams_norms(GetParam().n);
  EXPECT_LE(rel(a.lap_closed_laplacian, a.quadrature.lap), 1e-12);
  // The literal moment does not reproduce the norm; the mismatch is large.
  EXPECT_GT(rel(a.closed.lap, a.quadrature.lap), 0.1);
}

TEST_P(AdamsNormOracle, C1MatchingAtInnerRadius) {
  const auto a = adams_norms(GetParam().n);
  EXPECT_LE(rel(a.inner_value, a.outer_value), 1e-12);
  EXPECT_LE(std::abs(a.inner_slope - a.outer_slope), 1e-12 * std::abs(a.inner_slope));
}

INSTANTIATE_TEST_SUITE_P(Oracle, AdamsNormOracle,
                         ::testing::Values(NormCase{10, 0.0096722974922524281, 0.14793274777579406, 4.5770888788485297},
                                           NormCase{100, 0.0048367825615044575, 0.074145520361682119,
                                                    2.7885444394242648},
                                           NormCase{10000, 0.0024183913384904371, 0.037073664870533674,
                                                    1.8942722197121324}));

TEST(Adams, CanonicalMoments) {
  const auto m = cutoff_moments(CutoffSpec::canonical());
  EXPECT_LE(rel(m.M1, kM1), 1e-12);
  EXPECT_LE(rel(m.M2, kM2), 1e-12);
  EXPECT_LE(rel(m.M3, kM3Literal), 1e-12);
  EXPECT_LE(rel(m.M3_laplacian, kM3Laplacian), 1e-12);
  EXPECT_GT(m.M1, 0.0);
  EXPECT_GT(m.M2, 0.0);
}

TEST(Adams, UnitCutoffFirstMomentAntiderivative) {
  // int_1^2 r^3 log^2 r dr = [r^4 log^2 r / 4 - r^4 log r / 8 + r^4 / 32]_1^2.
  const double l = std::log(2.0);
  const double exact = 4.0 * l * l - 2.0 * l + 16.0 / 32.0 - 1.0 / 32.0;
  EXPECT_NEAR(cutoff_moments(CutoffSpec::unit()).M1, exact, 1e-14);
}

TEST(Adams, CutoffIsSmoothAndMonotone) {
  const auto c = CutoffSpec::canonical();
  EXPECT_EQ(c.eval(1.0).phi, 1.0);
  EXPECT_EQ(c.eval(2.0).phi, 0.0);
  EXPECT_NEAR(c.eval(1.5).phi, 0.5, 1e-15);
  double prev = 1.0;
  for (double t = 1.01; t < 2.0; t += 0.01) {
    const auto v = c.eval(t);
    EXPECT_LE(v.phi, prev);
    prev = v.phi;
    const double h = 1e-6;
    EXPECT_NEAR((c.eval(t + h).phi - c.eval(t - h).phi) / (2 * h), v.dphi, 1e-6 * std::max(1.0, std::abs(v.dphi)));
    EXPECT_NEAR((c.eval(t + h).dphi - c.eval(t - h).dphi) / (2 * h), v.d2phi, 1e-5 * std::max(1.0, std::abs(v.d2phi)));
  }
}

TEST(Adams, CMuAtTwo) { EXPECT_NEAR(c_mu(2.0), std::pow(kPi, 4) / 30.0, 1e-12); }

TEST(Adams, RejectsBadInput) {
  EXPECT_THROW(AdamsProfile(1), ConfigError);
  EXPECT_THROW(c_mu(4.0), ConfigError);
  EXPECT_THROW(normalized_adams(Grid(8, 4.0), 10, 1.0), ConfigError);
}

TEST(Adams, NormalizedProfileOnGrid) {
  const Grid g(16, 8.0);
  const Field u = normalized_adams(g, 4, 1.3);
  EXPECT_NEAR(mass_sq(u), 1.69, 1e-12);
  EXPECT_GT(u[g.index(8, 8, 8, 8)], 0.0);
  EXPECT_EQ(u[g.index(0, 8, 8, 8)], 0.0);
}

class RadialChoquard : public ::testing::TestWithParam<double> {};

TEST_P(RadialChoquard, MatchesGridPairing) {
  // The radial evaluator of int (I_mu * F(v)) F(v) against the FFT pairing on a grid.
  const double mu = GetParam();
  const auto nl = Nonlinearity::power(4.0);
  const MountainFunction mf(0.0, mu, 1.0, nl, 2);
  const Grid g(40, 8.0);
  const auto k = riesz_kernel(g, mu);
  const Field u = normalized_adams(g, 2, 1.0);
  const Field Fu = map_values(u, [&](double v) { return nl.F(v); });
  EXPECT_LE(rel(mf.choquard(1.0), choquard_pairing(*k, Fu, Fu)), 1e-3);
  release_fft_workspaces();
}

TEST_P(RadialChoquard, StableUnderPanelRefinement) {
  const auto nl = Nonlinearity::power(4.0);
  const double mu = GetParam();
  const MountainFunction coarse(0.0, mu, 1.0, nl, 100, 1), fine(0.0, mu, 1.0, nl, 100, 2);
  EXPECT_LE(rel(coarse.choquard(1.0), fine.choquard(1.0)), 1e-5);
}

TEST(RadialChoquardLimit, GeneralKernelApproachesSeparableCase) {
  const auto nl = Nonlinearity::power(4.0);
  const MountainFunction exact(0.0, 2.0, 1.0, nl, 10), near(0.0, 2.0 - 1e-6, 1.0, nl, 10);
  EXPECT_LE(rel(near.choquard(1.0), exact.choquard(1.0)), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Mu, RadialChoquard, ::testing::Values(1.0, 2.0, 3.0));

TEST(Mountain, PowerScanHasSingleInteriorMaximum) {
  const auto r = mountain_scan(0.0, 2.0, 1.0, Nonlinearity::power(4.0), 10);
  EXPECT_TRUE(r.interior);
  EXPECT_EQ(r.slope_sign_changes, 1);
  EXPECT_DOUBLE_EQ(r.bound, 0.375);
  EXPECT_GT(r.gmax, 0.0);
  // g_n = t^2 A/2 - t^{2p + mu/2 - 4} D(omega)/2: the maximizer solves A t^2 = (2p+mu/2-4)/2 t^{2p+mu/2-4} D.
  const MountainFunction mf(0.0, 2.0, 1.0, Nonlinearity::power(4.0), 10);
  const double D1 = mf.choquard(1.0), q = 8.0 + 1.0 - 4.0;
  const double t_exact = std::pow(2.0 * mf.lap_sq() / (q * D1), 1.0 / (q - 2.0));
  EXPECT_NEAR(r.t_n, t_exact, 1e-6 * t_exact);
}

TEST(Mountain, ExponentialScanStaysBelowGuard) {
  const auto nl = Nonlinearity::exp_critical(4.0, kCriticalAlpha);
  const auto r = mountain_scan(0.0, 2.0, 1.0, nl, 100);
  EXPECT_LT(r.t_n, r.t_guard);
  EXPECT_TRUE(r.interior);
  EXPECT_TRUE(std::isfinite(r.gmax));
  EXPECT_THROW(mountain_scan(0.0, 2.0, 1.0, nl, 100, {0.5 * r.t_guard, 2.0 * r.t_guard}), OverflowGuardError);
  EXPECT_THROW(mountain_scan(0.0, 2.0, 1.0, nl, 100, {-1.0}), ConfigError);
}

TEST(Mountain, FiniteNLevelDecreasesWithN) {
  // Recorded trend for the exponential critical family (mu = 2, c = 1).
  const auto nl = Nonlinearity::exp_critical(4.0, kCriticalAlpha);
  const double g2 = mountain_scan(0.0, 2.0, 1.0, nl, 100).gmax;
  const double g3 = mountain_scan(0.0, 2.0, 1.0, nl, 1000).gmax;
  EXPECT_LT(g3, g2);
}

}  // namespace
