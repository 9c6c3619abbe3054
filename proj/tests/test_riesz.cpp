#include "bhc/random_fields.hpp"
#include "bhc/riesz.hpp"
#include "bhc/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace bhc;

double max_rel(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

class RieszByMu : public ::testing::TestWithParam<double> {};

TEST_P(RieszByMu, FastMatchesDirectSum) {
  const double mu = GetParam();
  for (int n : {6, 8}) {
    const Grid g(n, 6.0);
    for (auto rule : {SingularRule::LatticeCorrected, SingularRule::CellAverage}) {
      RieszKernel k(g, mu, rule);
      const Field u = random_field(g, field_seed(21, n), RandomFieldSpec{1, 3, 0.7, 1.4, 1.0, false});
      EXPECT_LE(max_rel(convolve(k, u), direct_convolve(k, u)), 1e-10) << "n=" << n;
    }
  }
}

TEST_P(RieszByMu, PairingIsSymmetricAndMatchesConvolution) {
  const double mu = GetParam();
  const Grid g(8, 8.0);
  const auto k = riesz_kernel(g, mu);
  const Field a = random_field(g, 1), b = random_field(g, 2);
  const double ab = choquard_pairing(*k, a, b), ba = choquard_pairing(*k, b, a);
  EXPECT_NEAR(ab, ba, 1e-13 * std::abs(ab));
  EXPECT_NEAR(ab, inner(convolve(*k, a), b), 1e-11 * std::abs(ab));
}

TEST_P(RieszByMu, LinearAndAmplitudeHomogeneous) {
  const double mu = GetParam();
  const Grid g(8, 8.0);
  const auto k = riesz_kernel(g, mu);
  const Field a = random_field(g, 3), b = random_field(g, 4);
  Field sum = a;
  sum.axpy(-2.5, b);
  Field expect = convolve(*k, a);
  expect.axpy(-2.5, convolve(*k, b));
  EXPECT_LE(max_rel(convolve(*k, sum), expect), 1e-12);
  EXPECT_NEAR(choquard_pairing(*k, 3.0 * a, 3.0 * a), 9.0 * choquard_pairing(*k, a, a),
              1e-12 * std::abs(choquard_pairing(*k, a, a)) * 9.0);
}

TEST_P(RieszByMu, PotentialOfPositiveFieldIsPositive) {
  const double mu = GetParam();
  const Grid g(8, 8.0);
  const auto k = riesz_kernel(g, mu);
  const Field u = random_field(g, 9, RandomFieldSpec{1, 3, 1.0, 2.0, 1.0, true});
  const Field v = convolve(*k, u);
  for (double x : v.values()) ASSERT_GT(x, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Mu, RieszByMu, ::testing::Values(1.0, 2.0, 3.0));

TEST(Riesz, SpectrumPositiveForMuTwoAndThree) {
  // Positive padded spectrum makes the pairing a positive form on the grid.
  for (double mu : {2.0, 3.0}) {
    const RieszKernel k(Grid(8, 8.0), mu);
    double lo = k.spectrum().front();
    for (double x : k.spectrum()) lo = std::min(lo, x);
    EXPECT_GT(lo, 0.0) << "mu=" << mu;
  }
}

TEST(Riesz, FarFieldOfPointMassDecaysLikeKernel) {
  // A single unit cell at the origin: (I_mu * delta_h)(x) = h^4 |x|^{-mu} away from the origin.
  const Grid g(8, 8.0);
  const RieszKernel k(g, 2.0);
  Field d(g);
  d[g.index(4, 4, 4, 4)] = 1.0;
  const Field v = convolve(k, d);
  const double x = g.coord(7) - g.coord(4);
  EXPECT_NEAR(v[g.index(7, 4, 4, 4)], std::pow(x, -2.0), 1e-12);
}

TEST(Riesz, GaussianOriginValueImprovesWithResolution) {
  // Independent oracle: (I_mu * e^{-|x|^2})(0) = pi^2 Gamma((4 - mu)/2).
  const double exact = gaussian_origin_exact(2.0);
  EXPECT_NEAR(exact, std::numbers::pi * std::numbers::pi, 1e-15);
  const double e16 = std::abs(gaussian_origin_value(16, 8.0, 2.0) - exact) / exact;
  const double e24 = std::abs(gaussian_origin_value(24, 8.0, 2.0) - exact) / exact;
  EXPECT_LT(e24, e16);
  EXPECT_LT(e24, 1e-3);
}

TEST(Riesz, LatticeRuleBeatsCellAverage) {
  const Grid g(16, 8.0);
  const Field u = sample(g, [](const std::array<double, 4>& x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]));
  });
  const double exact = gaussian_origin_exact(3.0);
  const std::size_t o = g.index(8, 8, 8, 8);
  const double lat = convolve(RieszKernel(g, 3.0, SingularRule::LatticeCorrected), u)[o];
  const double cell = convolve(RieszKernel(g, 3.0, SingularRule::CellAverage), u)[o];
  EXPECT_LT(std::abs(lat - exact), std::abs(cell - exact));
}

TEST(Riesz, RejectsBadInput) {
  const Grid g(8, 8.0);
  EXPECT_THROW(RieszKernel(g, 0.0), std::invalid_argument);
  EXPECT_THROW(RieszKernel(g, 4.0), std::invalid_argument);
  const RieszKernel k(g, 2.0);
  EXPECT_THROW(convolve(k, Field(Grid(8, 4.0))), std::invalid_argument);
  EXPECT_THROW(direct_convolve(RieszKernel(Grid(12, 8.0), 2.0), Field(Grid(12, 8.0))), std::invalid_argument);
}

TEST(Riesz, KernelCacheSharesInstances) {
  const Grid g(8, 8.0);
  const auto a = riesz_kernel(g, 2.0), b = riesz_kernel(g, 2.0);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_NE(a.get(), riesz_kernel(g, 1.0).get());
}

}  // namespace
