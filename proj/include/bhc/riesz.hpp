#pragma once
// Free-space Riesz potential (I_mu * g)(x) = int g(y) |x - y|^{-mu} dy on a
// sampled field, by zero padding to (2N)^4 and FFT convolution.
//
// The discrete kernel is K(d) = |h d|^{-mu} for d != 0 plus a singular
// correction near d = 0. Two corrections are available:
//   CellAverage      K(0) is the exact cell average of |x|^{-mu}; error O(h^{4-mu}).
//   LatticeCorrected K(0) and the 8 axis neighbours carry the lattice-sum
//                    weights that cancel the h^{4-mu} and h^{6-mu} terms of the
//                    punctured trapezoid rule; error O(h^{8-mu}).
// Padding to exactly 2N per axis holds every displacement in [-(N-1), N-1],
// so there is no wrap-around.

#include "bhc/fft.hpp"
#include "bhc/grid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace bhc {

// (1/h^4) int_{[-h/2,h/2]^4} |x|^{-mu} dx.
//
// The unit cube splits into eight pyramids with apex at the origin; in each
// the radial factor integrates in closed form, leaving the smooth integral
// 4/(4-mu) * int_{[-1/2,1/2]^3} (1/4 + |y|^2)^{-mu/2} dy.
inline double riesz_origin_cell_average(double mu, double h) {
  if (!(mu > 0.0 && mu < 4.0)) throw std::invalid_argument("riesz: mu must lie in (0,4)");
  using boost::math::quadrature::gauss_kronrod;
  constexpr double tol = 1e-13;
  auto inner = [&](double y1, double y2) {
    const double a = 0.25 + y1 * y1 + y2 * y2;
    return gauss_kronrod<double, 31>::integrate(
        [&](double y3) { return std::pow(a + y3 * y3, -0.5 * mu); }, 0.0, 0.5, 8, tol);
  };
  auto middle = [&](double y1) {
    return gauss_kronrod<double, 31>::integrate([&](double y2) { return inner(y1, y2); }, 0.0, 0.5, 8, tol);
  };
  const double octant = gauss_kronrod<double, 31>::integrate(middle, 0.0, 0.5, 8, tol);
  return std::pow(h, -mu) * 4.0 / (4.0 - mu) * 8.0 * octant;
}

// Analytically continued lattice sum Z(a) = sum_{d in Z^4, d != 0} |d|^{-a}.
// Jacobi's four-square theorem gives Z(a) = 8 (1 - 4^{1-s}) zeta(s) zeta(s-1), s = a/2.
inline double lattice_zeta4(double a) {
  const double s = 0.5 * a;
  const double e = s - 1.0;
  const double ln4 = std::log(4.0);
  // (1 - 4^{-e}) zeta(1 + e) is regular at e = 0 with value ln 4.
  const double q = std::abs(e) < 1e-9 ? ln4 : -std::expm1(-e * ln4) * boost::math::zeta(s);
  return 8.0 * q * boost::math::zeta(s - 1.0);
}

enum class SingularRule { CellAverage, LatticeCorrected };

class RieszKernel {
 public:
  RieszKernel(const Grid& grid, double mu, SingularRule rule = SingularRule::LatticeCorrected)
      : grid_(grid), mu_(mu), rule_(rule), padded_(2 * grid.n()) {
    if (!(mu > 0.0 && mu < 4.0))
      throw std::invalid_argument("RieszKernel: mu must lie in (0,4), got " + std::to_string(mu));
    const double hmu = std::pow(grid.spacing(), -mu);
    if (rule == SingularRule::CellAverage) {
      origin_ = riesz_origin_cell_average(mu, grid.spacing());
    } else {
      origin_ = hmu * (lattice_zeta4(mu - 2.0) - lattice_zeta4(mu));
      neighbour_extra_ = -hmu * lattice_zeta4(mu - 2.0) / 8.0;
    }
    auto& fft = fft_workspace(padded_);
    double* r = fft.real_data();
    const int m = padded_;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < m; ++i0)
      for (int i1 = 0; i1 < m; ++i1)
        for (int i2 = 0; i2 < m; ++i2)
          for (int i3 = 0; i3 < m; ++i3)
            r[idx++] = sample(signed_wavenumber(i0, m), signed_wavenumber(i1, m), signed_wavenumber(i2, m),
                              signed_wavenumber(i3, m));
    fft.forward();
    // Even kernel: the spectrum is real up to roundoff.
    spectrum_.resize(fft.complex_size());
    const auto* s = fft.spectrum();
    for (std::size_t i = 0; i < spectrum_.size(); ++i) spectrum_[i] = s[i].real();
  }

  const Grid& grid() const { return grid_; }
  double mu() const { return mu_; }
  SingularRule rule() const { return rule_; }
  int padded_n() const { return padded_; }
  double origin_value() const { return origin_; }

  // Discrete kernel at integer displacement d (grid units).
  double sample(int d0, int d1, int d2, int d3) const {
    const long r2 = long(d0) * d0 + long(d1) * d1 + long(d2) * d2 + long(d3) * d3;
    if (r2 == 0) return origin_;
    const double h = grid_.spacing();
    const double v = std::pow(h * h * static_cast<double>(r2), -0.5 * mu_);
    return r2 == 1 ? v + neighbour_extra_ : v;
  }

  // Real padded spectrum K^ (half-spectrum layout of the (2N)^4 transform).
  const std::vector<double>& spectrum() const { return spectrum_; }

 private:
  Grid grid_;
  double mu_;
  SingularRule rule_;
  int padded_;
  double origin_ = 0.0;
  double neighbour_extra_ = 0.0;
  std::vector<double> spectrum_;
};

// Shared kernel per (N, L, mu, rule); rebuilt only if no caller still holds it.
inline std::shared_ptr<const RieszKernel> riesz_kernel(const Grid& grid, double mu,
                                                       SingularRule rule = SingularRule::LatticeCorrected) {
  static std::mutex mtx;
  static std::map<std::tuple<int, double, double, int>, std::weak_ptr<const RieszKernel>> cache;
  std::lock_guard lock(mtx);
  auto key = std::make_tuple(grid.n(), grid.length(), mu, static_cast<int>(rule));
  if (auto it = cache.find(key); it != cache.end())
    if (auto sp = it->second.lock()) return sp;
  auto sp = std::make_shared<const RieszKernel>(grid, mu, rule);
  cache[key] = sp;
  return sp;
}

namespace detail {

// Zero-pads g into the workspace real buffer and transforms it.
inline void padded_forward(RealFft4& fft, const Field& g) {
  const int n = g.grid().n();
  const int m = fft.n();
  double* r = fft.real_data();
  std::fill(r, r + fft.real_size(), 0.0);
  const std::size_t mm = static_cast<std::size_t>(m);
  std::size_t src = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        double* row = r + ((i0 * mm + i1) * mm + i2) * mm;
        for (int i3 = 0; i3 < n; ++i3) row[i3] = g[src++];
      }
  fft.forward();
}

inline void check_kernel_grid(const RieszKernel& k, const Field& g) {
  if (!(k.grid() == g.grid())) throw std::invalid_argument("riesz: field grid differs from kernel grid");
}

}  // namespace detail

// I_mu * g sampled on g's grid.
inline Field convolve(const RieszKernel& kernel, const Field& g) {
  detail::check_kernel_grid(kernel, g);
  const Grid& grid = g.grid();
  const int n = grid.n();
  const int m = kernel.padded_n();
  auto& fft = fft_workspace(m);
  detail::padded_forward(fft, g);
  auto* s = fft.spectrum();
  const auto& kh = kernel.spectrum();
  const double scale = grid.cell_volume() / static_cast<double>(fft.real_size());
  for (std::size_t i = 0; i < kh.size(); ++i) s[i] *= kh[i] * scale;
  fft.inverse();
  Field out(grid);
  const std::size_t mm = static_cast<std::size_t>(m);
  const double* r = fft.real_data();
  std::size_t dst = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        const double* row = r + ((i0 * mm + i1) * mm + i2) * mm;
        for (int i3 = 0; i3 < n; ++i3) out[dst++] = row[i3];
      }
  return out;
}

// Padded half spectrum of a field, reusable across several pairings.
using PaddedSpectrum = std::vector<std::complex<double>>;

inline PaddedSpectrum padded_spectrum(const RieszKernel& kernel, const Field& g) {
  detail::check_kernel_grid(kernel, g);
  auto& fft = fft_workspace(kernel.padded_n());
  detail::padded_forward(fft, g);
  return PaddedSpectrum(fft.spectrum(), fft.spectrum() + fft.complex_size());
}

namespace detail {

template <class Term>
double spectral_sum(const RieszKernel& kernel, Term&& term) {
  const int m = kernel.padded_n();
  const auto& kh = kernel.spectrum();
  const int nh = m / 2 + 1;
  double acc = 0.0;
  std::size_t i = 0;
  for (std::size_t outer = 0; outer < kh.size() / nh; ++outer)
    for (int k3 = 0; k3 < nh; ++k3, ++i) acc += half_spectrum_weight(k3, m) * kh[i] * term(i);
  const double vol = kernel.grid().cell_volume();
  const double mm = static_cast<double>(m);
  return acc * vol * vol / (mm * mm * mm * mm);
}

}  // namespace detail

// int (I_mu * g) h dx from two padded spectra; exactly symmetric in (g, h).
inline double spectral_pairing(const RieszKernel& kernel, const PaddedSpectrum& g, const PaddedSpectrum& h) {
  if (g.size() != kernel.spectrum().size() || h.size() != kernel.spectrum().size())
    throw std::invalid_argument("spectral_pairing: spectrum size mismatch");
  if (&g == &h) return detail::spectral_sum(kernel, [&](std::size_t i) { return std::norm(g[i]); });
  return detail::spectral_sum(kernel, [&](std::size_t i) { return (g[i] * std::conj(h[i])).real(); });
}

// int (I_mu * g) h dx.
inline double choquard_pairing(const RieszKernel& kernel, const Field& g, const Field& h) {
  detail::check_kernel_grid(kernel, g);
  detail::check_kernel_grid(kernel, h);
  const bool same = (&g == &h) || std::equal(g.values().begin(), g.values().end(), h.values().begin());
  if (same) {
    auto& fft = fft_workspace(kernel.padded_n());
    detail::padded_forward(fft, g);
    const auto* s = fft.spectrum();
    return detail::spectral_sum(kernel, [&](std::size_t i) { return std::norm(s[i]); });
  }
  const auto gs = padded_spectrum(kernel, g);
  auto& fft = fft_workspace(kernel.padded_n());
  detail::padded_forward(fft, h);
  const auto* hs = fft.spectrum();
  return detail::spectral_sum(kernel, [&](std::size_t i) { return (gs[i] * std::conj(hs[i])).real(); });
}

// O(N^8) reference with the same discrete kernel.
inline Field direct_convolve(const RieszKernel& kernel, const Field& g) {
  detail::check_kernel_grid(kernel, g);
  const Grid& grid = g.grid();
  const int n = grid.n();
  if (n > 10) throw std::invalid_argument("direct_convolve: grid too large (N <= 10 required)");
  Field out(grid);
  const double vol = grid.cell_volume();
  std::size_t i = 0;
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2)
        for (int a3 = 0; a3 < n; ++a3, ++i) {
          double acc = 0.0;
          std::size_t j = 0;
          for (int b0 = 0; b0 < n; ++b0)
            for (int b1 = 0; b1 < n; ++b1)
              for (int b2 = 0; b2 < n; ++b2)
                for (int b3 = 0; b3 < n; ++b3, ++j)
                  if (g[j] != 0.0) acc += kernel.sample(a0 - b0, a1 - b1, a2 - b2, a3 - b3) * g[j];
          out[i] = acc * vol;
        }
  return out;
}

}  // namespace bhc
