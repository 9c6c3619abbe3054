#pragma once
// Periodic 4-D sampled fields on [-L/2, L/2)^4 with Fourier-multiplier
// differential operators.
//
// Sample j on an axis sits at x_j = -L/2 + j*h, h = L/N, so the origin is
// sample N/2. Transforms follow fft.hpp: forward unnormalized, inverse
// divided by N^4. The Nyquist mode enters |xi|^2 and |xi|^4 with its full
// frequency; the first-derivative symbol vanishes there.

#include "bhc/fft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhc {

class Grid {
 public:
  Grid() = default;
  Grid(int n_per_axis, double box_length) : n_(n_per_axis), length_(box_length) {
    if (n_ < 2 || n_ % 2 != 0)
      throw std::invalid_argument("Grid: points per axis must be even and >= 2, got " + std::to_string(n_));
    if (!(length_ > 0.0) || !std::isfinite(length_))
      throw std::invalid_argument("Grid: box length must be positive");
  }

  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  double cell_volume() const { return std::pow(spacing(), 4); }
  std::size_t size() const {
    const auto nn = static_cast<std::size_t>(n_);
    return nn * nn * nn * nn;
  }
  double coord(int j) const { return -0.5 * length_ + j * spacing(); }
  // Angular frequency 2*pi*k/L of axis index k (k = N/2 gives -pi*N/L).
  double frequency(int k) const { return 2.0 * std::numbers::pi * signed_wavenumber(k, n_) / length_; }

  std::size_t index(int i0, int i1, int i2, int i3) const {
    const auto nn = static_cast<std::size_t>(n_);
    return ((static_cast<std::size_t>(i0) * nn + i1) * nn + i2) * nn + i3;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_ = 2;
  double length_ = 1.0;
};

class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid) : grid_(grid), data_(grid.size(), 0.0) {}
  Field(const Grid& grid, std::vector<double> samples) : grid_(grid), data_(std::move(samples)) {
    if (data_.size() != grid_.size()) throw std::invalid_argument("Field: sample count must equal N^4");
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Field& operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
  }
  // this += a * o
  Field& axpy(double a, const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

 private:
  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("Field: grids differ");
  }

  Grid grid_;
  std::vector<double> data_;
};

// Samples fn(x) on the grid.
template <class Fn>
Field sample(const Grid& grid, Fn&& fn) {
  Field u(grid);
  const int n = grid.n();
  std::size_t idx = 0;
  std::array<double, 4> x{};
  for (int i0 = 0; i0 < n; ++i0) {
    x[0] = grid.coord(i0);
    for (int i1 = 0; i1 < n; ++i1) {
      x[1] = grid.coord(i1);
      for (int i2 = 0; i2 < n; ++i2) {
        x[2] = grid.coord(i2);
        for (int i3 = 0; i3 < n; ++i3) {
          x[3] = grid.coord(i3);
          u[idx++] = fn(x);
        }
      }
    }
  }
  return u;
}

// Pointwise map v_i = fn(u_i).
template <class Fn>
Field map_values(const Field& u, Fn&& fn) {
  Field v(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = fn(u[i]);
  return v;
}

// <u, v>_2 = h^4 sum u v
inline double inner(const Field& u, const Field& v) {
  if (!(u.grid() == v.grid())) throw std::invalid_argument("inner: grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * u.grid().cell_volume();
}

// ||u||_2^2
inline double mass_sq(const Field& u) { return inner(u, u); }

inline double lp_norm(const Field& u, double p) {
  double s = 0.0;
  for (double v : u.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

namespace detail {

// |xi|^2 per axis index.
inline std::vector<double> axis_xi_sq(const Grid& g) {
  std::vector<double> t(static_cast<std::size_t>(g.n()));
  for (int k = 0; k < g.n(); ++k) t[k] = g.frequency(k) * g.frequency(k);
  return t;
}

inline void load_real(RealFft4& fft, const Field& u) {
  std::copy(u.values().begin(), u.values().end(), fft.real_data());
}

// Calls fn(spectral index, |xi|^2, Parseval weight) over the half spectrum.
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int n = g.n();
  const int nh = n / 2 + 1;
  const auto xi2 = axis_xi_sq(g);
  std::size_t idx = 0;
  for (int k0 = 0; k0 < n; ++k0)
    for (int k1 = 0; k1 < n; ++k1) {
      const double s01 = xi2[k0] + xi2[k1];
      for (int k2 = 0; k2 < n; ++k2) {
        const double s012 = s01 + xi2[k2];
        for (int k3 = 0; k3 < nh; ++k3) fn(idx++, s012 + xi2[k3], half_spectrum_weight(k3, n));
      }
    }
}

}  // namespace detail

// ||u||_2^2 evaluated from the spectrum (Parseval).
inline double spectral_mass_sq(const Field& u) {
  const Grid& g = u.grid();
  auto& fft = fft_workspace(g.n());
  detail::load_real(fft, u);
  fft.forward();
  const auto* s = fft.spectrum();
  double acc = 0.0;
  detail::for_each_mode(g, [&](std::size_t i, double, double w) { acc += w * std::norm(s[i]); });
  return acc * g.cell_volume() / static_cast<double>(g.size());
}

struct Seminorms {
  double lap_sq = 0.0;   // ||Delta u||_2^2
  double grad_sq = 0.0;  // ||grad u||_2^2
};

inline Seminorms seminorms(const Field& u) {
  const Grid& g = u.grid();
  auto& fft = fft_workspace(g.n());
  detail::load_real(fft, u);
  fft.forward();
  const auto* s = fft.spectrum();
  double a = 0.0, b = 0.0;
  detail::for_each_mode(g, [&](std::size_t i, double k2, double w) {
    const double p = w * std::norm(s[i]);
    a += k2 * k2 * p;
    b += k2 * p;
  });
  const double scale = g.cell_volume() / static_cast<double>(g.size());
  return {a * scale, b * scale};
}

enum class OperatorKind { Laplacian, Bilaplacian, BiharmonicPlusBeta };

struct OperatorSymbol {
  OperatorKind kind = OperatorKind::Laplacian;
  double beta = 0.0;

  static OperatorSymbol laplacian() { return {OperatorKind::Laplacian, 0.0}; }
  static OperatorSymbol bilaplacian() { return {OperatorKind::Bilaplacian, 0.0}; }
  static OperatorSymbol biharmonic_plus_beta(double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("biharmonic_plus_beta: beta must be >= 0");
    return {OperatorKind::BiharmonicPlusBeta, beta};
  }

  double operator()(double xi_sq) const {
    switch (kind) {
      case OperatorKind::Laplacian: return -xi_sq;
      case OperatorKind::Bilaplacian: return xi_sq * xi_sq;
      case OperatorKind::BiharmonicPlusBeta: return xi_sq * xi_sq + beta * xi_sq;
    }
    return 0.0;
  }
};

// Applies a radial Fourier multiplier m(|xi|^2).
template <class Multiplier>
Field apply_multiplier(const Field& u, Multiplier&& m) {
  const Grid& g = u.grid();
  auto& fft = fft_workspace(g.n());
  detail::load_real(fft, u);
  fft.forward();
  auto* s = fft.spectrum();
  const double inv = 1.0 / static_cast<double>(g.size());
  detail::for_each_mode(g, [&](std::size_t i, double k2, double) { s[i] *= m(k2) * inv; });
  fft.inverse();
  return Field(g, std::vector<double>(fft.real_data(), fft.real_data() + g.size()));
}

inline Field apply_operator(const Field& u, const OperatorSymbol& symbol) {
  return apply_multiplier(u, [&](double k2) { return symbol(k2); });
}

// du/dx_axis with the odd-symbol convention (Nyquist coefficient zeroed).
inline Field partial_derivative(const Field& u, int axis) {
  if (axis < 0 || axis > 3) throw std::invalid_argument("partial_derivative: axis must be 0..3");
  const Grid& g = u.grid();
  const int n = g.n();
  const int nh = n / 2 + 1;
  auto& fft = fft_workspace(n);
  detail::load_real(fft, u);
  fft.forward();
  auto* s = fft.spectrum();
  const double inv = 1.0 / static_cast<double>(g.size());
  std::size_t idx = 0;
  int k[4];
  for (k[0] = 0; k[0] < n; ++k[0])
    for (k[1] = 0; k[1] < n; ++k[1])
      for (k[2] = 0; k[2] < n; ++k[2])
        for (k[3] = 0; k[3] < nh; ++k[3]) {
          const int ka = k[axis];
          const double xi = (ka == n / 2) ? 0.0 : g.frequency(ka);
          s[idx] *= std::complex<double>(0.0, xi * inv);
          ++idx;
        }
  fft.inverse();
  return Field(g, std::vector<double>(fft.real_data(), fft.real_data() + g.size()));
}

// Returns (c / ||u||_2) u.
inline Field rescale_mass(const Field& u, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("rescale_mass: target mass must be positive");
  const double m = std::sqrt(mass_sq(u));
  if (!(m > 0.0)) throw std::invalid_argument("rescale_mass: zero field cannot be rescaled");
  return (c / m) * u;
}

// Radius containing all but `tail` of the L^2 mass, measured from the origin.
inline double support_radius(const Field& u, double tail = 1e-8) {
  const Grid& g = u.grid();
  const int n = g.n();
  std::vector<std::pair<double, double>> rm;
  rm.reserve(u.size());
  std::size_t idx = 0;
  double total = 0.0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int i3 = 0; i3 < n; ++i3, ++idx) {
          const double r2 = g.coord(i0) * g.coord(i0) + g.coord(i1) * g.coord(i1) + g.coord(i2) * g.coord(i2) +
                            g.coord(i3) * g.coord(i3);
          const double w = u[idx] * u[idx];
          total += w;
          if (w > 0.0) rm.emplace_back(r2, w);
        }
  if (total == 0.0) return 0.0;
  std::sort(rm.begin(), rm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double outside = 0.0;
  for (const auto& [r2, w] : rm) {
    outside += w;
    if (outside > tail * total) return std::sqrt(r2);
  }
  return 0.0;
}

namespace detail {

// Trigonometric cardinal function of an even-N periodic grid with the
// Nyquist term split symmetrically: (1/N)[1 + 2 sum_{k<N/2} cos k t + cos(N t / 2)].
inline double periodic_cardinal(double theta, int n) {
  double s = 1.0;
  for (int k = 1; k < n / 2; ++k) s += 2.0 * std::cos(k * theta);
  s += std::cos(0.5 * n * theta);
  return s / n;
}

// out = T applied along `axis` of an n^4 array.
inline void apply_along_axis(const std::vector<double>& t, int n, int axis, const double* in, double* out) {
  const std::size_t nn = static_cast<std::size_t>(n);
  std::size_t stride = 1;
  for (int a = 3; a > axis; --a) stride *= nn;
  const std::size_t outer = nn * nn * nn * nn / (stride * nn);
  std::vector<double> line(nn);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t inner_i = 0; inner_i < stride; ++inner_i) {
      const std::size_t base = o * stride * nn + inner_i;
      for (std::size_t m = 0; m < nn; ++m) line[m] = in[base + m * stride];
      for (std::size_t j = 0; j < nn; ++j) {
        const double* row = &t[j * nn];
        double acc = 0.0;
        for (std::size_t m = 0; m < nn; ++m) acc += row[m] * line[m];
        out[base + j * stride] = acc;
      }
    }
}

}  // namespace detail

// x -> u(e^s x) by separable trigonometric interpolation. Multiply by e^{2s}
// to obtain the mass-preserving scaling H(u, s).
inline Field dilate(const Field& u, double s, std::vector<std::string>* warnings = nullptr) {
  const Grid& g = u.grid();
  const int n = g.n();
  if (s == 0.0) return u;
  const double scale = std::exp(s);
  if (warnings) {
    const double r = support_radius(u);
    if (r / scale > 0.45 * g.length())
      warnings->push_back("dilate: dilated support radius " + std::to_string(r / scale) +
                          " exceeds 0.45 L; periodic wrap-around contaminates the result");
  }
  const std::size_t nn = static_cast<std::size_t>(n);
  std::vector<double> t(nn * nn);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m) {
      const double theta = 2.0 * std::numbers::pi * (scale * g.coord(j) - g.coord(m)) / g.length();
      t[j * nn + m] = detail::periodic_cardinal(theta, n);
    }
  std::vector<double> a(u.values().begin(), u.values().end()), b(u.size());
  for (int axis = 0; axis < 4; ++axis) {
    detail::apply_along_axis(t, n, axis, a.data(), b.data());
    a.swap(b);
  }
  return Field(g, std::move(a));
}

// e^{2s} u(e^s x)
inline Field mass_preserving_scaling(const Field& u, double s, std::vector<std::string>* warnings = nullptr) {
  return std::exp(2.0 * s) * dilate(u, s, warnings);
}

}  // namespace bhc
