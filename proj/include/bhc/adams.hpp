#pragma once
// Modified Adams functions on R^4,
//   w_n(r) = sqrt(log n / 8 pi^2) + (1 - n^2 r^2) / sqrt(32 pi^2 log n)   r <= 1/n
//          = -log r / sqrt(8 pi^2 log n)                                  1/n < r <= 1
//          = -phi(r) log r / sqrt(8 pi^2 log n)                           1 < r < 2
//          = 0                                                            r >= 2,
// their cutoff moments and norms, and the mountain scan
//   g_n(t) = t^2 A/2 + beta t B/2 - t^{mu/2 - 4} D(t omega_n)/2
// for omega_n = c w_n / ||w_n||_2, evaluated on the radial profile (a grid
// cannot resolve the 1/n core for large n).

#include "bhc/errors.hpp"
#include "bhc/grid.hpp"
#include "bhc/nonlinearity.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace bhc {

inline constexpr double kPi = std::numbers::pi;

// phi = 1 on [0,1], 0 on [2,inf). Canonical: the mollifier ratio
// q(2-t)/(q(2-t)+q(t-1)), q(x) = e^{-1/x} for x > 0. Unit (test only): 1 on [1,2].
struct CutoffSpec {
  enum class Kind { Canonical, Unit };
  Kind kind = Kind::Canonical;

  static CutoffSpec canonical() { return {Kind::Canonical}; }
  static CutoffSpec unit() { return {Kind::Unit}; }

  struct Values {
    double phi = 0.0, dphi = 0.0, d2phi = 0.0;
  };

  Values eval(double t) const {
    if (t <= 1.0) return {1.0, 0.0, 0.0};
    if (kind == Kind::Unit) return t <= 2.0 ? Values{1.0, 0.0, 0.0} : Values{};
    if (t >= 2.0) return {};
    // phi = 1/(1 + e^h), h = -1/(t-1) + 1/(2-t)
    const double a = t - 1.0, b = 2.0 - t;
    const double h = -1.0 / a + 1.0 / b;
    const double h1 = 1.0 / (a * a) + 1.0 / (b * b);
    const double h2 = -2.0 / (a * a * a) + 2.0 / (b * b * b);
    const double phi = h > 0.0 ? std::exp(-h) / (1.0 + std::exp(-h)) : 1.0 / (1.0 + std::exp(h));
    const double ch = std::cosh(0.5 * h);
    const double w = std::isfinite(ch) ? 0.25 / (ch * ch) : 0.0;  // phi (1 - phi)
    if (w == 0.0) return {phi, 0.0, 0.0};
    const double d1 = -w * h1;
    const double d2 = -d1 * (1.0 - 2.0 * phi) * h1 - w * h2;
    return {phi, d1, d2};
  }
};

namespace detail {

// Composite 20-point Gauss-Legendre on [a, b] with `panels` equal panels.
template <class Fn>
double composite_gauss(Fn&& fn, double a, double b, int panels) {
  using Q = boost::math::quadrature::gauss<double, 20>;
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) acc += Q::integrate(fn, a + i * w, a + (i + 1) * w);
  return acc;
}

}  // namespace detail

struct AdamsMoments {
  double M1 = 0.0;
  double M2 = 0.0;
  double M3 = 0.0;            // the Delta moment taken literally: unsquared, with -phi
  double M3_laplacian = 0.0;  // int_1^2 (Delta(phi log r))^2 r^3 dr, radial Laplacian
};

inline AdamsMoments cutoff_moments(const CutoffSpec& cutoff, int panels = 64) {
  AdamsMoments m;
  auto vals = [&](double r) { return cutoff.eval(r); };
  m.M1 = detail::composite_gauss(
      [&](double r) {
        const double p = vals(r).phi, l = std::log(r);
        return p * p * r * r * r * l * l;
      },
      1.0, 2.0, panels);
  m.M2 = detail::composite_gauss(
      [&](double r) {
        const auto v = vals(r);
        const double q = v.dphi * std::log(r) + v.phi / r;
        return q * q * r * r * r;
      },
      1.0, 2.0, panels);
  m.M3 = detail::composite_gauss(
      [&](double r) {
        const auto v = vals(r);
        const double l = std::log(r);
        const double q = v.d2phi * l + (-v.phi + 3.0 * v.dphi + 2.0 * r * v.dphi + 3.0 * r * v.dphi * l) / (r * r);
        return q * r * r * r;
      },
      1.0, 2.0, panels);
  m.M3_laplacian = detail::composite_gauss(
      [&](double r) {
        const auto v = vals(r);
        const double l = std::log(r);
        const double q = v.d2phi * l + (2.0 * v.phi + 2.0 * r * v.dphi + 3.0 * r * v.dphi * l) / (r * r);
        return q * q * r * r * r;
      },
      1.0, 2.0, panels);
  return m;
}

// Radial profile w_n with first and second derivatives.
class AdamsProfile {
 public:
  AdamsProfile(int n, CutoffSpec cutoff = CutoffSpec::canonical()) : n_(n), cutoff_(cutoff) {
    if (n < 2) throw ConfigError("adams: n must be >= 2, got " + std::to_string(n));
    logn_ = std::log(static_cast<double>(n));
    a_ = std::sqrt(logn_ / (8.0 * kPi * kPi));
    b_ = 1.0 / std::sqrt(32.0 * kPi * kPi * logn_);
    kappa_ = 1.0 / std::sqrt(8.0 * kPi * kPi * logn_);
  }

  int n() const { return n_; }
  double log_n() const { return logn_; }
  const CutoffSpec& cutoff() const { return cutoff_; }
  double inner_radius() const { return 1.0 / n_; }

  struct Values {
    double g = 0.0, dg = 0.0, d2g = 0.0;
  };

  // Values on the closed piece containing r; `outer` selects the right-hand
  // piece at a breakpoint.
  Values eval(double r, bool outer = false) const {
    const double rn = 1.0 / n_;
    if (r < rn || (r == rn && !outer)) {
      const double nn = static_cast<double>(n_) * n_;
      return {a_ + (1.0 - nn * r * r) * b_, -2.0 * nn * r * b_, -2.0 * nn * b_};
    }
    if (r <= 1.0) return {-std::log(r) * kappa_, -kappa_ / r, kappa_ / (r * r)};
    if (r < 2.0) {
      const auto c = cutoff_.eval(r);
      const double l = std::log(r);
      return {-kappa_ * c.phi * l, -kappa_ * (c.dphi * l + c.phi / r),
              -kappa_ * (c.d2phi * l + 2.0 * c.dphi / r - c.phi / (r * r))};
    }
    return {};
  }
  double value(double r) const { return eval(r).g; }
  double laplacian(double r) const {
    const auto v = eval(r);
    return r > 0.0 ? v.d2g + 3.0 * v.dg / r : 8.0 * (-static_cast<double>(n_) * n_ * b_);
  }

  // Integrates fn(r) r^3 over [0, 2] on panels aligned with 1/n, 1, 2.
  template <class Fn>
  double radial_integral(Fn&& fn, int panels_outer = 64) const {
    auto w = [&](double r) { return fn(r) * r * r * r; };
    const double rn = 1.0 / n_;
    double acc = detail::composite_gauss(w, 0.0, rn, 4);
    // Log-spaced panels with ratio <= 2 on [1/n, 1].
    const int k = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(n_)))));
    using Q = boost::math::quadrature::gauss<double, 20>;
    for (int i = 0; i < k; ++i) {
      const double lo = std::pow(rn, 1.0 - static_cast<double>(i) / k);
      const double hi = std::pow(rn, 1.0 - static_cast<double>(i + 1) / k);
      acc += Q::integrate(w, lo, hi);
    }
    acc += detail::composite_gauss(w, 1.0, 2.0, panels_outer);
    return acc;
  }

 private:
  int n_;
  CutoffSpec cutoff_;
  double logn_, a_, b_, kappa_;
};

struct NormTriple {
  double l2 = 0.0;    // ||w||_2^2
  double grad = 0.0;  // ||grad w||_2^2
  double lap = 0.0;   // ||Delta w||_2^2
};

struct AdamsNorms {
  int n = 0;
  AdamsMoments moments;
  NormTriple closed;              // closed forms with the literal M3
  double lap_closed_laplacian = 0.0;  // lap closed form with M3_laplacian
  NormTriple quadrature;
  // C^1 matching at r = 1/n.
  double inner_value = 0.0, outer_value = 0.0, inner_slope = 0.0, outer_slope = 0.0;
};

inline AdamsNorms adams_norms(int n, const CutoffSpec& cutoff = CutoffSpec::canonical()) {
  const AdamsProfile prof(n, cutoff);
  AdamsNorms out;
  out.n = n;
  out.moments = cutoff_moments(cutoff);
  const double L = prof.log_n();
  const double n2 = static_cast<double>(n) * n, n4 = n2 * n2;
  const auto& m = out.moments;
  out.closed.l2 = (1.0 + 32.0 * m.M1) / (128.0 * L) - 1.0 / (96.0 * n4) - 1.0 / (192.0 * n4 * L);
  out.closed.grad = (1.0 + 2.0 * m.M2) / (8.0 * L) - 1.0 / (12.0 * n2 * L);
  out.closed.lap = 1.0 + (4.0 + m.M3) / (4.0 * L);
  out.lap_closed_laplacian = 1.0 + (4.0 + m.M3_laplacian) / (4.0 * L);
  const double area = 2.0 * kPi * kPi;  // |S^3|
  out.quadrature.l2 = area * prof.radial_integral([&](double r) {
    const double g = prof.value(r);
    return g * g;
  });
  out.quadrature.grad = area * prof.radial_integral([&](double r) {
    const double d = prof.eval(r).dg;
    return d * d;
  });
  out.quadrature.lap = area * prof.radial_integral([&](double r) {
    const double d = prof.laplacian(r);
    return d * d;
  });
  const double rn = 1.0 / n;
  const auto in = prof.eval(rn, false), outv = prof.eval(rn, true);
  out.inner_value = in.g;
  out.outer_value = outv.g;
  out.inner_slope = in.dg;
  out.outer_slope = outv.dg;
  return out;
}

// omega_n = c w_n / ||w_n||_2 sampled on the grid, normalized by the grid mass.
inline Field normalized_adams(const Grid& grid, int n, double c, const CutoffSpec& cutoff = CutoffSpec::canonical()) {
  if (!(0.5 * grid.length() > 2.0))
    throw ConfigError("normalized_adams: box too small, need L > 4 to hold the support |x| <= 2 (L >= 8 recommended)");
  const AdamsProfile prof(n, cutoff);
  Field u = sample(grid, [&](const std::array<double, 4>& x) {
    return prof.value(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]));
  });
  return rescale_mass(u, c);
}

// C_mu = 24 pi^4 / ((4-mu)(5-mu)(6-mu)(7-mu)(8-mu)).
inline double c_mu(double mu) {
  if (!(mu > 0.0 && mu < 4.0)) throw ConfigError("c_mu: mu must lie in (0,4)");
  return 24.0 * std::pow(kPi, 4) / ((4.0 - mu) * (5.0 - mu) * (6.0 - mu) * (7.0 - mu) * (8.0 - mu));
}

namespace detail {

// 2F1(a, b; 2; z) by its power series, 0 <= z < 1.
inline double hyp2f1_c2(double a, double b, double z) {
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 200000; ++k) {
    term *= (a + k) * (b + k) / ((2.0 + k) * (k + 1.0)) * z;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Spherical double average of |x - y|^{-mu} over |x| = r, |y| = rho, times |S^3|^2:
// 4 pi^4 max^{-mu} 2F1(mu/2, mu/2 - 1; 2; (min/max)^2).
inline double radial_riesz_kernel(double mu, double r, double rho) {
  const double big = std::max(r, rho), small = std::min(r, rho);
  const double x = small / big;
  const double f = mu == 2.0 ? 1.0 : hyp2f1_c2(0.5 * mu, 0.5 * mu - 1.0, x * x);
  return 4.0 * std::pow(kPi, 4) * std::pow(big, -mu) * f;
}

// int_0^R K(r, rho) rho^3 drho = |S^3| int_{|y|<R} |x - y|^{-mu} dy at |x| = r <= R,
// in polar coordinates about x: 8 pi^3 int_0^pi l(theta)^{4-mu}/(4-mu) sin^2 theta dtheta,
// where l(theta) = -r cos theta + sqrt(R^2 - r^2 sin^2 theta) is the distance to the sphere.
inline double ball_riesz_potential(double mu, double r, double R) {
  auto integrand = [&](double th) {
    const double sn = std::sin(th), cs = std::cos(th);
    const double l = -r * cs + std::sqrt(std::max(0.0, R * R - r * r * sn * sn));
    return std::pow(std::max(l, 0.0), 4.0 - mu) * sn * sn;
  };
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, kPi, 12, 1e-14);
  return 8.0 * std::pow(kPi, 3) * v / (4.0 - mu);
}

// Gauss nodes on [0,2] aligned with 1/n, 1, 2.
struct RadialNodes {
  std::vector<double> r, w;
  std::vector<int> panel;
  std::vector<std::pair<double, double>> panels;
};

inline RadialNodes radial_nodes(int n, int refine) {
  RadialNodes nodes;
  std::vector<double> edges{0.0};
  const double rn = 1.0 / n;
  for (int i = 1; i <= 4 * refine; ++i) edges.push_back(rn * i / (4.0 * refine));
  const int k = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(n))))) * refine;
  for (int i = 1; i <= k; ++i) edges.push_back(std::pow(rn, 1.0 - static_cast<double>(i) / k));
  for (int i = 1; i <= 16 * refine; ++i) edges.push_back(1.0 + static_cast<double>(i) / (16.0 * refine));
  using Q = boost::math::quadrature::gauss<double, 20>;
  const auto& x = Q::abscissa();
  const auto& wt = Q::weights();
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    nodes.panels.emplace_back(a, b);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double signs[2] = {-1.0, 1.0};
      for (double sg : signs) {
        if (j == 0 && x[0] == 0.0 && sg > 0.0) continue;
        nodes.r.push_back(mid + sg * half * x[j]);
        nodes.w.push_back(half * wt[j]);
        nodes.panel.push_back(static_cast<int>(p));
      }
    }
  }
  return nodes;
}

}  // namespace detail

struct MountainOptions {
  int t_points = 256;
  double t_min_fraction = 1e-3;  // grid starts at this fraction of the upper end
  int refine = 1;                // radial panel refinement factor
  int golden_iterations = 120;
};

struct MountainResult {
  int n = 0;
  double t_n = 0.0;
  double gmax = 0.0;
  double bound = 0.0;  // (8 - mu)/16
  bool bound_ok = false;
  bool interior = false;  // maximizer strictly inside the admissible range
  double t_guard = std::numeric_limits<double>::infinity();
  int slope_sign_changes = 0;
  double lap_sq = 0.0, grad_sq = 0.0, omega0 = 0.0;
  std::vector<double> t, g;
};

// Radial evaluator of g_n(t) for omega_n.
class MountainFunction {
 public:
  MountainFunction(double beta, double mu, double c, const Nonlinearity& nl, int n, int refine = 1,
                   const CutoffSpec& cutoff = CutoffSpec::canonical())
      : beta_(beta), mu_(mu), nl_(nl), prof_(n, cutoff) {
    if (!(mu > 0.0 && mu < 4.0)) throw ConfigError("mountain: mu must lie in (0,4)");
    if (!(c > 0.0)) throw ConfigError("mountain: c must be > 0");
    const auto norms = adams_norms(n, cutoff);
    scale_ = c / std::sqrt(norms.quadrature.l2);
    lap_ = scale_ * scale_ * norms.quadrature.lap;
    grad_ = scale_ * scale_ * norms.quadrature.grad;
    nodes_ = detail::radial_nodes(n, refine);
    omega_.resize(nodes_.r.size());
    for (std::size_t i = 0; i < omega_.size(); ++i) omega_[i] = scale_ * prof_.value(nodes_.r[i]);
    omega0_ = scale_ * prof_.value(0.0);
    if (mu != 2.0) {
      const std::size_t m = nodes_.r.size();
      kmat_.assign(m * m, 0.0);
      ball_.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        ball_[i] = detail::ball_riesz_potential(mu, nodes_.r[i], 2.0);
        for (std::size_t j = 0; j < i; ++j)
          kmat_[i * m + j] = kmat_[j * m + i] = detail::radial_riesz_kernel(mu, nodes_.r[i], nodes_.r[j]);
      }
    }
  }

  double lap_sq() const { return lap_; }
  double grad_sq() const { return grad_; }
  double omega0() const { return omega0_; }
  double t_guard() const { return nl_.amplitude_limit() / omega0_; }

  // int int F(v(x)) F(v(y)) |x - y|^{-mu} dx dy for v = t omega_n.
  double choquard(double t) const {
    nl_.check_amplitude(t * omega0_);
    const std::size_t m = nodes_.r.size();
    std::vector<double> Fv(m);
    for (std::size_t i = 0; i < m; ++i) Fv[i] = nl_.F(t * omega_[i]);
    if (mu_ == 2.0) {
      // K = 4 pi^4 / max(r, rho)^2 separates: D = 8 pi^4 int F(r) r Phi(r) dr,
      // Phi(r) = int_0^r F(rho) rho^3 drho, integrated panel by panel.
      using Q = boost::math::quadrature::gauss<double, 20>;
      double acc = 0.0, before = 0.0;  // Phi at the current panel's left edge
      int cur = -1;
      double panel_total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (nodes_.panel[i] != cur) {
          before += panel_total;
          cur = nodes_.panel[i];
          const auto [a, b] = nodes_.panels[cur];
          panel_total = Q::integrate([&](double rho) { return Fr(t, rho) * rho * rho * rho; }, a, b);
        }
        const double a = nodes_.panels[cur].first;
        const double ri = nodes_.r[i];
        const double phi = before + Q::integrate([&](double rho) { return Fr(t, rho) * rho * rho * rho; }, a, ri);
        acc += nodes_.w[i] * Fv[i] * ri * phi;
      }
      return 8.0 * std::pow(kPi, 4) * acc;
    }
    // General mu: with dm = r^3 dr, G(r) G(rho) = (G(r)^2 + G(rho)^2)/2 - (G(r) - G(rho))^2/2.
    // The first part integrates against the ball potential; the second vanishes on the
    // singular diagonal, so the product rule may skip it.
    std::vector<double> wm(m);
    for (std::size_t i = 0; i < m; ++i) wm[i] = nodes_.w[i] * std::pow(nodes_.r[i], 3);
    double smooth = 0.0, defect = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      smooth += wm[i] * Fv[i] * Fv[i] * ball_[i];
      double row = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        const double d = Fv[i] - Fv[j];
        row += kmat_[i * m + j] * wm[j] * d * d;
      }
      defect += wm[i] * row;
    }
    return smooth - defect;
  }

  // g_n(t); -inf once D overflows.
  double operator()(double t) const {
    const double D = choquard(t);
    const double v = 0.5 * t * t * lap_ + 0.5 * beta_ * t * grad_ - 0.5 * std::pow(t, 0.5 * mu_ - 4.0) * D;
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  }

 private:
  double Fr(double t, double r) const { return nl_.F(t * scale_ * prof_.value(r)); }

  double beta_, mu_;
  Nonlinearity nl_;
  AdamsProfile prof_;
  double scale_ = 1.0, lap_ = 0.0, grad_ = 0.0, omega0_ = 0.0;
  detail::RadialNodes nodes_;
  std::vector<double> omega_;
  std::vector<double> kmat_, ball_;
};

// Scans g_n on a log-spaced t grid up to the admissible limit, then refines
// the best grid point by golden-section search.
inline MountainResult mountain_scan(double beta, double mu, double c, const Nonlinearity& nl, int n,
                                    std::vector<double> t_grid = {}, const MountainOptions& opt = {}) {
  const MountainFunction g(beta, mu, c, nl, n, opt.refine);
  MountainResult res;
  res.n = n;
  res.bound = (8.0 - mu) / 16.0;
  res.t_guard = g.t_guard();
  res.lap_sq = g.lap_sq();
  res.grad_sq = g.grad_sq();
  res.omega0 = g.omega0();
  if (t_grid.empty()) {
    double hi = res.t_guard;
    if (!std::isfinite(hi)) {
      hi = 1.0;
      while (!(g(hi) < 0.0) && hi < 1e12) hi *= 2.0;
      hi *= 4.0;
    }
    const int m = std::max(8, opt.t_points);
    for (int i = 0; i < m; ++i) t_grid.push_back(hi * std::pow(opt.t_min_fraction, 1.0 - static_cast<double>(i) / (m - 1)));
  }
  for (double t : t_grid) {
    if (!(t > 0.0)) throw ConfigError("mountain_scan: t values must be positive");
    if (t > res.t_guard)
      throw OverflowGuardError("mountain_scan: t = " + std::to_string(t) + " exceeds the admissible limit " +
                                   std::to_string(res.t_guard),
                               t, res.t_guard);
  }
  std::sort(t_grid.begin(), t_grid.end());
  res.t = t_grid;
  for (double t : t_grid) res.g.push_back(g(t));
  std::size_t best = 0;
  for (std::size_t i = 1; i < res.g.size(); ++i)
    if (res.g[i] > res.g[best]) best = i;
  for (std::size_t i = 2; i < res.g.size(); ++i) {
    const double d0 = res.g[i - 1] - res.g[i - 2], d1 = res.g[i] - res.g[i - 1];
    if ((d0 > 0.0) != (d1 > 0.0)) ++res.slope_sign_changes;
  }
  res.interior = best > 0 && best + 1 < res.g.size();
  double a = res.t[best > 0 ? best - 1 : 0];
  double b = res.t[std::min(best + 1, res.t.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int k = 0; k < opt.golden_iterations && b - a > 1e-15 * b; ++k) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = g(x1);
    }
  }
  const double tm = 0.5 * (a + b);
  const double gm = g(tm);
  if (gm >= res.g[best]) {
    res.t_n = tm;
    res.gmax = gm;
  } else {
    res.t_n = res.t[best];
    res.gmax = res.g[best];
  }
  res.bound_ok = res.gmax < res.bound;
  return res;
}

}  // namespace bhc
