#pragma once
// Energy J(u) = A/2 + beta B/2 - D/2 with A = ||Delta u||^2, B = ||grad u||^2,
// D = int (I_mu * F(u)) F(u); its L^2 gradient; the Pohozaev functional
// P(u) = 2A + beta B + ((8-mu)/2) D - 2E with E = int (I_mu * F(u)) f(u) u;
// Lagrange multipliers; the fiber map g_u(s) = J(H(u,s)) with
// H(u,s)(x) = e^{2s} u(e^s x); and the reduced functional I(u) = J(H(u, s_u)).
//
// Fiber quantities never resample space. Substituting x -> e^{-s} x turns H
// into the amplitude scaling w = e^{2s} u with prefactors:
//   g(s)   = e^{4s} A/2 + beta e^{2s} B/2 - e^{(mu-8)s} D(w)/2
//   g'(s)  = 2 e^{4s} A + beta e^{2s} B + ((8-mu)/2) e^{(mu-8)s} D(w) - 2 e^{(mu-8)s} E(w)
//   g''(s) = 8 e^{4s} A + 2 beta e^{2s} B
//            + e^{(mu-8)s} [ -((8-mu)^2/2) D + (28 - 4mu) E - 4 Q - 4 R ](w)
// with Q = int (I_mu * f(w) w) f(w) w and R = int (I_mu * F(w)) f'(w) w^2.

#include "bhc/errors.hpp"
#include "bhc/grid.hpp"
#include "bhc/nonlinearity.hpp"
#include "bhc/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhc {

struct ProblemConfig {
  double beta = 0.0;
  double mu = 2.0;
  double c = 1.0;
  Nonlinearity nl = Nonlinearity::power(4.0);
  std::shared_ptr<const RieszKernel> kernel;
  bool nonlocal = true;  // false drops the Choquard term (linear problem)

  static ProblemConfig make(const Grid& grid, double beta, double mu, double c, const Nonlinearity& nl,
                            SingularRule rule = SingularRule::LatticeCorrected) {
    ProblemConfig cfg;
    cfg.beta = beta;
    cfg.mu = mu;
    cfg.c = c;
    cfg.nl = nl;
    cfg.validate_scalars();
    cfg.kernel = riesz_kernel(grid, mu, rule);
    return cfg;
  }

  const Grid& grid() const {
    if (!kernel) throw std::logic_error("ProblemConfig: kernel not set");
    return kernel->grid();
  }

  void validate_scalars() const {
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0, got " + std::to_string(beta));
    if (!(mu > 0.0 && mu < 4.0)) throw ConfigError("mu must lie in (0,4), got " + std::to_string(mu));
    if (!(c > 0.0)) throw ConfigError("c must be > 0, got " + std::to_string(c));
  }
};

// Nonlocal integrals of w = a u.
struct NonlocalTerms {
  double D = 0.0;  // (F, F)
  double E = 0.0;  // (F, f w)
  double Q = 0.0;  // (f w, f w)
  double R = 0.0;  // (F, f' w^2)
};

namespace detail {

inline void guard_amplitude(const ProblemConfig& cfg, const Field& u, double a) {
  cfg.nl.check_amplitude(a * u.max_abs());
}

// level 0: D; 1: D, E; 2: all four.
inline NonlocalTerms nonlocal_terms(const ProblemConfig& cfg, const Field& u, double a, int level) {
  NonlocalTerms t;
  if (!cfg.nonlocal) return t;
  guard_amplitude(cfg, u, a);
  const auto& k = *cfg.kernel;
  const auto& nl = cfg.nl;
  const Field Fw = map_values(u, [&](double v) { return nl.F(a * v); });
  const auto sF = padded_spectrum(k, Fw);
  t.D = spectral_pairing(k, sF, sF);
  if (level < 1) return t;
  const auto sG = padded_spectrum(k, map_values(u, [&](double v) { return nl.f(a * v) * a * v; }));
  t.E = spectral_pairing(k, sF, sG);
  if (level < 2) return t;
  t.Q = spectral_pairing(k, sG, sG);
  const auto sH = padded_spectrum(k, map_values(u, [&](double v) { return nl.fprime(a * v) * a * v * a * v; }));
  t.R = spectral_pairing(k, sF, sH);
  return t;
}

}  // namespace detail

inline double energy(const ProblemConfig& cfg, const Field& u) {
  const auto sn = seminorms(u);
  const auto nt = detail::nonlocal_terms(cfg, u, 1.0, 0);
  return 0.5 * sn.lap_sq + 0.5 * cfg.beta * sn.grad_sq - 0.5 * nt.D;
}

// (I_mu * F(w)) f(w) for w = a u.
inline Field choquard_force(const ProblemConfig& cfg, const Field& u, double a = 1.0) {
  if (!cfg.nonlocal) return Field(u.grid());
  detail::guard_amplitude(cfg, u, a);
  const Field pot = convolve(*cfg.kernel, map_values(u, [&](double v) { return cfg.nl.F(a * v); }));
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = pot[i] * cfg.nl.f(a * u[i]);
  return out;
}

// L^2 representative of J'(u): Delta^2 u - beta Delta u - (I_mu * F(u)) f(u).
inline Field euler_gradient(const ProblemConfig& cfg, const Field& u) {
  Field g = apply_operator(u, OperatorSymbol::biharmonic_plus_beta(cfg.beta));
  g -= choquard_force(cfg, u);
  return g;
}

inline double pohozaev(const ProblemConfig& cfg, const Field& u) {
  const auto sn = seminorms(u);
  const auto nt = detail::nonlocal_terms(cfg, u, 1.0, 1);
  return 2.0 * sn.lap_sq + cfg.beta * sn.grad_sq + 0.5 * (8.0 - cfg.mu) * nt.D - 2.0 * nt.E;
}

struct LagrangeMultipliers {
  double direct = 0.0;     // (A + beta B - E) / ||u||^2
  double pohozaev = 0.0;   // (beta B/2 - ((8-mu)/4) D) / ||u||^2
};

inline LagrangeMultipliers lagrange_multiplier(const ProblemConfig& cfg, const Field& u) {
  const double m = mass_sq(u);
  if (!(m > 0.0)) throw std::invalid_argument("lagrange_multiplier: zero field");
  const auto sn = seminorms(u);
  const auto nt = detail::nonlocal_terms(cfg, u, 1.0, 1);
  return {(sn.lap_sq + cfg.beta * sn.grad_sq - nt.E) / m,
          (0.5 * cfg.beta * sn.grad_sq - 0.25 * (8.0 - cfg.mu) * nt.D) / m};
}

enum class FiberEvaluation {
  Auto,     // homogeneous nonlinearities reuse the unit-amplitude integrals
  General,  // always evaluate the nonlinearity at the scaled amplitude
};

struct FiberPoint {
  double s = 0.0;
  double g = 0.0;
  double gprime = 0.0;
  double gsecond = std::numeric_limits<double>::quiet_NaN();
};

// The fiber s -> J(H(v, s)) of v = H(u, shift), evaluated from u alone.
class FiberMap {
 public:
  FiberMap(const ProblemConfig& cfg, const Field& u, FiberEvaluation mode = FiberEvaluation::Auto, double shift = 0.0)
      : cfg_(cfg), u_(u), mode_(mode), shift_(shift) {
    if (!(u.max_abs() > 0.0)) throw std::invalid_argument("fiber: zero field has no fiber maximum");
    const auto sn = seminorms(u);
    A_ = sn.lap_sq;
    B_ = sn.grad_sq;
    umax_ = u.max_abs();
  }

  double lap_sq() const { return A_; }
  double grad_sq() const { return B_; }
  const Field& field() const { return u_; }
  const ProblemConfig& config() const { return cfg_; }
  double shift() const { return shift_; }

  // Largest s keeping e^{2(s+shift)} max|u| inside the overflow guard, with a
  // margin so that rounding in exp(log(.)) cannot step over it.
  double s_overflow() const {
    const double lim = cfg_.nl.amplitude_limit();
    if (!std::isfinite(lim)) return std::numeric_limits<double>::infinity();
    return 0.5 * std::log(lim / umax_) - shift_ - 1e-12;
  }

  NonlocalTerms terms(double s, int level) const {
    const double t = s + shift_;
    const double a = std::exp(2.0 * t);
    if (mode_ == FiberEvaluation::Auto && cfg_.nl.is_homogeneous()) {
      if (level > cached_level_) {
        unit_ = detail::nonlocal_terms(cfg_, u_, 1.0, level);
        cached_level_ = level;
      }
      const double scale = std::pow(a, 2.0 * cfg_.nl.p());
      return {unit_.D * scale, unit_.E * scale, unit_.Q * scale, unit_.R * scale};
    }
    return detail::nonlocal_terms(cfg_, u_, a, level);
  }

  // level 0: g; 1: g, g'; 2: g, g', g''.
  FiberPoint evaluate(double s, int level) const {
    const double t = s + shift_;
    const double e4 = std::exp(4.0 * t), e2 = std::exp(2.0 * t), em = std::exp((cfg_.mu - 8.0) * t);
    const auto nt = terms(s, level);
    const double mu = cfg_.mu, beta = cfg_.beta;
    FiberPoint p;
    p.s = s;
    p.g = 0.5 * e4 * A_ + 0.5 * beta * e2 * B_ - 0.5 * em * nt.D;
    if (level >= 1) p.gprime = 2.0 * e4 * A_ + beta * e2 * B_ + em * (0.5 * (8.0 - mu) * nt.D - 2.0 * nt.E);
    if (level >= 2)
      p.gsecond = 8.0 * e4 * A_ + 2.0 * beta * e2 * B_ +
                  em * (-0.5 * (8.0 - mu) * (8.0 - mu) * nt.D + (28.0 - 4.0 * mu) * nt.E - 4.0 * nt.Q - 4.0 * nt.R);
    return p;
  }

  double value(double s) const { return evaluate(s, 0).g; }
  double derivative(double s) const { return evaluate(s, 1).gprime; }
  double second(double s) const { return evaluate(s, 2).gsecond; }

 private:
  const ProblemConfig& cfg_;
  const Field& u_;
  FiberEvaluation mode_;
  double shift_;
  double A_ = 0.0, B_ = 0.0, umax_ = 0.0;
  mutable NonlocalTerms unit_;
  mutable int cached_level_ = -1;
};

inline double fiber_value(const ProblemConfig& cfg, const Field& u, double s,
                          FiberEvaluation mode = FiberEvaluation::Auto) {
  return FiberMap(cfg, u, mode).value(s);
}
inline double fiber_derivative(const ProblemConfig& cfg, const Field& u, double s,
                               FiberEvaluation mode = FiberEvaluation::Auto) {
  return FiberMap(cfg, u, mode).derivative(s);
}
inline double fiber_second(const ProblemConfig& cfg, const Field& u, double s,
                           FiberEvaluation mode = FiberEvaluation::Auto) {
  return FiberMap(cfg, u, mode).second(s);
}

struct FiberDiagnostics {
  std::vector<double> s_samples, g_values, gprime_values;
  double s_u = 0.0;
  double g_at_su = 0.0;
  double gprime_at_su = 0.0;
  double curvature_at_su = 0.0;
  bool multimodal = false;
  int sign_changes = 0;
  double s_lo = 0.0, s_hi = 0.0;  // scanned range
  int bisection_steps = 0;
};

struct FiberOptions {
  int coarse_points = 64;
  double s_min = -30.0;
  double s_max = 30.0;
  double exponent_budget = 600.0;  // cap on |exponent * s| in the prefactors
  int bisection_steps = 80;
  std::optional<double> start;  // bracket expansion origin (default 0)
  bool curvature = true;        // evaluate g''(s_u) (needs two more pairings)
};

// Finds the maximizer s_u of the fiber by a coarse sign scan of g', geometric
// bracket expansion from `start`, and bisection.
inline FiberDiagnostics fiber_maximize(const FiberMap& fiber, const FiberOptions& opt = {}) {
  const auto& cfg = fiber.config();
  FiberDiagnostics d;
  // Exponents in play: 4, 2, mu - 8, and for powers 4p + mu - 8.
  double growth = std::max(4.0, 8.0 - cfg.mu);
  if (cfg.nl.is_homogeneous()) growth = std::max(growth, std::abs(4.0 * cfg.nl.p() + cfg.mu - 8.0));
  d.s_lo = std::max(opt.s_min, -opt.exponent_budget / growth) - fiber.shift();
  d.s_hi = std::min({opt.s_max, opt.exponent_budget / growth}) - fiber.shift();
  const double s_ovf = fiber.s_overflow();
  if (s_ovf < d.s_hi) d.s_hi = s_ovf;
  if (!(d.s_hi > d.s_lo))
    throw NumericalFailure("fiber_maximize: empty admissible s range (overflow guard at s = " + std::to_string(s_ovf) +
                           ")");

  const int m = std::max(2, opt.coarse_points);
  std::vector<std::pair<double, double>> ups;  // brackets where g' goes + to -
  for (int i = 0; i < m; ++i) {
    const double s = d.s_lo + (d.s_hi - d.s_lo) * i / (m - 1);
    const auto p = fiber.evaluate(s, 1);
    d.s_samples.push_back(s);
    d.g_values.push_back(p.g);
    d.gprime_values.push_back(p.gprime);
    if (i > 0) {
      const double a = d.gprime_values[i - 1], b = p.gprime;
      if ((a > 0.0) != (b > 0.0)) ++d.sign_changes;
      if (a > 0.0 && !(b > 0.0)) ups.emplace_back(d.s_samples[i - 1], s);
    }
  }
  d.multimodal = d.sign_changes > 1;

  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  const double s0 = std::clamp(opt.start.value_or(0.0), d.s_lo, d.s_hi);
  if (!d.multimodal) {
    const double g0 = fiber.derivative(s0);
    if (g0 == 0.0) {
      lo = hi = s0;
      bracketed = true;
    } else {
      const double dir = g0 > 0.0 ? 1.0 : -1.0;
      double step = 0.25, prev = s0;
      while (true) {
        double s = prev + dir * step;
        s = std::clamp(s, d.s_lo, d.s_hi);
        const double gs = fiber.derivative(s);
        if ((gs > 0.0) != (g0 > 0.0)) {
          lo = std::min(prev, s);
          hi = std::max(prev, s);
          bracketed = true;
          break;
        }
        if (s == d.s_lo || s == d.s_hi) break;
        prev = s;
        step *= 2.0;
      }
    }
  } else {
    // Several local maxima: take the bracket with the highest coarse g.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : ups) {
      const double gv = std::max(fiber.value(a), fiber.value(b));
      if (gv > best) {
        best = gv;
        lo = a;
        hi = b;
        bracketed = true;
      }
    }
  }
  if (!bracketed)
    throw NumericalFailure("fiber_maximize: no sign change of g' in s in [" + std::to_string(d.s_lo) + ", " +
                           std::to_string(d.s_hi) + "]");

  // g' > 0 on the left end, <= 0 on the right end.
  for (int k = 0; k < opt.bisection_steps && hi > lo; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++d.bisection_steps;
    if (fiber.derivative(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // Pick the end with the smaller |g'|.
  const auto plo = fiber.evaluate(lo, 1), phi = fiber.evaluate(hi, 1);
  d.s_u = std::abs(plo.gprime) <= std::abs(phi.gprime) ? lo : hi;
  const auto pu = fiber.evaluate(d.s_u, opt.curvature ? 2 : 1);
  d.g_at_su = pu.g;
  d.gprime_at_su = pu.gprime;
  d.curvature_at_su = pu.gsecond;
  return d;
}

inline FiberDiagnostics fiber_maximize(const ProblemConfig& cfg, const Field& u, const FiberOptions& opt = {},
                                       FiberEvaluation mode = FiberEvaluation::Auto) {
  return fiber_maximize(FiberMap(cfg, u, mode), opt);
}

// psi(s) = int (I_mu * F(w)/a^k) Fbar(w)/a^k with w = a u, a = e^{2s}, k = 3 - mu/4.
inline std::vector<double> psi_scan(const ProblemConfig& cfg, const Field& u, const std::vector<double>& s_list) {
  std::vector<double> out;
  out.reserve(s_list.size());
  const double k = 3.0 - 0.25 * cfg.mu;
  for (double s : s_list) {
    if (!(u.max_abs() > 0.0) || !cfg.nonlocal) {
      out.push_back(0.0);
      continue;
    }
    const double a = std::exp(2.0 * s);
    detail::guard_amplitude(cfg, u, a);
    const Field Fw = map_values(u, [&](double v) { return cfg.nl.F(a * v); });
    const Field Fb = map_values(u, [&](double v) { return cfg.nl.Fbar(a * v, cfg.mu); });
    out.push_back(choquard_pairing(*cfg.kernel, Fw, Fb) * std::pow(a, -2.0 * k));
  }
  return out;
}

// I(u) = max_s J(H(u, s)).
inline double reduced_energy(const ProblemConfig& cfg, const Field& u, const FiberOptions& opt = {},
                             FiberEvaluation mode = FiberEvaluation::Auto) {
  return fiber_maximize(cfg, u, opt, mode).g_at_su;
}

struct ReducedGradient {
  Field full;        // G
  Field tangent;     // G - (<G,u>/||u||^2) u
  double s_u = 0.0;
  double normal_coefficient = 0.0;  // <G,u>/||u||^2
};

// L^2 representative of I'(u) at a given fiber maximizer s_u:
// G = e^{4s} Delta^2 u - beta e^{2s} Delta u - e^{(mu-6)s} (I_mu * F(w)) f(w), w = e^{2s} u.
inline ReducedGradient reduced_gradient_at(const ProblemConfig& cfg, const Field& u, double s_u) {
  const double e4 = std::exp(4.0 * s_u), e2 = std::exp(2.0 * s_u);
  const double b2 = cfg.beta * e2;
  Field G = apply_multiplier(u, [&](double k2) { return e4 * k2 * k2 + b2 * k2; });
  G.axpy(-std::exp((cfg.mu - 6.0) * s_u), choquard_force(cfg, u, e2));
  const double m = mass_sq(u);
  const double coef = inner(G, u) / m;
  Field T = G;
  T.axpy(-coef, u);
  return {std::move(G), std::move(T), s_u, coef};
}

inline ReducedGradient reduced_gradient(const ProblemConfig& cfg, const Field& u, const FiberOptions& opt = {},
                                        FiberEvaluation mode = FiberEvaluation::Auto) {
  return reduced_gradient_at(cfg, u, fiber_maximize(cfg, u, opt, mode).s_u);
}

struct AlphaSample {
  double t = 0.0, s = 0.0;
  double alpha = 0.0;       // J(H(t u, s))
  double dalpha_dt = 0.0;   // <J'(H(t u, s)), H(t u, s)> / t
};

inline std::vector<AlphaSample> alpha_surface(const ProblemConfig& cfg, const Field& u, const std::vector<double>& t_list,
                                              const std::vector<double>& s_list) {
  const auto sn = seminorms(u);
  std::vector<AlphaSample> out;
  for (double t : t_list) {
    if (!(t > 0.0)) throw std::invalid_argument("alpha_surface: t must be positive");
    for (double s : s_list) {
      const double e4 = std::exp(4.0 * s), e2 = std::exp(2.0 * s), em = std::exp((cfg.mu - 8.0) * s);
      const auto nt = detail::nonlocal_terms(cfg, u, t * e2, 1);
      AlphaSample a;
      a.t = t;
      a.s = s;
      a.alpha = 0.5 * e4 * t * t * sn.lap_sq + 0.5 * cfg.beta * e2 * t * t * sn.grad_sq - 0.5 * em * nt.D;
      a.dalpha_dt = (e4 * t * t * sn.lap_sq + cfg.beta * e2 * t * t * sn.grad_sq - em * nt.E) / t;
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace bhc
