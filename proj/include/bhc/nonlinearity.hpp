#pragma once
// Nonlinearities f(t) = |t|^{p-2} t e^{alpha0 t^2} (alpha0 = 0: pure power),
// their primitive F, derivative f', and Fbar(t) = f(t) t - (2 - mu/4) F(t),
// plus sample-based checks of the growth hypotheses (f1)-(f7).

#include "bhc/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <system_error>
#include <vector>

namespace bhc {

// Largest exponent alpha0 t^2 allowed before exp() nears overflow.
inline constexpr double kExponentBudget = 700.0;
inline constexpr double kCriticalAlpha = 32.0 * std::numbers::pi * std::numbers::pi;

enum class NlKind { PurePower, ExpCriticalPower };

class Nonlinearity {
 public:
  static Nonlinearity power(double p) { return Nonlinearity(NlKind::PurePower, p, 0.0); }
  static Nonlinearity exp_critical(double p, double alpha0) { return Nonlinearity(NlKind::ExpCriticalPower, p, alpha0); }

  // "power:p=4" or "expcrit:p=4,alpha0=315.827".
  static Nonlinearity parse(std::string_view spec);

  NlKind kind() const { return kind_; }
  double p() const { return p_; }
  double alpha0() const { return alpha0_; }
  bool is_homogeneous() const { return alpha0_ == 0.0; }

  // Amplitude bound T_max with alpha0 T_max^2 = 700 (infinite for pure power).
  double amplitude_limit() const {
    return alpha0_ > 0.0 ? std::sqrt(kExponentBudget / alpha0_) : std::numeric_limits<double>::infinity();
  }
  void check_amplitude(double t) const {
    if (!(std::abs(t) <= amplitude_limit()))
      throw OverflowGuardError("nonlinearity: |t| = " + std::to_string(std::abs(t)) + " exceeds overflow guard " +
                                   std::to_string(amplitude_limit()),
                               std::abs(t), amplitude_limit());
  }

  double f(double t) const {
    const double a = std::abs(t);
    if (a == 0.0) return 0.0;
    double v = std::pow(a, p_ - 1.0);
    if (alpha0_ > 0.0) v *= std::exp(alpha0_ * t * t);
    return t < 0.0 ? -v : v;
  }

  double F(double t) const {
    const double a = std::abs(t);
    if (a == 0.0) return 0.0;
    if (alpha0_ == 0.0) return std::pow(a, p_) / p_;
    const double x = alpha0_ * a * a;
    if (x <= kSeriesLimit) return series_primitive(a);
    if (even_integer_p()) return closed_primitive(x);
    const double a0 = std::sqrt(kSeriesLimit / alpha0_);
    return series_primitive(a0) + quadrature_primitive(a0, a);
  }

  double fprime(double t) const {
    const double a = std::abs(t);
    if (a == 0.0) return p_ > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    const double base = std::pow(a, p_ - 2.0);
    if (alpha0_ == 0.0) return (p_ - 1.0) * base;
    return base * std::exp(alpha0_ * t * t) * ((p_ - 1.0) + 2.0 * alpha0_ * t * t);
  }

  double Fbar(double t, double mu) const { return f(t) * t - (2.0 - 0.25 * mu) * F(t); }
  double Fbar_prime(double t, double mu) const { return fprime(t) * t + f(t) - (2.0 - 0.25 * mu) * f(t); }

  // Reference primitive by adaptive quadrature of f on [0, |t|].
  double F_quadrature(double t) const { return quadrature_primitive(0.0, std::abs(t)); }

  std::string to_string() const;

 private:
  static constexpr double kSeriesLimit = 30.0;

  Nonlinearity(NlKind kind, double p, double alpha0) : kind_(kind), p_(p), alpha0_(alpha0) {
    if (!(p > 2.0) || !std::isfinite(p)) throw ConfigError("nonlinearity: p must be > 2, got " + std::to_string(p));
    if (!(alpha0 >= 0.0) || !std::isfinite(alpha0))
      throw ConfigError("nonlinearity: alpha0 must be >= 0, got " + std::to_string(alpha0));
    if (kind == NlKind::PurePower && alpha0 != 0.0) throw ConfigError("nonlinearity: pure power has alpha0 = 0");
  }

  // sum_k alpha0^k a^{p+2k} / (k! (p+2k)); all terms positive.
  double series_primitive(double a) const {
    const double x = alpha0_ * a * a;
    double term = std::pow(a, p_);  // alpha0^k a^{p+2k} / k!
    double sum = term / p_;
    for (int k = 1; k < 2000; ++k) {
      term *= x / k;
      const double add = term / (p_ + 2.0 * k);
      sum += add;
      if (add < 1e-17 * sum && k > x) break;
    }
    return sum;
  }

  bool even_integer_p() const {
    const double m = 0.5 * p_;
    return m == std::floor(m) && m <= 20.0;
  }

  // For p = 2m: F = (1 / (2 alpha0^m)) int_0^x v^{m-1} e^v dv with x = alpha0 t^2, and
  // int_0^x v^{m-1} e^v dv = e^x sum_j (-1)^j (m-1)!/(m-1-j)! x^{m-1-j} + (-1)^m (m-1)!.
  // Used only for x > 30 where the e^x part dominates and nothing cancels.
  double closed_primitive(double x) const {
    const int m = static_cast<int>(0.5 * p_);
    double poly = 0.0, coef = 1.0;  // coef = (m-1)!/(m-1-j)!
    for (int j = 0; j < m; ++j) {
      poly += ((j % 2) ? -coef : coef) * std::pow(x, m - 1 - j);
      coef *= (m - 1 - j);
    }
    double fact = 1.0;
    for (int i = 2; i < m; ++i) fact *= i;
    const double tail = (m % 2) ? -fact : fact;
    return (std::exp(x) * poly + tail) / (2.0 * std::pow(alpha0_, m));
  }

  double quadrature_primitive(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate([this](double s) { return f(s); }, lo, hi, 15, 1e-15);
  }

  NlKind kind_;
  double p_;
  double alpha0_;
};

namespace detail {

inline double parse_number(std::string_view token, std::string_view context) {
  double v = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || token.empty())
    throw ConfigError(std::string(context) + ": malformed number '" + std::string(token) + "'");
  return v;
}

}  // namespace detail

inline Nonlinearity Nonlinearity::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError("nonlinearity spec '" + std::string(spec) + "': expected kind:key=value,...");
  const auto kind = spec.substr(0, colon);
  std::optional<double> p, alpha0;
  auto rest = spec.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("nonlinearity spec: expected key=value, got '" + std::string(item) + "'");
    const auto key = item.substr(0, eq);
    const double v = detail::parse_number(item.substr(eq + 1), "nonlinearity spec");
    if (key == "p")
      p = v;
    else if (key == "alpha0")
      alpha0 = v;
    else
      throw ConfigError("nonlinearity spec: unknown key '" + std::string(key) + "'");
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (!p) throw ConfigError("nonlinearity spec '" + std::string(spec) + "': missing p");
  if (kind == "power") {
    if (alpha0) throw ConfigError("nonlinearity spec: power takes no alpha0");
    return power(*p);
  }
  if (kind == "expcrit") return exp_critical(*p, alpha0.value_or(kCriticalAlpha));
  throw ConfigError("nonlinearity spec: unknown kind '" + std::string(kind) + "'");
}

inline std::string Nonlinearity::to_string() const {
  auto fmt = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  if (kind_ == NlKind::PurePower) return "power:p=" + fmt(p_);
  return "expcrit:p=" + fmt(p_) + ",alpha0=" + fmt(alpha0_);
}

// Constants that the hypotheses quantify over.
struct ConditionParams {
  double theta = 4.0;
  double nu = 3.0;
  double varrho = 0.1;
  double M0 = 1.0;
  double R0 = 1.0;
  double mu = 2.0;
};

struct SampleSpec {
  double t_min = 1e-3;
  double t_max = 0.0;  // 0: min(4, 0.999 * overflow guard)
  int count = 400;
  int product_count = 48;
};

struct ConditionResult {
  std::string name;
  bool passed = true;
  bool proxy = false;  // finite-sample stand-in for an asymptotic statement
  std::optional<double> witness_t;
  std::optional<double> witness_s;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionResult> results;
  bool admissible = false;  // theta > 3 - mu/4 and nu > 2 - mu/4
  std::string admissibility_detail;

  const ConditionResult* find(std::string_view name) const {
    for (const auto& r : results)
      if (r.name == name) return &r;
    return nullptr;
  }
  bool passed(std::string_view name) const {
    const auto* r = find(name);
    return r && r->passed;
  }
  bool all_passed() const {
    for (const auto& r : results)
      if (!r.passed) return false;
    return true;
  }
};

inline ConditionReport check_conditions(const Nonlinearity& nl, const ConditionParams& cp, SampleSpec spec = {}) {
  const double mu = cp.mu;
  const double k = 3.0 - 0.25 * mu;
  double t_max = spec.t_max > 0.0 ? spec.t_max : std::min(4.0, 0.999 * nl.amplitude_limit());
  t_max = std::min(t_max, nl.amplitude_limit());
  if (!(spec.t_min > 0.0 && spec.t_min < t_max) || spec.count < 4)
    throw ConfigError("check_conditions: need 0 < t_min < t_max and at least 4 samples");

  std::vector<double> ts(spec.count);
  const double lr = std::log(t_max / spec.t_min);
  for (int i = 0; i < spec.count; ++i) ts[i] = spec.t_min * std::exp(lr * i / (spec.count - 1));

  ConditionReport rep;
  rep.admissible = cp.theta > k && cp.nu > 2.0 - 0.25 * mu;
  if (!(cp.theta > k))
    rep.admissibility_detail = "theta = " + std::to_string(cp.theta) + " must exceed 3 - mu/4 = " + std::to_string(k);
  else if (!(cp.nu > 2.0 - 0.25 * mu))
    rep.admissibility_detail =
        "nu = " + std::to_string(cp.nu) + " must exceed 2 - mu/4 = " + std::to_string(2.0 - 0.25 * mu);

  auto fail = [](ConditionResult& r, double t, std::string why) {
    if (!r.passed) return;
    r.passed = false;
    r.witness_t = t;
    r.detail = std::move(why);
  };

  {  // (f1): parity and |f|/|t|^nu -> 0
    ConditionResult r;
    r.name = "f1";
    r.proxy = true;
    for (double t : ts)
      if (nl.f(-t) != -nl.f(t)) fail(r, t, "f is not odd");
    // Local exponent of |f|/|t|^nu between the two smallest samples must be positive.
    const double t1 = ts[0], t2 = ts[1];
    const double slope = std::log((std::abs(nl.f(t2)) / std::pow(t2, cp.nu)) / (std::abs(nl.f(t1)) / std::pow(t1, cp.nu))) /
                         std::log(t2 / t1);
    if (!(slope > 0.0)) fail(r, t1, "|f(t)|/|t|^nu does not decay as t -> 0 (local exponent " + std::to_string(slope) + ")");
    if (!(cp.nu > 2.0 - 0.25 * mu)) fail(r, t1, "nu must exceed 2 - mu/4");
    rep.results.push_back(r);
  }
  {  // (f2): exponential critical growth with rate 32 pi^2
    ConditionResult r;
    r.name = "f2";
    if (nl.kind() != NlKind::ExpCriticalPower)
      fail(r, t_max, "no exponential growth (pure power)");
    else if (std::abs(nl.alpha0() / kCriticalAlpha - 1.0) > 1e-12)
      fail(r, t_max, "exponential rate alpha0 = " + std::to_string(nl.alpha0()) + " differs from 32 pi^2");
    rep.results.push_back(r);
  }
  {  // (f3): 0 < theta F(t) <= t f(t)
    ConditionResult r;
    r.name = "f3";
    for (double t : ts)
      for (double s : {t, -t}) {
        const double F = nl.F(s), tf = s * nl.f(s);
        if (!(F > 0.0)) fail(r, s, "F(t) is not positive");
        if (cp.theta * F > tf * (1.0 + 1e-13)) fail(r, s, "theta F(t) > t f(t)");
      }
    if (!(cp.theta > k)) fail(r, ts[0], "theta must exceed 3 - mu/4");
    rep.results.push_back(r);
  }
  {  // (f4): F(t) <= M0 |f(t)| for |t| >= R0
    ConditionResult r;
    r.name = "f4";
    r.proxy = true;
    for (double t : ts)
      if (t >= cp.R0 && nl.F(t) > cp.M0 * std::abs(nl.f(t))) fail(r, t, "F(t) > M0 |f(t)|");
    rep.results.push_back(r);
  }
  {  // (f5): liminf f(t)/e^{32 pi^2 t^2} >= varrho, on the top decile of samples
    ConditionResult r;
    r.name = "f5";
    r.proxy = true;
    const std::size_t start = ts.size() - std::max<std::size_t>(1, ts.size() / 10);
    for (std::size_t i = start; i < ts.size(); ++i) {
      const double t = ts[i];
      const double ratio = nl.f(t) * std::exp(-kCriticalAlpha * t * t);
      if (ratio < cp.varrho * (1.0 - 1e-12)) fail(r, t, "f(t)/e^{32 pi^2 t^2} = " + std::to_string(ratio) + " < varrho");
    }
    rep.results.push_back(r);
  }
  {  // (f6): product-grid strict inequality, divided by F(s) |Fbar(t)| to stay finite
    ConditionResult r;
    r.name = "f6";
    r.proxy = true;
    const int m = std::max(4, spec.product_count);
    std::vector<double> ps(m);
    for (int i = 0; i < m; ++i) ps[i] = spec.t_min * std::exp(lr * i / (m - 1));
    std::vector<std::pair<double, double>> ratio;  // (s, Fbar(s)/F(s))
    for (double s0 : ps)
      for (double s : {s0, -s0}) ratio.emplace_back(s, nl.Fbar(s, mu) / nl.F(s));
    for (double t0 : ps)
      for (double t : {t0, -t0}) {
        const double Ft = nl.F(t), Fbt = nl.Fbar(t, mu), Fbpt = nl.Fbar_prime(t, mu);
        if (!std::isfinite(Fbpt * t)) continue;  // beyond the representable range
        const double scale = std::abs(Fbt);
        const double lhs = k * Fbt / scale;
        const double growth = Fbpt * t / scale, gap = (Fbt - Ft) / scale;
        for (const auto& [s, q] : ratio) {
          if (!(lhs < growth + q * gap)) {
            if (r.passed) r.witness_s = s;
            fail(r, t, "(3 - mu/4) F(s) Fbar(t) >= F(s) Fbar'(t) t + Fbar(s)(Fbar(t) - F(t))");
          }
        }
      }
    rep.results.push_back(r);
  }
  {  // (f7): Fbar(t)/|t|^{3-mu/4} monotone away from 0
    ConditionResult r;
    r.name = "f7";
    r.proxy = true;
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : ts) {
      const double v = nl.Fbar(t, mu) / std::pow(t, k);
      if (v < prev - 1e-12 * std::abs(prev)) fail(r, t, "Fbar/|t|^{3-mu/4} decreases on (0, inf)");
      const double vn = nl.Fbar(-t, mu) / std::pow(t, k);
      if (std::abs(vn - v) > 1e-12 * std::abs(v)) fail(r, -t, "Fbar/|t|^{3-mu/4} is not even");
      prev = v;
    }
    rep.results.push_back(r);
  }
  return rep;
}

}  // namespace bhc
