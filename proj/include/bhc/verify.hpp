#pragma once
// Inequality suite on seeded random fields:
//   (a) interpolation  ||grad u||_2^2 <= ||Delta u||_2 ||u||_2           (must hold)
//   (b) pairing        int (I*|g|)|h| <= D(|g|)^{1/2} D(|h|)^{1/2}        (must hold)
//   (c) Gagliardo-Nirenberg ratio ||u||_p / (||Delta u||^{(p-2)/p} ||u||^{2/p})
//   (d) HLS ratio |int (I*g) h| / (||g||_r ||h||_t), r = t = 8/(8-mu)
//   (e) Adams functional int (e^{alpha u^2} - 1) at ||Delta u||_2 = 1
// (c)-(e) report empirical constants (maxima over the sample); (a) and (b)
// count violations and keep witness snapshots.
//
// On the grid (a) is Cauchy-Schwarz in Fourier space, so it holds to
// roundoff. (b) holds whenever the padded kernel spectrum is non-negative,
// which is the case for mu >= 2; for small mu the truncated kernel has
// negative modes and violations become possible in principle.

#include "bhc/errors.hpp"
#include "bhc/grid.hpp"
#include "bhc/nonlinearity.hpp"
#include "bhc/random_fields.hpp"
#include "bhc/riesz.hpp"
#include "bhc/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

namespace bhc {

struct VerifyOptions {
  double mu = 2.0;
  double p = 4.0;  // Gagliardo-Nirenberg exponent
  double alpha = 32.0 * std::numbers::pi * std::numbers::pi;
  int fields = 100;
  std::uint64_t seed = 1;
  std::vector<int> grids{16, 24};
  double box = 16.0;
  std::string witness_dir;  // empty: no snapshots
  double stability_tolerance = 0.05;
};

struct ResolutionStats {
  int n = 0;
  int interp_violations = 0;
  int cs_violations = 0;
  double max_interp_ratio = 0.0;  // ||grad u||^2 / (||Delta u|| ||u||)
  double max_cs_ratio = 0.0;      // pairing / geometric mean
  double gn_constant = 0.0;       // empirical B_p
  double hls_constant = 0.0;      // empirical C(mu, r, t)
  double adams_constant = 0.0;    // max int (e^{alpha u^2} - 1)
  int adams_evaluated = 0;
  int adams_skipped = 0;  // amplitude beyond the exponent budget
  double kernel_min_spectrum = 0.0;
};

struct VerifyReport {
  VerifyOptions options;
  std::vector<ResolutionStats> resolutions;
  double plane_wave_residual = 0.0;  // equality case of (a)
  double hls_sharp = 0.0;            // sharp diagonal constant for reference
  double gn_spread = 0.0;
  double hls_spread = 0.0;
  bool gn_stable = false;
  bool hls_stable = false;
  bool adams_growth_suspected = false;
  int violations = 0;
  std::vector<std::string> witnesses;

  bool inequalities_hold() const { return violations == 0 && plane_wave_residual <= 1e-12; }
  bool passed() const { return inequalities_hold() && gn_stable && hls_stable; }
};

// Sharp constant of the diagonal case r = t = 8/(8-mu) in R^4:
// pi^{mu/2} Gamma(2 - mu/2) / Gamma(4 - mu/2) (Gamma(2)/Gamma(4))^{mu/4 - 1}.
inline double hls_sharp_constant(double mu) {
  return std::pow(std::numbers::pi, 0.5 * mu) * std::tgamma(2.0 - 0.5 * mu) / std::tgamma(4.0 - 0.5 * mu) *
         std::pow(1.0 / 6.0, 0.25 * mu - 1.0);
}

// Relative gap of (a) for the single-shell field cos(k . x).
inline double plane_wave_interpolation_residual(const Grid& grid, const std::array<int, 4>& mode = {1, 2, 0, 1}) {
  const double two_pi_l = 2.0 * std::numbers::pi / grid.length();
  const Field u = sample(grid, [&](const std::array<double, 4>& x) {
    double ph = 0.0;
    for (int a = 0; a < 4; ++a) ph += mode[a] * two_pi_l * x[a];
    return std::cos(ph);
  });
  const auto sn = seminorms(u);
  const double rhs = std::sqrt(sn.lap_sq * mass_sq(u));
  return std::abs(sn.grad_sq - rhs) / rhs;
}

namespace detail {

inline double relative_spread(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

inline std::string save_witness(const VerifyOptions& opt, const std::string& tag, const Field& u) {
  if (opt.witness_dir.empty()) return {};
  std::filesystem::create_directories(opt.witness_dir);
  const std::string path = (std::filesystem::path(opt.witness_dir) / (tag + ".bch4")).string();
  write_snapshot(path, u);
  return path;
}

}  // namespace detail

inline ResolutionStats verify_resolution(const VerifyOptions& opt, int n, std::vector<std::string>& witnesses) {
  const Grid grid(n, opt.box);
  RieszKernel kernel(grid, opt.mu);
  ResolutionStats st;
  st.n = n;
  st.kernel_min_spectrum = *std::min_element(kernel.spectrum().begin(), kernel.spectrum().end());
  const double r = 8.0 / (8.0 - opt.mu);
  const double gamma_gn = (opt.p - 2.0) / opt.p;

  bool have_prev = false;
  PaddedSpectrum prev_spec;
  double prev_D = 0.0, prev_r = 0.0;
  for (int i = 0; i < opt.fields; ++i) {
    const Field u = random_field(grid, field_seed(opt.seed, static_cast<std::uint64_t>(i)));
    const auto sn = seminorms(u);
    const double m = mass_sq(u);

    const double interp = sn.grad_sq / std::sqrt(sn.lap_sq * m);
    st.max_interp_ratio = std::max(st.max_interp_ratio, interp);
    if (interp > 1.0 + 1e-12) {
      ++st.interp_violations;
      witnesses.push_back(detail::save_witness(opt, "interp_n" + std::to_string(n) + "_" + std::to_string(i), u));
    }

    const double gn = lp_norm(u, opt.p) / (std::pow(sn.lap_sq, 0.5 * gamma_gn) * std::pow(m, 1.0 / opt.p));
    st.gn_constant = std::max(st.gn_constant, gn);

    const Field a = map_values(u, [](double v) { return std::abs(v); });
    PaddedSpectrum spec = padded_spectrum(kernel, a);
    const double D = spectral_pairing(kernel, spec, spec);
    const double ar = lp_norm(a, r);
    st.hls_constant = std::max(st.hls_constant, D / (ar * ar));
    if (have_prev) {
      const double cross = spectral_pairing(kernel, spec, prev_spec);
      const double cs = cross / std::sqrt(D * prev_D);
      st.max_cs_ratio = std::max(st.max_cs_ratio, cs);
      if (cs > 1.0 + 1e-12) {
        ++st.cs_violations;
        witnesses.push_back(detail::save_witness(opt, "pairing_n" + std::to_string(n) + "_" + std::to_string(i), u));
      }
      st.hls_constant = std::max(st.hls_constant, std::abs(cross) / (ar * prev_r));
    }
    have_prev = true;
    prev_spec = std::move(spec);
    prev_D = D;
    prev_r = ar;

    const double scale = 1.0 / std::sqrt(sn.lap_sq);
    const double amp = u.max_abs() * scale;
    if (opt.alpha * amp * amp > kExponentBudget) {
      ++st.adams_skipped;
    } else {
      double acc = 0.0;
      for (double v : u.values()) acc += std::expm1(opt.alpha * v * v * scale * scale);
      st.adams_constant = std::max(st.adams_constant, acc * grid.cell_volume());
      ++st.adams_evaluated;
    }
  }
  return st;
}

inline VerifyReport run_verify(const VerifyOptions& opt) {
  if (!(opt.mu > 0.0 && opt.mu < 4.0)) throw ConfigError("verify: mu must lie in (0,4)");
  if (!(opt.p >= 2.0)) throw ConfigError("verify: p must be >= 2");
  if (opt.fields < 2) throw ConfigError("verify: need at least 2 fields");
  if (opt.grids.size() < 2) throw ConfigError("verify: need two grid resolutions for the stability check");
  VerifyReport rep;
  rep.options = opt;
  rep.hls_sharp = hls_sharp_constant(opt.mu);
  for (int n : opt.grids) {
    rep.resolutions.push_back(verify_resolution(opt, n, rep.witnesses));
    rep.violations += rep.resolutions.back().interp_violations + rep.resolutions.back().cs_violations;
  }
  rep.plane_wave_residual = plane_wave_interpolation_residual(Grid(opt.grids.back(), opt.box));
  const auto& lo = rep.resolutions[rep.resolutions.size() - 2];
  const auto& hi = rep.resolutions.back();
  rep.gn_spread = detail::relative_spread(lo.gn_constant, hi.gn_constant);
  rep.hls_spread = detail::relative_spread(lo.hls_constant, hi.hls_constant);
  rep.gn_stable = rep.gn_spread < opt.stability_tolerance;
  rep.hls_stable = rep.hls_spread < opt.stability_tolerance;
  rep.adams_growth_suspected = hi.adams_constant > (1.0 + opt.stability_tolerance) * lo.adams_constant;
  return rep;
}

// Riesz self-test: fast padded convolution against the O(N^8) double sum on
// a tiny grid, and the Gaussian origin value against pi^2 Gamma((4-mu)/2).
struct RieszCheck {
  double mu = 0.0;
  double direct_rel_error = 0.0;  // max |fast - direct| / max |direct|, N = 8
  std::vector<int> gaussian_n;
  std::vector<double> gaussian_rel_error;
  bool improving = false;
};

struct RieszSelftest {
  std::vector<RieszCheck> checks;
  double direct_tolerance = 1e-10;
  double gaussian_tolerance = 1e-3;  // at the first Gaussian grid
  bool passed() const {
    for (const auto& c : checks) {
      if (!(c.direct_rel_error <= direct_tolerance)) return false;
      if (c.gaussian_rel_error.empty() || !(c.gaussian_rel_error.front() <= gaussian_tolerance)) return false;
      if (c.gaussian_rel_error.size() > 1 && !c.improving) return false;
    }
    return true;
  }
};

inline double gaussian_origin_exact(double mu) { return std::numbers::pi * std::numbers::pi * std::tgamma(0.5 * (4.0 - mu)); }

// (I_mu * e^{-|x|^2})(0) on an n^4 grid of side `box`.
inline double gaussian_origin_value(int n, double box, double mu) {
  const Grid grid(n, box);
  const Field g = sample(grid, [](const std::array<double, 4>& x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]));
  });
  const Field v = convolve(*riesz_kernel(grid, mu), g);
  return v[grid.index(n / 2, n / 2, n / 2, n / 2)];
}

inline RieszSelftest riesz_selftest(const std::vector<double>& mus = {1.0, 2.0, 3.0},
                                    const std::vector<int>& gaussian_n = {32, 48}, double box = 8.0,
                                    std::uint64_t seed = 1) {
  RieszSelftest out;
  for (double mu : mus) {
    RieszCheck c;
    c.mu = mu;
    const Grid tiny(8, 8.0);
    RieszKernel k(tiny, mu);
    const Field g = random_field(tiny, field_seed(seed, 0), RandomFieldSpec{1, 3, 0.8, 1.6, 1.0, false});
    const Field fast = convolve(k, g), direct = direct_convolve(k, g);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
      num = std::max(num, std::abs(fast[i] - direct[i]));
      den = std::max(den, std::abs(direct[i]));
    }
    c.direct_rel_error = num / den;
    const double exact = gaussian_origin_exact(mu);
    for (int n : gaussian_n) {
      c.gaussian_n.push_back(n);
      c.gaussian_rel_error.push_back(std::abs(gaussian_origin_value(n, box, mu) - exact) / exact);
      release_fft_workspaces();
    }
    c.improving = true;
    for (std::size_t i = 1; i < c.gaussian_rel_error.size(); ++i)
      c.improving = c.improving && c.gaussian_rel_error[i] < c.gaussian_rel_error[i - 1];
    out.checks.push_back(std::move(c));
  }
  return out;
}

}  // namespace bhc
