#pragma once
// Normalized ground states: minimize the reduced functional I(u) = J(H(u, s_u))
// over the mass sphere S(c) by preconditioned limited-memory BFGS with an
// L^2 retraction. J itself is unbounded below on S(c), so descending
// I is what keeps the iteration on the mountain-pass level.
//
// The iterate u is a frame field: the physical state is u* = H(u, s_u).
// Every reported quantity of u* follows from exact scaling identities, so u
// can stay wide and well resolved while u* is arbitrarily narrow:
//   ||u*||_2 = ||u||_2,  ||Delta u*||^2 = e^{4s} A,  ||grad u*||^2 = e^{2s} B,
//   PDE residual of u* = ||G_T||_2,  ||Delta^2 u*||_2 = e^{4s} ||Delta^2 u||_2.

#include "bhc/adams.hpp"
#include "bhc/errors.hpp"
#include "bhc/functional.hpp"
#include "bhc/grid.hpp"
#include "bhc/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace bhc {

struct InitialGuess {
  enum class Kind { Gaussian, Adams, Snapshot };
  Kind kind = Kind::Gaussian;
  double width = 1.5;  // Gaussian e^{-|x|^2 / (2 width^2)}
  int adams_n = 10;
  std::string path;

  static InitialGuess parse(const std::string& spec);
  std::string to_string() const;
};

struct SolveSettings {
  int max_iterations = 2000;
  double tol_grad = 1e-8;  // ||G_T|| / ||Delta^2 u*||
  double tol_p = 1e-6;     // |P(u*)| / (2 ||Delta u*||^2)
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 40;
  int memory = 8;  // L-BFGS pairs
  InitialGuess init;
  // Re-center the frame by H(u, s_u - s_ref) once |s_u - s_ref| exceeds this.
  // Off by default: the discrete functional picks its own frame scale, and
  // resampling away from it moves the iterate off the discrete critical point.
  double recenter_threshold = std::numeric_limits<double>::infinity();
  bool record_trace = true;
};

struct GroundStateReport {
  double E = 0.0;  // J(u*) = I(u)
  double lambda_direct = 0.0;
  double lambda_pohozaev = 0.0;
  double pohozaev_residual = 0.0;  // |P(u*)| / (2 ||Delta u*||^2)
  double pde_residual = 0.0;       // ||Delta^2 u* - beta Delta u* - lambda u* - (I*F)f|| / ||Delta^2 u*||
  double mass_sq = 0.0;
  double mass_error = 0.0;
  double lap_sq = 0.0;   // ||Delta u*||^2
  double grad_sq = 0.0;  // ||grad u*||^2
  double choquard = 0.0; // D(u*)
  double s_u = 0.0;      // u* = H(frame, s_u)
  double min_over_max = 0.0;  // min u / max u after sign normalization
  double beta_star_estimate = 0.0;
  int iterations = 0;
  int recenterings = 0;
  bool converged = false;
  std::vector<double> energy_trace, residual_trace, s_trace;
  std::vector<std::string> warnings;
};

struct GroundState {
  Field frame;  // u, with u* = H(u, s_u)
  GroundStateReport report;

  // u* sampled on the frame grid; only meaningful when e^{-s_u} times the
  // frame support fits the box and e^{s_u} stays near 1.
  Field physical_state(std::vector<std::string>* warnings = nullptr) const {
    return mass_preserving_scaling(frame, report.s_u, warnings);
  }
};

namespace detail {

inline Field gaussian_guess(const Grid& grid, double width, double c) {
  if (!(width > 0.0)) throw ConfigError("initial guess: width must be positive");
  const double inv = 1.0 / (2.0 * width * width);
  Field u = sample(grid, [&](const std::array<double, 4>& x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) * inv);
  });
  return rescale_mass(u, c);
}

inline void sign_normalize(Field& u) {
  double s = 0.0;
  for (double v : u.values()) s += v;
  if (s < 0.0) u *= -1.0;
}

// Evaluates everything the iteration needs at u.
struct Probe {
  double I = 0.0;
  double s_u = 0.0;
  ReducedGradient grad;
};

}  // namespace detail

inline Field initial_field(const ProblemConfig& cfg, const InitialGuess& init) {
  const Grid& g = cfg.grid();
  switch (init.kind) {
    case InitialGuess::Kind::Gaussian:
      return detail::gaussian_guess(g, init.width, cfg.c);
    case InitialGuess::Kind::Adams:
      return normalized_adams(g, init.adams_n, cfg.c);
    case InitialGuess::Kind::Snapshot: {
      Field u = read_snapshot(init.path);
      if (!(u.grid() == g))
        throw ConfigError("initial guess: snapshot grid (N=" + std::to_string(u.grid().n()) +
                          ", L=" + std::to_string(u.grid().length()) + ") differs from the run grid");
      return rescale_mass(u, cfg.c);
    }
  }
  throw ConfigError("initial guess: unknown kind");
}

// Fills the report for the frame field u at its fiber maximizer.
inline GroundStateReport describe_state(const ProblemConfig& cfg, const Field& u, const FiberDiagnostics& fd) {
  GroundStateReport r;
  const double s = fd.s_u;
  const double e4 = std::exp(4.0 * s), e2 = std::exp(2.0 * s), em = std::exp((cfg.mu - 8.0) * s);
  FiberMap fiber(cfg, u);
  const auto nt = fiber.terms(s, 1);
  const double m = mass_sq(u);
  r.s_u = s;
  r.E = fd.g_at_su;
  r.mass_sq = m;
  r.mass_error = std::abs(m - cfg.c * cfg.c);
  r.lap_sq = e4 * fiber.lap_sq();
  r.grad_sq = e2 * fiber.grad_sq();
  r.choquard = em * nt.D;
  const double Estar = em * nt.E;
  r.lambda_direct = (r.lap_sq + cfg.beta * r.grad_sq - Estar) / m;
  r.lambda_pohozaev = (0.5 * cfg.beta * r.grad_sq - 0.25 * (8.0 - cfg.mu) * r.choquard) / m;
  const double P = 2.0 * r.lap_sq + cfg.beta * r.grad_sq + 0.5 * (8.0 - cfg.mu) * r.choquard - 2.0 * Estar;
  r.pohozaev_residual = std::abs(P) / (2.0 * r.lap_sq);
  const auto rg = reduced_gradient_at(cfg, u, s);
  const Field bl = apply_operator(u, OperatorSymbol::bilaplacian());
  r.pde_residual = std::sqrt(mass_sq(rg.tangent)) / (e4 * std::sqrt(mass_sq(bl)));
  double lo = 0.0, hi = 0.0;
  for (double v : u.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.min_over_max = hi > 0.0 ? lo / hi : -1.0;
  // Diagnostic only: M taken as the state's own H^2-type norm.
  const double M = r.lap_sq + 2.0 * r.grad_sq + m;
  r.beta_star_estimate = (8.0 - cfg.mu) / (2.0 * M) * r.choquard;
  return r;
}

namespace detail {

// y = P^{-1} v with P = e^{4s}|xi|^4 + beta e^{2s}|xi|^2 + sigma.
inline Field precondition(const Field& v, double s, double beta, double sigma) {
  const double e4 = std::exp(4.0 * s), b2 = beta * std::exp(2.0 * s);
  return apply_multiplier(v, [&](double k2) { return 1.0 / (e4 * k2 * k2 + b2 * k2 + sigma); });
}

// Tangent preconditioned gradient: y - (<y,u>/<z,u>) z, y = P^{-1} G, z = P^{-1} u.
inline Field tangent_preconditioned(const Field& G, const Field& u, double s, double beta, double sigma) {
  Field y = precondition(G, s, beta, sigma);
  const Field z = precondition(u, s, beta, sigma);
  y.axpy(-inner(y, u) / inner(z, u), z);
  return y;
}

inline Field retract(const Field& u, double tau, const Field& d, double c) {
  Field v = u;
  v.axpy(tau, d);
  return rescale_mass(v, c);
}

}  // namespace detail

inline GroundState solve_ground_state(const ProblemConfig& cfg, const SolveSettings& st,
                                      std::optional<Field> start = std::nullopt) {
  if (!(st.tol_grad > 0.0 && st.tol_p > 0.0)) throw ConfigError("solver: tolerances must be positive");
  GroundState out;
  auto& rep = out.report;
  Field u = start ? rescale_mass(*start, cfg.c) : initial_field(cfg, st.init);
  if (!cfg.nl.is_homogeneous()) {
    ConditionParams cp;
    cp.mu = cfg.mu;
    cp.theta = cfg.nl.p();
    cp.nu = cfg.nl.p() - 1.0 - 1e-9;
    const auto cr = check_conditions(cfg.nl, cp);
    if (!cr.all_passed()) rep.warnings.push_back("nonlinearity fails some growth hypotheses on the sample grid");
  } else if (!(cfg.nl.p() > 3.0 - 0.25 * cfg.mu)) {
    rep.warnings.push_back("p <= 3 - mu/4: the fiber maximum need not exist");
  }

  FiberOptions fopt;
  fopt.curvature = false;
  auto probe = [&](const Field& v, double s_hint) {
    FiberOptions o = fopt;
    o.start = s_hint;
    FiberMap fiber(cfg, v);
    const auto fd = fiber_maximize(fiber, o);
    return detail::Probe{fd.g_at_su, fd.s_u, reduced_gradient_at(cfg, v, fd.s_u)};
  };

  detail::Probe cur = probe(u, 0.0);
  const double s_ref = cur.s_u;  // frame scale fixed by the initial guess
  // Limited-memory BFGS pairs, kept in the tangent space of the current iterate.
  std::vector<Field> mem_s, mem_y;
  std::vector<double> mem_rho;
  auto project = [&](Field& v, const Field& at) { v.axpy(-inner(v, at) / mass_sq(at), at); };

  auto residuals = [&](const detail::Probe& p, const Field& v) {
    const double e4 = std::exp(4.0 * p.s_u);
    const Field bl = apply_operator(v, OperatorSymbol::bilaplacian());
    return std::sqrt(mass_sq(p.grad.tangent)) / (e4 * std::sqrt(mass_sq(bl)));
  };

  constexpr double kEnergyNoise = 1e-12, kWolfeDelta = 0.1, kWolfeCurvature = 0.9;
  constexpr int kStallLimit = 5;
  int it = 0, stalled = 0;
  double res = residuals(cur, u);
  for (; it < st.max_iterations; ++it) {
    if (st.record_trace) {
      rep.energy_trace.push_back(cur.I);
      rep.residual_trace.push_back(res);
      rep.s_trace.push_back(cur.s_u);
    }
    const double mass_err = std::abs(mass_sq(u) - cfg.c * cfg.c);
    if (mass_err > 1e-10 * std::max(1.0, cfg.c * cfg.c))
      rep.warnings.push_back("mass drift " + std::to_string(mass_err) + " at iteration " + std::to_string(it));
    if (res <= st.tol_grad) break;

    // sigma ~ |lambda| keeps P comparable to the Hessian of the Lagrangian.
    const double lam = cur.grad.normal_coefficient / mass_sq(u);
    const double e4 = std::exp(4.0 * cur.s_u);
    const double sigma = std::max(std::abs(lam), 1e-6 * e4);
    const Field& g = cur.grad.tangent;

    // Two-loop recursion with H0 = gamma P^{-1} restricted to the tangent space.
    Field q = g;
    const std::size_t m = mem_s.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = mem_rho[i] * inner(mem_s[i], q);
      q.axpy(-alpha[i], mem_y[i]);
    }
    Field d = detail::tangent_preconditioned(q, u, cur.s_u, cfg.beta, sigma);
    if (m > 0) {
      const Field hy = detail::tangent_preconditioned(mem_y[m - 1], u, cur.s_u, cfg.beta, sigma);
      d *= 1.0 / (mem_rho[m - 1] * inner(mem_y[m - 1], hy));
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double b = mem_rho[i] * inner(mem_y[i], d);
      d.axpy(alpha[i] - b, mem_s[i]);
    }
    d *= -1.0;
    project(d, u);
    double slope = inner(g, d);
    if (!(slope < 0.0) && m > 0) {
      d = -1.0 * detail::tangent_preconditioned(g, u, cur.s_u, cfg.beta, sigma);
      slope = inner(g, d);
      mem_s.clear();
      mem_y.clear();
      mem_rho.clear();
    }
    if (!(slope < 0.0)) break;  // gradient vanished to roundoff

    bool accepted = false;
    double t = 1.0;
    detail::Probe next;
    Field un;
    int halvings = 0;
    for (; halvings <= st.max_halvings; ++halvings, t *= st.backtrack) {
      un = detail::retract(u, t, d, cfg.c);
      try {
        next = probe(un, cur.s_u);
      } catch (const OverflowGuardError&) {
        continue;
      } catch (const NumericalFailure&) {
        continue;
      }
      if (next.I <= cur.I + st.armijo_slope * t * slope) {
        accepted = true;
        break;
      }
      // Near the minimum the Armijo decrease drops below the rounding of I. Then
      // accept on the approximate Wolfe conditions of Hager and Zhang, which use
      // the slope phi'(t) = <grad I(u_t), d> c / ||u + t d|| instead of I itself.
      if (next.I <= cur.I + kEnergyNoise * std::abs(cur.I)) {
        Field trial = u;
        trial.axpy(t, d);
        const double phi = inner(next.grad.tangent, d) * cfg.c / std::sqrt(mass_sq(trial));
        if (phi >= kWolfeCurvature * slope && phi <= (2.0 * kWolfeDelta - 1.0) * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (!mem_s.empty()) {  // retry once from preconditioned steepest descent
        mem_s.clear();
        mem_y.clear();
        mem_rho.clear();
        continue;
      }
      rep.warnings.push_back("line search failed at iteration " + std::to_string(it));
      break;
    }

    Field sk = un - u;
    project(sk, un);
    Field yk = next.grad.tangent;
    Field gprev = g;
    project(gprev, un);
    yk = yk - gprev;
    for (auto& v : mem_s) project(v, un);
    for (auto& v : mem_y) project(v, un);
    const double sy = inner(sk, yk);
    if (sy > 1e-12 * std::sqrt(mass_sq(sk) * mass_sq(yk))) {
      if (static_cast<int>(mem_s.size()) == st.memory) {
        mem_s.erase(mem_s.begin());
        mem_y.erase(mem_y.begin());
        mem_rho.erase(mem_rho.begin());
      }
      mem_s.push_back(std::move(sk));
      mem_y.push_back(std::move(yk));
      mem_rho.push_back(1.0 / sy);
    }
    const bool flat = std::abs(next.I - cur.I) <= kEnergyNoise * std::abs(cur.I);
    u = std::move(un);
    cur = std::move(next);

    if (std::abs(cur.s_u - s_ref) > st.recenter_threshold) {
      // Pull the frame back to the reference scale; the only resampling step.
      std::vector<std::string> w;
      u = rescale_mass(mass_preserving_scaling(u, cur.s_u - s_ref, &w), cfg.c);
      for (auto& x : w) rep.warnings.push_back(x);
      cur = probe(u, s_ref);
      mem_s.clear();
      mem_y.clear();
      mem_rho.clear();
      ++rep.recenterings;
    }
    const double prev_res = res;
    res = residuals(cur, u);
    // Steps that change neither I nor the residual cannot make further progress.
    stalled = flat && !(res < (1.0 - 1e-3) * prev_res) ? stalled + 1 : 0;
    if (stalled >= kStallLimit) {
      rep.warnings.push_back("stagnated at residual " + std::to_string(res) + " after iteration " + std::to_string(it));
      ++it;
      break;
    }
  }

  detail::sign_normalize(u);
  FiberOptions fin;
  fin.start = cur.s_u;
  const auto fd = fiber_maximize(FiberMap(cfg, u), fin);
  auto warnings = std::move(rep.warnings);
  auto et = std::move(rep.energy_trace), rt = std::move(rep.residual_trace), stt = std::move(rep.s_trace);
  const int rc = rep.recenterings;
  rep = describe_state(cfg, u, fd);
  rep.warnings = std::move(warnings);
  rep.energy_trace = std::move(et);
  rep.residual_trace = std::move(rt);
  rep.s_trace = std::move(stt);
  rep.recenterings = rc;
  rep.iterations = it;
  if (fd.multimodal) rep.warnings.push_back("fiber of the final state is multimodal");
  if (!(fd.curvature_at_su < 0.0)) rep.warnings.push_back("fiber curvature at s_u is not negative");
  rep.converged = rep.pde_residual <= st.tol_grad * 10.0 && rep.pohozaev_residual <= st.tol_p &&
                  rep.mass_error <= 1e-10 * std::max(1.0, cfg.c * cfg.c) && res <= st.tol_grad;
  out.frame = std::move(u);
  return out;
}

struct SweepRow {
  double parameter = 0.0;  // c or beta
  GroundStateReport report;
  bool non_increasing = true;   // E <= E_prev (1 + 1e-6)
  bool strict_decrease = true;  // E < E_prev, required when lambda < 0
  std::string error;
};

namespace detail {

inline ProblemConfig with_mass(ProblemConfig cfg, double c) {
  cfg.c = c;
  cfg.validate_scalars();
  return cfg;
}
inline ProblemConfig with_beta(ProblemConfig cfg, double beta) {
  cfg.beta = beta;
  cfg.validate_scalars();
  return cfg;
}

}  // namespace detail

// Warm-started continuation in c; each state seeds the next after rescaling.
inline std::vector<SweepRow> sweep_mass(const ProblemConfig& tmpl, const std::vector<double>& c_list,
                                        const SolveSettings& st, std::vector<Field>* states = nullptr) {
  for (std::size_t i = 1; i < c_list.size(); ++i)
    if (!(c_list[i] > c_list[i - 1])) throw ConfigError("sweep_mass: c list must be strictly increasing");
  std::vector<SweepRow> rows;
  std::optional<Field> warm;
  for (double c : c_list) {
    SweepRow row;
    row.parameter = c;
    try {
      auto gs = solve_ground_state(detail::with_mass(tmpl, c), st, warm);
      row.report = gs.report;
      warm = gs.frame;
      if (states) states->push_back(std::move(gs.frame));
    } catch (const std::exception& e) {
      row.error = e.what();
      row.report.converged = false;
    }
    if (!rows.empty() && rows.back().error.empty() && row.error.empty()) {
      const double ep = rows.back().report.E, e = row.report.E;
      row.non_increasing = e <= ep + 1e-6 * std::abs(ep);
      row.strict_decrease = e < ep;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Independent solves per beta (parallel across `workers` threads).
inline std::vector<SweepRow> sweep_beta(const ProblemConfig& tmpl, const std::vector<double>& beta_list,
                                        const SolveSettings& st, int workers = 1) {
  for (double b : beta_list)
    if (!(b >= 0.0)) throw ConfigError("sweep_beta: beta values must be >= 0");
  std::vector<SweepRow> rows(beta_list.size());
  auto run = [&](std::size_t i) {
    rows[i].parameter = beta_list[i];
    try {
      rows[i].report = solve_ground_state(detail::with_beta(tmpl, beta_list[i]), st).report;
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  };
  const int w = std::max(1, workers);
  if (w == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k)
      pool.emplace_back([&, k] {
        for (std::size_t i = k; i < rows.size(); i += w) run(i);
        release_fft_workspaces();
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

struct RefineRow {
  int n = 0;
  double E = 0.0;
  double rel_change = std::numeric_limits<double>::quiet_NaN();  // |E_n - E_prev| / |E_n|
  bool converged = false;
};

// Same problem on successively finer grids of the same box.
inline std::vector<RefineRow> refine_check(const ProblemConfig& tmpl, const SolveSettings& st,
                                           const std::vector<int>& n_list) {
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (!(n_list[i] >= n_list[i - 1])) throw ConfigError("refine_check: N list must be non-decreasing");
  std::vector<RefineRow> rows;
  for (int n : n_list) {
    Grid g(n, tmpl.grid().length());
    auto cfg = ProblemConfig::make(g, tmpl.beta, tmpl.mu, tmpl.c, tmpl.nl, tmpl.kernel->rule());
    const auto gs = solve_ground_state(cfg, st);
    RefineRow row{n, gs.report.E, std::numeric_limits<double>::quiet_NaN(), gs.report.converged};
    if (!rows.empty()) row.rel_change = std::abs(row.E - rows.back().E) / std::abs(row.E);
    rows.push_back(row);
  }
  return rows;
}

inline InitialGuess InitialGuess::parse(const std::string& spec) {
  InitialGuess g;
  if (spec == "gaussian") return g;
  if (spec.rfind("gaussian:", 0) == 0) {
    g.width = detail::parse_number(std::string_view(spec).substr(9), "--init gaussian width");
    if (!(g.width > 0.0)) throw ConfigError("--init gaussian: width must be positive");
    return g;
  }
  if (spec.rfind("adams:", 0) == 0) {
    g.kind = Kind::Adams;
    const double n = detail::parse_number(std::string_view(spec).substr(6), "--init adams");
    if (!(n >= 2.0) || n != std::floor(n)) throw ConfigError("--init adams: n must be an integer >= 2");
    g.adams_n = static_cast<int>(n);
    return g;
  }
  if (spec.rfind("snapshot:", 0) == 0) {
    g.kind = Kind::Snapshot;
    g.path = spec.substr(9);
    if (g.path.empty()) throw ConfigError("--init snapshot: missing path");
    return g;
  }
  throw ConfigError("--init: expected gaussian[:width] | adams:n | snapshot:path, got '" + spec + "'");
}

inline std::string InitialGuess::to_string() const {
  switch (kind) {
    case Kind::Gaussian: return "gaussian:" + std::to_string(width);
    case Kind::Adams: return "adams:" + std::to_string(adams_n);
    case Kind::Snapshot: return "snapshot:" + path;
  }
  return "";
}

}  // namespace bhc
