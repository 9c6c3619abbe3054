// Command-line front end: solve, sweeps, fiber and Adams scans, the
// inequality suite, the Riesz self-test and grid refinement.
//
// Exit codes: 0 ok, 1 convergence failure, 2 invariant violation, 3 config error.

#include "bhc/bhc.hpp"
#include "bhc/config.hpp"
#include "bhc/report.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <system_error>
#include <vector>

namespace {

using namespace bhc;

constexpr int kOk = 0;
constexpr int kNotConverged = 1;
constexpr int kViolation = 2;
constexpr int kConfigError = 3;

std::string out_path(const RunConfig& rc, const std::string& name) {
  return (std::filesystem::path(rc.out) / name).string();
}

ProblemConfig problem(const RunConfig& rc, int n) {
  return ProblemConfig::make(Grid(n, rc.box), rc.beta, rc.mu, rc.c, rc.nonlinearity());
}

SolveSettings settings(const RunConfig& rc) {
  SolveSettings st;
  st.max_iterations = rc.max_iter;
  st.tol_grad = rc.tol_grad;
  st.tol_p = rc.tol_p;
  st.init = InitialGuess::parse(rc.init);
  return st;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

int cmd_solve(const RunConfig& rc) {
  const auto cfg = problem(rc, rc.grid);
  const auto gs = solve_ground_state(cfg, settings(rc));
  const auto& r = gs.report;
  write_snapshot(out_path(rc, "state.bch4"), gs.frame);
  write_json(out_path(rc, "report.json"),
             report_envelope(rc, r.converged ? "ok" : "not_converged", Json{{"ground_state", to_json(r)}}));
  std::printf("E = %s  lambda = %s  P-residual = %.3g  PDE residual = %.3g  iterations = %d  converged = %s\n",
              format_double(r.E).c_str(), format_double(r.lambda_direct).c_str(), r.pohozaev_residual, r.pde_residual,
              r.iterations, r.converged ? "yes" : "no");
  return r.converged ? kOk : kNotConverged;
}

int sweep_status(const std::vector<SweepRow>& rows, bool check_monotone) {
  bool all_conv = true, monotone = true;
  for (const auto& r : rows) {
    all_conv = all_conv && r.error.empty() && r.report.converged;
    if (check_monotone) {
      monotone = monotone && r.non_increasing;
      if (r.report.lambda_direct < 0.0) monotone = monotone && r.strict_decrease;
    }
  }
  if (!all_conv) return kNotConverged;
  return monotone ? kOk : kViolation;
}

int cmd_sweep(const RunConfig& rc, bool mass) {
  const auto cfg = problem(rc, rc.grid);
  const auto st = settings(rc);
  const auto rows = mass ? sweep_mass(cfg, rc.c_list, st) : sweep_beta(cfg, rc.beta_list, st, rc.workers);
  const std::string name = mass ? "sweep.csv" : "sweep_beta.csv";
  sweep_table(rows, mass ? "c" : "beta").write(out_path(rc, name), rc);
  Json arr = Json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  const int status = sweep_status(rows, mass);
  write_json(out_path(rc, "report.json"),
             report_envelope(rc, status == kOk ? "ok" : status == kNotConverged ? "not_converged" : "violation",
                             Json{{"rows", arr}}));
  for (const auto& r : rows)
    std::printf("%s = %-8s E = %-24s lambda = %-24s converged = %s\n", mass ? "c" : "beta",
                format_double(r.parameter).c_str(), format_double(r.report.E).c_str(),
                format_double(r.report.lambda_direct).c_str(), r.report.converged ? "yes" : "no");
  return status;
}

int cmd_fiber(const RunConfig& rc) {
  const auto cfg = problem(rc, rc.grid);
  const Field u = initial_field(cfg, InitialGuess::parse(rc.init));
  const int count = static_cast<int>(rc.s_range[2]);
  std::vector<double> s_list;
  for (int i = 0; i < count; ++i) s_list.push_back(rc.s_range[0] + (rc.s_range[1] - rc.s_range[0]) * i / (count - 1));
  FiberMap fiber(cfg, u);
  CsvTable t({"s", "g", "gprime", "psi"});
  const auto psi = psi_scan(cfg, u, s_list);
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    const auto p = fiber.evaluate(s_list[i], 1);
    t.add({format_double(s_list[i]), format_double(p.g), format_double(p.gprime), format_double(psi[i])});
  }
  t.write(out_path(rc, "fiber.csv"), rc);
  const auto fd = fiber_maximize(fiber);
  ConditionParams cp;
  cp.mu = rc.mu;
  cp.theta = cfg.nl.p();
  cp.nu = cfg.nl.p() - 1.0;
  const auto cond = check_conditions(cfg.nl, cp);
  bool psi_increasing = true;
  for (std::size_t i = 1; i < psi.size(); ++i) psi_increasing = psi_increasing && psi[i] >= psi[i - 1];
  const bool ok = !fd.multimodal && fd.curvature_at_su < 0.0;
  write_json(out_path(rc, "report.json"),
             report_envelope(rc, ok ? "ok" : "violation",
                             Json{{"fiber", to_json(fd)},
                                  {"psi_increasing", psi_increasing},
                                  {"reduced_energy", num(fd.g_at_su)},
                                  {"conditions", to_json(cond)}}));
  std::printf("s_u = %s  I(u) = %s  g''(s_u) = %s  unimodal = %s\n", format_double(fd.s_u).c_str(),
              format_double(fd.g_at_su).c_str(), format_double(fd.curvature_at_su).c_str(),
              fd.multimodal ? "no" : "yes");
  return ok ? kOk : kViolation;
}

int cmd_adams(const RunConfig& rc) {
  const auto nl = rc.nonlinearity();
  std::vector<AdamsNorms> norms;
  std::vector<MountainResult> scans;
  std::vector<double> t_grid;
  if (!rc.t_range.empty()) {
    const int count = static_cast<int>(rc.t_range[2]);
    for (int i = 0; i < count; ++i) t_grid.push_back(rc.t_range[0] + (rc.t_range[1] - rc.t_range[0]) * i / (count - 1));
  }
  bool c1_ok = true;
  Json items = Json::array();
  for (double nd : rc.n_list) {
    const int n = static_cast<int>(nd);
    norms.push_back(adams_norms(n));
    scans.push_back(mountain_scan(rc.beta, rc.mu, rc.c, nl, n, t_grid));
    const auto& a = norms.back();
    const double slope_scale = std::max(std::abs(a.inner_slope), 1.0);
    c1_ok = c1_ok && std::abs(a.inner_value - a.outer_value) <= 1e-12 * std::max(1.0, std::abs(a.inner_value)) &&
            std::abs(a.inner_slope - a.outer_slope) <= 1e-12 * slope_scale;
    items.push_back(Json{{"norms", to_json(a)}, {"mountain", to_json(scans.back())}});
    std::printf("n = %-8d lap quad = %-22s lap closed (literal M3) = %-22s gmax = %-22s bound_ok = %s\n", n,
                format_double(a.quadrature.lap).c_str(), format_double(a.closed.lap).c_str(),
                format_double(scans.back().gmax).c_str(), scans.back().bound_ok ? "yes" : "no");
  }
  adams_table(norms, scans).write(out_path(rc, "adams.csv"), rc);
  write_json(out_path(rc, "report.json"),
             report_envelope(rc, c1_ok ? "ok" : "violation", Json{{"c_mu", num(c_mu(rc.mu))}, {"profiles", items}}));
  return c1_ok ? kOk : kViolation;
}

int cmd_verify(const RunConfig& rc) {
  VerifyOptions opt;
  opt.mu = rc.mu;
  opt.fields = rc.fields;
  opt.seed = rc.seed;
  opt.box = rc.box;
  opt.grids.clear();
  for (double n : rc.grid_list) opt.grids.push_back(static_cast<int>(n));
  opt.witness_dir = out_path(rc, "witnesses");
  const auto v = run_verify(opt);
  write_json(out_path(rc, "report.json"),
             report_envelope(rc, v.inequalities_hold() ? "ok" : "violation", Json{{"verify", to_json(v)}}));
  for (const auto& r : v.resolutions)
    std::printf("N = %-4d violations (interp, pairing) = (%d, %d)  B_p ~ %.6f  C_HLS ~ %.6f  Adams ~ %.6g\n", r.n,
                r.interp_violations, r.cs_violations, r.gn_constant, r.hls_constant, r.adams_constant);
  return v.inequalities_hold() ? kOk : kViolation;
}

int cmd_riesz_selftest(const RunConfig& rc) {
  const auto t = riesz_selftest({1.0, 2.0, 3.0}, {32, 48}, 8.0, rc.seed);
  write_json(out_path(rc, "report.json"), report_envelope(rc, t.passed() ? "ok" : "violation", Json{{"riesz", to_json(t)}}));
  for (const auto& c : t.checks) {
    std::printf("mu = %g  direct rel error = %.3g  Gaussian rel error:", c.mu, c.direct_rel_error);
    for (std::size_t i = 0; i < c.gaussian_n.size(); ++i) std::printf(" N=%d %.3g", c.gaussian_n[i], c.gaussian_rel_error[i]);
    std::printf("\n");
  }
  return t.passed() ? kOk : kViolation;
}

int cmd_refine(const RunConfig& rc) {
  std::vector<int> ns;
  for (double n : rc.grid_list) ns.push_back(static_cast<int>(n));
  const auto rows = refine_check(problem(rc, ns.front()), settings(rc), ns);
  CsvTable t({"N", "E", "rel_change", "converged"});
  Json arr = Json::array();
  bool conv = true;
  for (const auto& r : rows) {
    t.add({std::to_string(r.n), format_double(r.E), format_double(r.rel_change), csv_bool(r.converged)});
    arr.push_back(to_json(r));
    conv = conv && r.converged;
  }
  t.write(out_path(rc, "refine.csv"), rc);
  write_json(out_path(rc, "report.json"), report_envelope(rc, conv ? "ok" : "not_converged", Json{{"rows", arr}}));
  return conv ? kOk : kNotConverged;
}

int dispatch(const RunConfig& rc) {
  std::error_code ec;
  std::filesystem::create_directories(rc.out, ec);
  if (ec) throw ConfigError("out: cannot create directory " + rc.out + ": " + ec.message());
  if (rc.command == "solve") return cmd_solve(rc);
  if (rc.command == "sweep-c") return cmd_sweep(rc, true);
  if (rc.command == "sweep-beta") return cmd_sweep(rc, false);
  if (rc.command == "fiber") return cmd_fiber(rc);
  if (rc.command == "adams") return cmd_adams(rc);
  if (rc.command == "verify") return cmd_verify(rc);
  if (rc.command == "riesz-selftest") return cmd_riesz_selftest(rc);
  if (rc.command == "refine") return cmd_refine(rc);
  throw ConfigError("command: unknown command '" + rc.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  try {
    rc = parse_config(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << help_text();
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "bhc: " << e.what() << '\n' << help_text();
    return kConfigError;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const int status = dispatch(rc);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_line("bhc " + rc.command + ": " + std::to_string(dt) + " s, exit " + std::to_string(status));
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "bhc: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalFailure& e) {
    std::cerr << "bhc: " << e.what() << '\n';
    return kNotConverged;
  } catch (const OverflowGuardError& e) {
    std::cerr << "bhc: " << e.what() << " (try a smaller c or a subcritical alpha0)\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "bhc: " << e.what() << '\n';
    return kViolation;
  }
}
