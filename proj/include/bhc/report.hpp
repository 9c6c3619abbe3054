#pragma once
// JSON reports and CSV tables. Every file carries the effective run
// configuration and the code version; doubles are written with 17
// significant digits so identical runs give identical bytes.

#include "bhc/adams.hpp"
#include "bhc/config.hpp"
#include "bhc/functional.hpp"
#include "bhc/nonlinearity.hpp"
#include "bhc/solver.hpp"
#include "bhc/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef BHC_VERSION
#define BHC_VERSION "0.0.0"
#endif

namespace bhc {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-finite values become null (JSON has no inf/nan).
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json num_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json provenance(const RunConfig& rc) {
  Json cfg = Json::object();
  for (const auto& [k, v] : rc.entries) cfg[k] = v;
  return Json{{"version", BHC_VERSION},
              {"config", cfg},
              {"config_file", rc.config_file},
              {"overrides", rc.overrides}};
}

inline Json report_envelope(const RunConfig& rc, const std::string& status, Json results) {
  return Json{{"schema_version", kReportSchemaVersion},
              {"command", rc.command},
              {"status", status},
              {"provenance", provenance(rc)},
              {"results", std::move(results)}};
}

inline Json to_json(const GroundStateReport& r) {
  return Json{{"E", num(r.E)},
              {"lambda_direct", num(r.lambda_direct)},
              {"lambda_pohozaev", num(r.lambda_pohozaev)},
              {"pohozaev_residual", num(r.pohozaev_residual)},
              {"pde_residual", num(r.pde_residual)},
              {"mass_sq", num(r.mass_sq)},
              {"mass_error", num(r.mass_error)},
              {"lap_sq", num(r.lap_sq)},
              {"grad_sq", num(r.grad_sq)},
              {"choquard", num(r.choquard)},
              {"s_u", num(r.s_u)},
              {"min_over_max", num(r.min_over_max)},
              {"beta_star_estimate", num(r.beta_star_estimate)},
              {"iterations", r.iterations},
              {"recenterings", r.recenterings},
              {"converged", r.converged},
              {"energy_trace", num_array(r.energy_trace)},
              {"residual_trace", num_array(r.residual_trace)},
              {"s_trace", num_array(r.s_trace)},
              {"warnings", r.warnings}};
}

inline Json to_json(const FiberDiagnostics& d) {
  return Json{{"s_u", num(d.s_u)},
              {"g_at_su", num(d.g_at_su)},
              {"gprime_at_su", num(d.gprime_at_su)},
              {"curvature_at_su", num(d.curvature_at_su)},
              {"multimodal", d.multimodal},
              {"sign_changes", d.sign_changes},
              {"s_lo", num(d.s_lo)},
              {"s_hi", num(d.s_hi)},
              {"bisection_steps", d.bisection_steps},
              {"s_samples", num_array(d.s_samples)},
              {"g_values", num_array(d.g_values)},
              {"gprime_values", num_array(d.gprime_values)}};
}

inline Json to_json(const ConditionReport& c) {
  Json items = Json::array();
  for (const auto& r : c.results) {
    items.push_back(Json{{"name", r.name},
                         {"passed", r.passed},
                         {"proxy", r.proxy},
                         {"witness_t", r.witness_t ? num(*r.witness_t) : Json(nullptr)},
                         {"witness_s", r.witness_s ? num(*r.witness_s) : Json(nullptr)},
                         {"detail", r.detail}});
  }
  return Json{{"admissible", c.admissible}, {"admissibility_detail", c.admissibility_detail}, {"conditions", items}};
}

inline Json to_json(const AdamsNorms& a) {
  return Json{{"n", a.n},
              {"M1", num(a.moments.M1)},
              {"M2", num(a.moments.M2)},
              {"M3", num(a.moments.M3)},
              {"M3_laplacian", num(a.moments.M3_laplacian)},
              {"l2_closed", num(a.closed.l2)},
              {"l2_quad", num(a.quadrature.l2)},
              {"grad_closed", num(a.closed.grad)},
              {"grad_quad", num(a.quadrature.grad)},
              {"lap_closed", num(a.closed.lap)},
              {"lap_closed_laplacian", num(a.lap_closed_laplacian)},
              {"lap_quad", num(a.quadrature.lap)},
              {"inner_value", num(a.inner_value)},
              {"outer_value", num(a.outer_value)},
              {"inner_slope", num(a.inner_slope)},
              {"outer_slope", num(a.outer_slope)}};
}

inline Json to_json(const MountainResult& m) {
  return Json{{"n", m.n},
              {"t_n", num(m.t_n)},
              {"gmax", num(m.gmax)},
              {"bound", num(m.bound)},
              {"bound_ok", m.bound_ok},
              {"interior", m.interior},
              {"t_guard", num(m.t_guard)},
              {"slope_sign_changes", m.slope_sign_changes},
              {"t", num_array(m.t)},
              {"g", num_array(m.g)}};
}

inline Json to_json(const VerifyReport& v) {
  Json res = Json::array();
  for (const auto& r : v.resolutions)
    res.push_back(Json{{"n", r.n},
                       {"interp_violations", r.interp_violations},
                       {"cs_violations", r.cs_violations},
                       {"max_interp_ratio", num(r.max_interp_ratio)},
                       {"max_cs_ratio", num(r.max_cs_ratio)},
                       {"gn_constant", num(r.gn_constant)},
                       {"hls_constant", num(r.hls_constant)},
                       {"adams_constant", num(r.adams_constant)},
                       {"adams_evaluated", r.adams_evaluated},
                       {"adams_skipped", r.adams_skipped},
                       {"kernel_min_spectrum", num(r.kernel_min_spectrum)}});
  return Json{{"resolutions", res},
              {"plane_wave_residual", num(v.plane_wave_residual)},
              {"hls_sharp", num(v.hls_sharp)},
              {"gn_spread", num(v.gn_spread)},
              {"hls_spread", num(v.hls_spread)},
              {"gn_stable", v.gn_stable},
              {"hls_stable", v.hls_stable},
              {"adams_growth_suspected", v.adams_growth_suspected},
              {"violations", v.violations},
              {"witnesses", v.witnesses},
              {"passed", v.passed()}};
}

inline Json to_json(const RieszSelftest& t) {
  Json checks = Json::array();
  for (const auto& c : t.checks)
    checks.push_back(Json{{"mu", num(c.mu)},
                          {"direct_rel_error", num(c.direct_rel_error)},
                          {"gaussian_n", c.gaussian_n},
                          {"gaussian_rel_error", num_array(c.gaussian_rel_error)},
                          {"improving", c.improving}});
  return Json{{"checks", checks},
              {"direct_tolerance", num(t.direct_tolerance)},
              {"gaussian_tolerance", num(t.gaussian_tolerance)},
              {"passed", t.passed()}};
}

inline Json to_json(const SweepRow& r) {
  return Json{{"parameter", num(r.parameter)},
              {"report", to_json(r.report)},
              {"non_increasing", r.non_increasing},
              {"strict_decrease", r.strict_decrease},
              {"error", r.error}};
}

inline Json to_json(const RefineRow& r) {
  return Json{{"n", r.n}, {"E", num(r.E)}, {"rel_change", num(r.rel_change)}, {"converged", r.converged}};
}

namespace detail {

inline void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + parent.string() + "': " + ec.message());
  }
}

}  // namespace detail

inline void write_json(const std::string& path, const Json& j) {
  detail::ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// CSV with '#' provenance lines, a header row and 17-digit numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
    rows_.push_back(std::move(row));
  }

  std::string render(const RunConfig& rc) const {
    std::string s = "# bhc " + std::string(BHC_VERSION) + " " + rc.command + "\n";
    for (const auto& [k, v] : rc.entries) s += "# " + k + " = " + v + "\n";
    for (const auto& k : rc.overrides) s += "# override: " + k + "\n";
    s += join(columns_);
    for (const auto& r : rows_) s += join(r);
    return s;
  }

  void write(const std::string& path, const RunConfig& rc) const {
    detail::ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << render(rc);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s + "\n";
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string csv_bool(bool b) { return b ? "1" : "0"; }

// Columns n..bound as fixed by the module interface, then the Laplacian
// reading of the third moment.
inline CsvTable adams_table(const std::vector<AdamsNorms>& norms, const std::vector<MountainResult>& scans) {
  CsvTable t({"n", "M1", "M2", "M3", "l2_closed", "l2_quad", "grad_closed", "grad_quad", "lap_closed", "lap_quad",
              "t_n", "gmax", "bound", "m3_laplacian", "lap_closed_laplacian"});
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const auto& a = norms[i];
    const MountainResult* m = i < scans.size() ? &scans[i] : nullptr;
    t.add({std::to_string(a.n), format_double(a.moments.M1), format_double(a.moments.M2), format_double(a.moments.M3),
           format_double(a.closed.l2), format_double(a.quadrature.l2), format_double(a.closed.grad),
           format_double(a.quadrature.grad), format_double(a.closed.lap), format_double(a.quadrature.lap),
           m ? format_double(m->t_n) : "nan", m ? format_double(m->gmax) : "nan", m ? format_double(m->bound) : "nan",
           format_double(a.moments.M3_laplacian), format_double(a.lap_closed_laplacian)});
  }
  return t;
}

inline CsvTable sweep_table(const std::vector<SweepRow>& rows, const std::string& parameter) {
  CsvTable t({parameter, "E", "lambda_direct", "lambda_pohozaev", "pohozaev_residual", "pde_residual", "mass_error",
              "beta_star_estimate", "converged", "non_increasing", "strict_decrease", "error"});
  for (const auto& r : rows) {
    const auto& g = r.report;
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    t.add({format_double(r.parameter), format_double(g.E), format_double(g.lambda_direct),
           format_double(g.lambda_pohozaev), format_double(g.pohozaev_residual), format_double(g.pde_residual),
           format_double(g.mass_error), format_double(g.beta_star_estimate), csv_bool(g.converged),
           csv_bool(r.non_increasing), csv_bool(r.strict_decrease), err});
  }
  return t;
}

}  // namespace bhc
