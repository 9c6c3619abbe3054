#pragma once
// Run configuration for the command-line tool. Values come from an optional
// flat "key = value" file and from flags; a flag given on the command line
// wins over the file and is recorded as an override.

#include "bhc/errors.hpp"
#include "bhc/nonlinearity.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bhc {

inline const std::vector<std::string>& run_commands() {
  static const std::vector<std::string> cmds{"solve",  "sweep-c", "sweep-beta",     "fiber",
                                             "adams",  "verify",  "riesz-selftest", "refine"};
  return cmds;
}

struct RunConfig {
  std::string command;
  double mu = 2.0;
  double beta = 0.0;
  double c = 1.0;
  std::string nl = "power:p=4";
  int grid = 32;
  double box = 16.0;
  int workers = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::vector<double> c_list{0.6, 0.8, 1.0, 1.2, 1.4};
  std::vector<double> beta_list{0.0, 0.5, 1.0};
  std::vector<double> n_list{10, 100, 10000};
  std::vector<double> s_range{-3.0, 3.0, 61};  // lo, hi, count
  std::vector<double> t_range;                 // empty: automatic scan
  double tol_grad = 1e-8;
  double tol_p = 1e-6;
  int max_iter = 2000;
  std::string init = "gaussian";
  int fields = 100;
  std::vector<double> grid_list{16, 24};

  std::string config_file;
  std::vector<std::string> overrides;          // keys set by both file and flag
  std::map<std::string, std::string> entries;  // effective key -> value text

  Nonlinearity nonlinearity() const { return Nonlinearity::parse(nl); }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty list entry in '" + text + "'");
    out.push_back(parse_number(item, key));
  }
  return out;
}

inline std::string join_list(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

inline std::string number_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// key = value lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file '" + path + "' cannot be opened");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": missing key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

}  // namespace detail

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{"command", "mu",      "beta",   "c",        "nl",        "grid",
                                          "box",     "workers", "seed",   "out",      "c-list",    "beta-list",
                                          "n-list",  "s-range", "t-range", "tol-grad", "tol-p",    "max-iter",
                                          "init",    "fields",  "grid-list"};
  return keys;
}

// Range checks shared by every command.
inline void validate(const RunConfig& rc) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (std::find(run_commands().begin(), run_commands().end(), rc.command) == run_commands().end())
    fail("command: unknown command '" + rc.command + "'");
  if (!(rc.mu > 0.0 && rc.mu < 4.0)) fail("mu: must lie in (0,4), got " + detail::number_text(rc.mu));
  if (!(rc.beta >= 0.0)) fail("beta: must be >= 0, got " + detail::number_text(rc.beta));
  if (!(rc.c > 0.0)) fail("c: must be > 0, got " + detail::number_text(rc.c));
  if (rc.grid < 4 || rc.grid % 2 != 0) fail("grid: must be an even integer >= 4, got " + std::to_string(rc.grid));
  if (!(rc.box > 0.0)) fail("box: must be > 0, got " + detail::number_text(rc.box));
  if (rc.workers < 1) fail("workers: must be >= 1, got " + std::to_string(rc.workers));
  if (!(rc.tol_grad > 0.0)) fail("tol-grad: must be > 0");
  if (!(rc.tol_p > 0.0)) fail("tol-p: must be > 0");
  if (rc.max_iter < 0) fail("max-iter: must be >= 0");
  if (rc.fields < 2) fail("fields: must be >= 2");
  for (double c : rc.c_list)
    if (!(c > 0.0)) fail("c-list: entries must be > 0, got " + detail::number_text(c));
  for (std::size_t i = 1; i < rc.c_list.size(); ++i)
    if (!(rc.c_list[i] > rc.c_list[i - 1])) fail("c-list: must be strictly increasing");
  for (double b : rc.beta_list)
    if (!(b >= 0.0)) fail("beta-list: entries must be >= 0, got " + detail::number_text(b));
  for (double n : rc.n_list)
    if (!(n >= 2.0) || n != std::floor(n) || n > 2147483647.0)
      fail("n-list: entries must be integers >= 2, got " + detail::number_text(n));
  for (double n : rc.grid_list)
    if (!(n >= 4.0) || n != std::floor(n) || static_cast<long>(n) % 2 != 0)
      fail("grid-list: entries must be even integers >= 4, got " + detail::number_text(n));
  if (rc.s_range.size() != 3 || !(rc.s_range[0] < rc.s_range[1]) || !(rc.s_range[2] >= 2.0))
    fail("s-range: expected lo,hi,count with lo < hi and count >= 2");
  if (!rc.t_range.empty() &&
      (rc.t_range.size() != 3 || !(rc.t_range[0] > 0.0) || !(rc.t_range[0] < rc.t_range[1]) || !(rc.t_range[2] >= 2.0)))
    fail("t-range: expected lo,hi,count with 0 < lo < hi and count >= 2");
  rc.nonlinearity();  // throws on a malformed spec
}

// Parses argv as given to main. Throws ConfigError naming the offending key
// or token, and lets CLI::CallForHelp through for --help.
inline RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig rc;
  CLI::App app{"Normalized ground states of the biharmonic Choquard equation in R^4", "bhc"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file, c_list, beta_list, n_list, s_range, t_range, grid_list;
  app.add_option("command", rc.command, "solve | sweep-c | sweep-beta | fiber | adams | verify | riesz-selftest | refine")
      ->required();
  app.add_option("--config", config_file, "flat key = value file; flags override it");
  app.add_option("--mu", rc.mu, "Riesz exponent in (0,4)");
  app.add_option("--beta", rc.beta, "coefficient of -Delta, >= 0");
  app.add_option("--c", rc.c, "mass: int u^2 = c^2");
  app.add_option("--nl", rc.nl, "power:p=P | expcrit:p=P[,alpha0=A]");
  app.add_option("--grid", rc.grid, "grid points per axis");
  app.add_option("--box", rc.box, "box length");
  app.add_option("--workers", rc.workers, "threads for sweep-beta");
  app.add_option("--seed", rc.seed, "seed for random test fields");
  app.add_option("--out", rc.out, "output directory");
  app.add_option("--c-list", c_list, "comma-separated masses");
  app.add_option("--beta-list", beta_list, "comma-separated beta values");
  app.add_option("--n-list", n_list, "comma-separated Adams concentration indices");
  app.add_option("--s-range", s_range, "lo,hi,count for the fiber scan");
  app.add_option("--t-range", t_range, "lo,hi,count for the mountain scan");
  app.add_option("--tol-grad", rc.tol_grad, "tangent residual tolerance");
  app.add_option("--tol-p", rc.tol_p, "Pohozaev residual tolerance");
  app.add_option("--max-iter", rc.max_iter, "iteration cap");
  app.add_option("--init", rc.init, "gaussian[:width] | adams:n | snapshot:path");
  app.add_option("--fields", rc.fields, "random fields for verify");
  app.add_option("--grid-list", grid_list, "comma-separated grid sizes for verify and refine");

  // Pass 1 finds --config; pass 2 parses file entries followed by the real flags.
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string file_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file_path = args[i].substr(9);
  }
  std::vector<std::string> merged;
  std::set<std::string> file_keys;
  std::string file_command;
  if (!file_path.empty()) {
    for (auto& [key, value] : detail::read_config_file(file_path)) {
      if (!config_keys().count(key)) throw ConfigError("config file: unknown key '" + key + "'");
      file_keys.insert(key);
      if (key == "command") {
        file_command = value;
        continue;
      }
      merged.push_back("--" + key + "=" + value);
    }
  }
  std::set<std::string> flag_keys;
  bool has_positional = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) {
      has_positional = true;
      merged.push_back(a);
      continue;
    }
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    if (key == "help") {
      merged.push_back(a);
      continue;
    }
    if (key != "config" && !config_keys().count(key)) throw ConfigError("unknown flag '" + a + "'");
    flag_keys.insert(key);
    if (eq != std::string::npos) {
      merged.push_back(a);
    } else {
      if (i + 1 >= args.size()) throw ConfigError(key + ": missing value for '" + a + "'");
      merged.push_back(a + "=" + args[++i]);
    }
  }
  if (!has_positional && !file_command.empty()) merged.insert(merged.begin(), file_command);
  if (has_positional && !file_command.empty()) flag_keys.insert("command");

  std::vector<std::string> rev(merged.rbegin(), merged.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.get_name()) + ": " + e.what());
  }
  if (!c_list.empty()) rc.c_list = detail::parse_list(c_list, "c-list");
  if (!beta_list.empty()) rc.beta_list = detail::parse_list(beta_list, "beta-list");
  if (!n_list.empty()) rc.n_list = detail::parse_list(n_list, "n-list");
  if (!s_range.empty()) rc.s_range = detail::parse_list(s_range, "s-range");
  if (!t_range.empty()) rc.t_range = detail::parse_list(t_range, "t-range");
  if (!grid_list.empty()) rc.grid_list = detail::parse_list(grid_list, "grid-list");
  rc.config_file = file_path;
  for (const auto& k : file_keys)
    if (flag_keys.count(k)) rc.overrides.push_back(k);
  validate(rc);

  rc.entries = {{"command", rc.command},
                {"mu", detail::number_text(rc.mu)},
                {"beta", detail::number_text(rc.beta)},
                {"c", detail::number_text(rc.c)},
                {"nl", rc.nl},
                {"grid", std::to_string(rc.grid)},
                {"box", detail::number_text(rc.box)},
                {"workers", std::to_string(rc.workers)},
                {"seed", std::to_string(rc.seed)},
                {"out", rc.out},
                {"c-list", detail::join_list(rc.c_list)},
                {"beta-list", detail::join_list(rc.beta_list)},
                {"n-list", detail::join_list(rc.n_list)},
                {"s-range", detail::join_list(rc.s_range)},
                {"t-range", detail::join_list(rc.t_range)},
                {"tol-grad", detail::number_text(rc.tol_grad)},
                {"tol-p", detail::number_text(rc.tol_p)},
                {"max-iter", std::to_string(rc.max_iter)},
                {"init", rc.init},
                {"fields", std::to_string(rc.fields)},
                {"grid-list", detail::join_list(rc.grid_list)}};
  return rc;
}

inline std::string help_text() {
  return "usage: bhc <command> [--config FILE] [--mu M] [--beta B] [--c C] [--nl SPEC] [--grid N] [--box L]\n"
         "           [--workers W] [--seed S] [--out DIR] [--c-list ..] [--beta-list ..] [--n-list ..]\n"
         "           [--s-range lo,hi,count] [--t-range lo,hi,count] [--tol-grad T] [--tol-p T]\n"
         "           [--max-iter K] [--init gaussian[:w]|adams:n|snapshot:path] [--fields R] [--grid-list ..]\n"
         "commands: solve sweep-c sweep-beta fiber adams verify riesz-selftest refine\n"
         "exit codes: 0 ok, 1 convergence failure, 2 invariant violation, 3 config error\n";
}

}  // namespace bhc
