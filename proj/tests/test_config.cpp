#include "bhc/config.hpp"
#include "bhc/report.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

using namespace bhc;
namespace fs = std::filesystem;

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "bhc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bhc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BHC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, Defaults) {
  const auto rc = parse({"solve"});
  EXPECT_EQ(rc.command, "solve");
  EXPECT_EQ(rc.mu, 2.0);
  EXPECT_EQ(rc.grid, 32);
  EXPECT_EQ(rc.entries.at("nl"), "power:p=4");
  EXPECT_TRUE(rc.overrides.empty());
}

TEST(Config, FlagsInBothSpellings) {
  const auto rc = parse({"adams", "--mu", "1.5", "--beta=0.25", "--n-list", "10,100", "--nl", "expcrit:p=4"});
  EXPECT_EQ(rc.mu, 1.5);
  EXPECT_EQ(rc.beta, 0.25);
  EXPECT_EQ(rc.n_list, (std::vector<double>{10, 100}));
  EXPECT_EQ(rc.nonlinearity().kind(), NlKind::ExpCriticalPower);
}

TEST(Config, NegativeValuesAreNotFlags) {
  const auto rc = parse({"fiber", "--s-range", "-2,1,5"});
  EXPECT_EQ(rc.s_range, (std::vector<double>{-2, 1, 5}));
}

TEST(Config, MuOutOfRangeNamesTheKey) {
  try {
    parse({"solve", "--mu", "5"});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mu"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("(0,4)"), std::string::npos);
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse({"solve", "--bogus", "1"}), ConfigError);
  EXPECT_THROW(parse({"launch"}), ConfigError);
  EXPECT_THROW(parse({"solve", "--grid", "15"}), ConfigError);
  EXPECT_THROW(parse({"solve", "--c", "0"}), ConfigError);
  EXPECT_THROW(parse({"sweep-c", "--c-list", "1,0.5"}), ConfigError);
  EXPECT_THROW(parse({"adams", "--n-list", "10.5"}), ConfigError);
  EXPECT_THROW(parse({"solve", "--nl", "power:p=1"}), ConfigError);
  EXPECT_THROW(parse({"solve", "--mu"}), ConfigError);
  EXPECT_THROW(parse({"solve", "--c-list", "1,,2"}), ConfigError);
}

TEST(Config, FileValuesAndFlagOverrides) {
  const auto dir = scratch("config");
  const auto path = dir / "run.cfg";
  {
    std::ofstream out(path);
    out << "# benchmark\ncommand = solve\nmu = 3\nc = 2.5   # mass\ngrid = 16\n";
  }
  const auto rc = parse({"--config", path.string(), "--c", "1.5"});
  EXPECT_EQ(rc.command, "solve");
  EXPECT_EQ(rc.mu, 3.0);
  EXPECT_EQ(rc.c, 1.5);
  EXPECT_EQ(rc.grid, 16);
  EXPECT_EQ(rc.overrides, (std::vector<std::string>{"c"}));
  EXPECT_EQ(rc.config_file, path.string());
}

TEST(Config, FileErrors) {
  const auto dir = scratch("config_bad");
  const auto path = dir / "bad.cfg";
  {
    std::ofstream out(path);
    out << "colour = blue\n";
  }
  EXPECT_THROW(parse({"solve", "--config", path.string()}), ConfigError);
  {
    std::ofstream out(path);
    out << "mu 2\n";
  }
  EXPECT_THROW(parse({"solve", "--config", path.string()}), ConfigError);
  EXPECT_THROW(parse({"solve", "--config", (dir / "missing.cfg").string()}), ConfigError);
}

TEST(Report, NumbersRoundTripAndNonFiniteBecomesNull) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_TRUE(num(std::numeric_limits<double>::infinity()).is_null());
  const auto rc = parse({"adams"});
  const auto env = report_envelope(rc, "ok", Json::object());
  EXPECT_EQ(env["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(env["provenance"]["config"]["command"], "adams");
}

TEST(Report, CsvCarriesProvenance) {
  const auto rc = parse({"adams", "--mu", "3"});
  CsvTable t({"a", "b"});
  t.add({"1", "2"});
  const auto text = t.render(rc);
  EXPECT_NE(text.find("# mu = 3\n"), std::string::npos);
  EXPECT_NE(text.find("a,b\n1,2\n"), std::string::npos);
  EXPECT_THROW(t.add({"1"}), std::invalid_argument);
}

TEST(Cli, ConfigErrorExitCode) {
  EXPECT_EQ(run_cli("solve --mu 5"), 3);
  EXPECT_EQ(run_cli("solve --unknown 1"), 3);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, AdamsRunIsDeterministic) {
  const auto a = scratch("cli_a"), b = scratch("cli_b");
  const std::string args = " adams --n-list 10,100 --nl expcrit:p=4";
  ASSERT_EQ(run_cli(args + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli(args + " --out " + b.string()), 0);
  for (const char* f : {"adams.csv", "report.json"}) {
    std::string ta = slurp(a / f), tb = slurp(b / f);
    // The output directory is part of the recorded configuration.
    for (auto* t : {&ta, &tb}) {
      for (const auto& d : {a.string(), b.string()})
        for (auto pos = t->find(d); pos != std::string::npos; pos = t->find(d)) t->replace(pos, d.size(), "OUT");
    }
    EXPECT_EQ(ta, tb) << f;
  }
  const auto j = nlohmann::json::parse(slurp(a / "report.json"));
  EXPECT_EQ(j["command"], "adams");
  EXPECT_EQ(j["results"]["profiles"].size(), 2u);
  const auto csv = slurp(a / "adams.csv");
  EXPECT_NE(csv.find("n,M1,M2,M3,l2_closed,l2_quad,grad_closed,grad_quad,lap_closed,lap_quad,t_n,gmax,bound"),
            std::string::npos);
}

TEST(Cli, FiberRunWritesTable) {
  const auto dir = scratch("cli_fiber");
  ASSERT_EQ(run_cli("fiber --grid 8 --box 8 --s-range -1,1,5 --out " + dir.string()), 0);
  const auto csv = slurp(dir / "fiber.csv");
  EXPECT_NE(csv.find("s,g,gprime,psi\n"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j["status"], "ok");
  EXPECT_FALSE(j["results"]["fiber"]["multimodal"].get<bool>());
}

TEST(Cli, UnconvergedSolveExitCode) {
  const auto dir = scratch("cli_solve");
  EXPECT_EQ(run_cli("solve --grid 8 --box 8 --max-iter 2 --out " + dir.string()), 1);
  EXPECT_TRUE(fs::exists(dir / "state.bch4"));
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j["status"], "not_converged");
}

TEST(Cli, RefineUsesTheGridList) {
  const auto dir = scratch("cli_refine");
  EXPECT_EQ(run_cli("refine --grid-list 8,12 --box 8 --max-iter 2 --out " + dir.string()), 1);
  const auto csv = slurp(dir / "refine.csv");
  EXPECT_NE(csv.find("N,E,rel_change,converged\n8,"), std::string::npos);
  EXPECT_NE(csv.find("\n12,"), std::string::npos);
}

TEST(Cli, CreatesNestedOutputDirectory) {
  const auto dir = scratch("cli_nested") / "a" / "b";
  EXPECT_EQ(run_cli("solve --grid 8 --box 8 --max-iter 2 --out " + dir.string()), 1);
  EXPECT_TRUE(fs::exists(dir / "state.bch4"));
}

}  // namespace
