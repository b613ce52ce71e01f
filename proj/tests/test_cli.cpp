#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chns/config.hpp"
#include "chns/errors.hpp"
#include "chns/field_io.hpp"
#include "chns/runner.hpp"

using namespace chns;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = CHNS_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("chns_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHNS_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// Small stripes scenario where step 0 needs more than one Newton iteration.
const char* kStiff = R"({
  "grid": {"nx": 6, "ny": 6, "lx": 4.0, "ly": 4.0},
  "time": {"tau": 0.05, "M": 3},
  "initial": {"phi": "stripes", "amplitude": 1.6, "width": 0.5},
  "solver": {"max_iters": 1, "polish": false, "tol": 1e-12}
})";

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_config(""), RunConfig{});
  EXPECT_EQ(parse_config("  \n"), RunConfig{});
  EXPECT_EQ(parse_config("{}"), RunConfig{});
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(config_error(R"({"time": {"tau": -1}})").find("time.tau"), std::string::npos);
  EXPECT_NE(config_error(R"({"grid": {"foo": 1}})").find("grid.foo"), std::string::npos);
  EXPECT_NE(config_error(R"({"bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(config_error(R"({"grid": {"nx": 2.5}})").find("grid.nx"), std::string::npos);
  EXPECT_NE(config_error(R"({"initial": {"phi": "blob"}})").find("initial.phi"), std::string::npos);
  EXPECT_NE(config_error(R"({"objective": {"xi": 0}})").find("xi"), std::string::npos);
  EXPECT_NE(config_error(R"({"physics": {"mean_shift": 0.2}, "potential": {"psi1": -1.0}})").find("psi1"),
            std::string::npos);
}

TEST(Config, ParseErrorReportsPosition) {
  const std::string msg = config_error("{\n  \"grid\": {\"nx\": 4,}\n}");
  EXPECT_NE(msg.find("parse error"), std::string::npos);
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Config, GoldenRoundTripsAndHashIsStable) {
  const std::string text = slurp(kSource / "configs/golden.json");
  const RunConfig c = parse_config(text);
  EXPECT_EQ(serialize(c), text);
  EXPECT_EQ(parse_config(serialize(c)), c);
  EXPECT_EQ(config_hash(c), "621d1b06a397e2c1");
  EXPECT_EQ(c.physics.grid.nx, 12);
  EXPECT_EQ(c.objective.box_upper, std::numeric_limits<double>::infinity());
  EXPECT_EQ(c.objective.box_lower, -3.0);
  RunConfig d = c;
  d.seed += 1;
  EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, CheckedInScenariosLoad) {
  for (const char* name : {"zero", "golden", "ac4_energy", "ac5_gradcheck", "ac6_optimize", "ac7_continue"})
    EXPECT_NO_THROW(load_config((kSource / "configs" / (std::string(name) + ".json")).string())) << name;
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Runner, ZeroScenarioGivesZeroSnapshots) {
  const fs::path out = scratch("zero");
  const RunResult r = run_command("simulate", kSource / "configs/zero.json", out);
  EXPECT_EQ(r.code, kExitPass) << r.line();
  int files = 0;
  for (const auto& e : fs::directory_iterator(out / "snapshots")) {
    ++files;
    if (e.path().filename().string().starts_with("phi") || e.path().filename().string().starts_with("mu")) {
      EXPECT_EQ(max_abs(read_cell_csv(e.path())), 0.0) << e.path();
    }
  }
  EXPECT_GT(files, 0);
  const std::string manifest = slurp(out / "manifest.json");
  for (const char* key : {"config_hash", "seed", "versions", "wall_time_s", "exit_code"})
    EXPECT_NE(manifest.find(key), std::string::npos) << key;
}

TEST(Runner, SpinodalEnergycheckPasses) {
  RunConfig c;
  c.physics.grid = {16, 16, 8.0, 8.0};
  c.physics.M = 4;
  c.physics.tau = 0.5;
  const fs::path out = scratch("energy");
  const RunResult r = run_command("energycheck", c, out);
  EXPECT_EQ(r.code, kExitPass) << r.line();
  EXPECT_GE(r.metrics.at("min_energy_slack"), -1e-8);
  EXPECT_TRUE(fs::exists(out / "energy.csv"));
}

TEST(Runner, GradcheckOnEightByEightPasses) {
  RunConfig c = load_config((kSource / "configs/ac5_gradcheck.json").string());
  c.audit.snapshots = false;
  const fs::path out = scratch("grad");
  const RunResult r = run_command("gradcheck", c, out);
  EXPECT_EQ(r.code, kExitPass) << r.line();
  EXPECT_LE(r.metrics.at("max_relative_error"), 1e-5);
  EXPECT_TRUE(fs::exists(out / "gradcheck.csv"));
  EXPECT_TRUE(fs::exists(out / "transpose.csv"));
}

TEST(Runner, OptimizerCapIsAnAuditFailure) {
  RunConfig c = load_config((kSource / "configs/ac5_gradcheck.json").string());
  c.optimizer.max_iters = 1;
  const RunResult r = run_command("optimize", c, scratch("cap"));
  EXPECT_EQ(r.code, kExitAudit);
  EXPECT_EQ(r.status, "audit_failure");
  EXPECT_FALSE(r.reason.empty());
  EXPECT_EQ(r.line().find('\n'), std::string::npos);
}

TEST(Runner, NewtonFailureIsSolverFailure) {
  const RunResult r = run_command("simulate", parse_config(kStiff), scratch("newton"));
  EXPECT_EQ(r.code, kExitSolver);
  EXPECT_NE(r.reason.find("step=0"), std::string::npos) << r.reason;
}

TEST(Runner, UnknownSubcommandIsConfigError) {
  EXPECT_EQ(run_command("launch", RunConfig{}, scratch("unknown")).code, kExitConfig);
}

TEST(Runner, CsvOutputsAreBytewiseDeterministic) {
  RunConfig c = load_config((kSource / "configs/ac5_gradcheck.json").string());
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run_command("gradcheck", c, a).code, kExitPass);
  ASSERT_EQ(run_command("gradcheck", c, b).code, kExitPass);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 2);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  EXPECT_EQ(run_cli("simulate --config " + (kSource / "configs/zero.json").string() + " --out " + (dir / "a").string()), 0);
  EXPECT_EQ(run_cli("simulate --config " + write_config(dir, R"({"time": {"tau": -1}})").string() + " --out " +
                    (dir / "b").string()),
            4);
  EXPECT_EQ(run_cli("simulate --config " + write_config(dir, kStiff).string() + " --out " + (dir / "c").string()), 3);
  EXPECT_EQ(run_cli("simulate --config /nonexistent.json --out " + (dir / "d").string()), 4);
  EXPECT_EQ(run_cli("simulate"), 4);
  EXPECT_EQ(run_cli("frobnicate --config x"), 4);
}

TEST(Cli, PrintsOneStatusLine) {
  const fs::path dir = scratch("line");
  const std::string cmd = std::string(CHNS_CLI) + " simulate --config " + (kSource / "configs/zero.json").string() +
                          " --out " + (dir / "o").string() + " > " + (dir / "stdout.txt").string() + " 2>/dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const std::string text = slurp(dir / "stdout.txt");
  EXPECT_EQ(text, "status=pass code=0\n");
}
