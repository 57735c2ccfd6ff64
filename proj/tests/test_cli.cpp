#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonmark/cli.hpp"

namespace fs = std::filesystem;
using namespace nonmark::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string log;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "nonmark");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, log;
  const int code = nonmark::cli::main(static_cast<int>(argv.size()), argv.data(), out, log);
  return {code, out.str(), log.str()};
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nonmark_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Range, ParsesLinearAndLog) {
  const Range lin = Range::parse("0:1:5");
  EXPECT_FALSE(lin.log);
  EXPECT_EQ(lin.grid(), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  const auto g = Range::parse("0.01:10:4:log").grid();
  EXPECT_NEAR(g[1], 0.1, 1e-15);
  EXPECT_EQ(g.back(), 10.0);
  for (const char* bad : {"1:2", "1:2:1", "0:1:3:log", "a:1:3", "1:2:3:cubic"}) {
    EXPECT_THROW(Range::parse(bad), ConfigError) << bad;
  }
}

TEST(Cli, OhmicSweepIsMonotoneWithPlotScript) {
  const fs::path csv = scratch("ohmic.csv");
  const Result r = invoke({"--mode", "sweep", "--sd", "ohmic", "--param", "D", "--range", "0.01:10:25:log",
                           "--quantifier", "n1", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.log;
  const auto rows = read_csv(slurp(csv));
  ASSERT_EQ(rows.size(), 26u);
  EXPECT_EQ(rows[0][0], "D");
  EXPECT_EQ(rows[0][1], "n1_qq");
  EXPECT_EQ(rows[0].back(), "error");
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_GT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
  const std::string gp = slurp(fs::path(csv).replace_extension(".gp"));
  EXPECT_NE(gp.find("ohmic.csv"), std::string::npos);
  EXPECT_NE(gp.find("set logscale x"), std::string::npos);
}

TEST(Cli, PeakedWidthSweepHasInteriorMaximum) {
  const Result r = invoke({"--mode", "sweep", "--sd", "peaked", "--d", "0.75", "--param", "gamma", "--range",
                           "0.01:5:40:log", "--omega-big", "1.0", "--quantifier", "n1"});
  ASSERT_EQ(r.code, 0) << r.log;
  const auto rows = read_csv(r.out);
  std::vector<double> v;
  for (std::size_t i = 1; i < rows.size(); ++i) v.push_back(std::stod(rows[i][1]));
  const double top = *std::max_element(v.begin(), v.end());
  EXPECT_LT(v.front(), top);
  EXPECT_LT(v.back(), top);
}

TEST(Cli, SweepIsDeterministicAcrossThreadCounts) {
  const std::vector<std::string> base{"--mode", "sweep", "--sd", "peaked", "--param", "omega-big", "--range", "0.5:2:6"};
  auto one = base, four = base;
  one.insert(one.end(), {"--threads", "1"});
  four.insert(four.end(), {"--threads", "4"});
  EXPECT_EQ(invoke(one).out, invoke(four).out);
}

TEST(Cli, DecoupledMeansFollowFreeRotation) {
  const Result r = invoke({"--mode", "means", "--sd", "ohmic", "--d", "0", "--aq", "0.3", "--ap", "0.7", "--t-max",
                           "10", "--t-steps", "41"});
  ASSERT_EQ(r.code, 0) << r.log;
  const auto rows = read_csv(r.out);
  ASSERT_EQ(rows.size(), 42u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "q_mean", "p_mean"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][1]), -0.7 * std::cos(t) + 0.3 * std::sin(t), 1e-6);
    EXPECT_NEAR(std::stod(rows[i][2]), 0.7 * std::sin(t) + 0.3 * std::cos(t), 1e-6);
  }
}

TEST(Cli, OracleChecksPassAndCorruptionIsCaught) {
  Result r = invoke({"--mode", "oracle-check", "--sd", "ohmic", "--n-traj", "20000", "--t-max", "5"});
  EXPECT_EQ(r.code, 0) << r.out << r.log;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  r = invoke({"--mode", "oracle-check", "--sd", "peaked"});
  EXPECT_EQ(r.code, 0) << r.out << r.log;
  r = invoke({"--mode", "oracle-check", "--sd", "peaked", "--corrupt-kernel"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("worst"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path ini = scratch("run.ini");
  std::ofstream(ini) << "# sweep the peak position\nmode = sweep\nsd = peaked\nd = 0.5\n"
                        "param = omega-big\nrange = 0.5:2:3\nquantifier = n1\n";
  const Result from_file = invoke({"--config", ini.string()});
  ASSERT_EQ(from_file.code, 0) << from_file.log;
  EXPECT_EQ(read_csv(from_file.out).size(), 4u);
  const Result overridden = invoke({"--config", ini.string(), "--d", "0.6"});
  ASSERT_EQ(overridden.code, 0);
  EXPECT_NE(from_file.out, overridden.out);
}

TEST(Cli, ConfigErrorsNameTheKey) {
  struct Case {
    std::vector<std::string> args;
    std::string key;
  };
  const fs::path ini = scratch("bad.ini");
  std::ofstream(ini) << "bogus_key = 3\n";
  for (const Case& c : std::vector<Case>{{{"--mode", "sweep", "--param", "D"}, "range"},
                                         {{"--mode", "warp"}, "mode"},
                                         {{"--d", "abc"}, "--d"},
                                         {{"--beta", "-1"}, "beta"},
                                         {{"--sd", "lorentz"}, "sd"},
                                         {{"--mode", "sweep", "--param", "gamma", "--range", "0.1:1:3"}, "param"},
                                         {{"--config", ini.string()}, "bogus_key"}}) {
    const Result r = invoke(c.args);
    EXPECT_EQ(r.code, 2) << c.key;
    EXPECT_NE(r.log.find(c.key), std::string::npos) << r.log;
  }
}

TEST(Cli, FailedGridPointsKeepTheSweepGoing) {
  // A window of |w| <= 2 leaves an unresolvable tail for every coupled point;
  // the decoupled first point needs no integral at all.
  const fs::path csv = scratch("failing.csv");
  const Result r = invoke({"--mode", "sweep", "--sd", "ohmic", "--param", "D", "--range", "0:1:3", "--quantifier", "n1",
                           "--half-width", "2", "--tail-tol", "1e-15", "--out", csv.string()});
  EXPECT_EQ(r.code, 3);
  const auto rows = read_csv(slurp(csv));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][1], "0");
  EXPECT_TRUE(rows[1].back().empty());
  for (int i : {2, 3}) {
    EXPECT_TRUE(rows[i][1].empty());
    EXPECT_EQ(rows[i].back().rfind("n1: ", 0), 0u) << rows[i].back();
  }
  EXPECT_NE(r.log.find("grid point 1 (D = 0.5): n1"), std::string::npos) << r.log;
}
