#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "stochreal/serialization.hpp"

namespace fs = std::filesystem;
using stochreal::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result RunCli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = stochreal::cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stochreal_cli_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("STOCHREAL_SEED");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kParams = R"({"n": 2, "a": [[0.5, 0.1], [0.0, -0.3]], "b": [1.0, 0.5],
  "c": [0.2, 0.1], "alpha": [[0.5, 0.0], [0.0, 0.3]], "beta": 0.4, "family": "GUM"})";

// Independent restatement of the scalar region definitions.
std::string ExpectedCovarianceLabel(double F, double hn) {
  const double lo = (F - 1) / 2, hi = (F + 1) / 2, tol = 1e-9;
  if (std::abs(hn - lo) <= tol || std::abs(hn - hi) <= tol) return "boundary";
  return hn > lo && hn < hi ? "yes" : "no";
}

std::string ExpectedHmcLabel(double F, double hn) {
  const double tol = 1e-9;
  if (std::abs(hn) <= tol || std::abs(hn - F) <= tol) return "boundary";
  if (F > 0) return hn > 0 && hn < F ? "yes" : "no";
  return hn < 0 && hn > F ? "yes" : "no";
}

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(RunCli({}).code, 2);
  const Result unknown = RunCli({"frobnicate"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_EQ(Json::parse(unknown.err).at("error"), "UsageError");
  const std::string series = Write("s.json", R"({"r0": 1, "lags": [0.5, 0.25]})");
  EXPECT_EQ(RunCli({"realize", "--series", series, "--window", "3"}).code, 2);
  EXPECT_EQ(RunCli({"classify", "--series", series, "--tol-psd", "-1"}).code, 2);
  EXPECT_EQ(RunCli({"classify"}).code, 2);
  EXPECT_EQ(RunCli({"cartography", "--grid", "1"}).code, 2);
  setenv("STOCHREAL_SEED", "abc", 1);
  EXPECT_EQ(RunCli({"simulate", "--params", Write("p.json", kParams)}).code, 2);
}

TEST_F(CliTest, RuntimeErrorsAreStructured) {
  const Result missing = RunCli({"classify", "--series", Path("nope.json")});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(Json::parse(missing.err).at("error"), "IOError");

  const Result bad_json = RunCli({"classify", "--series", Write("bad.json", "{")});
  EXPECT_EQ(bad_json.code, 1);
  EXPECT_EQ(Json::parse(bad_json.err).at("error"), "InvalidArgument");

  const std::string short_series = Write("s.json", R"({"r0": 1, "lags": [0.5, 0.25, 0.125]})");
  const Result lags = RunCli({"realize", "--series", short_series, "--window", "3,3"});
  EXPECT_EQ(lags.code, 1);
  EXPECT_EQ(Json::parse(lags.err).at("error"), "InsufficientLags");

  const std::string unstable = Write(
      "u.json", R"({"a": [[1.2]], "b": [1], "c": [0], "alpha": [[1]], "beta": 1})");
  const Result nonstat = RunCli({"covariance", "--params", unstable});
  EXPECT_EQ(nonstat.code, 1);
  EXPECT_EQ(Json::parse(nonstat.err).at("error"), "NotStable");
}

TEST_F(CliTest, ClassifyWhiteNoise) {
  const std::string series = Write("w.json", R"({"r0": 2, "lags": [0, 0, 0, 0, 0, 0, 0, 0]})");
  const Result r = RunCli({"classify", "--series", series, "--tol-psd", "1e-8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("version"), "0.3.0");
  EXPECT_EQ(j.at("config").at("tolerances").at("psd"), 1e-8);
  EXPECT_EQ(j.at("config").at("tolerances").at("rank"), 1e-9);
  EXPECT_EQ(j.at("result").at("order"), 0);
  for (const char* f : {"GUM", "HMC", "DGUM", "RNN"}) {
    EXPECT_TRUE(j.at("result").at("families").at(f).at("realizable").get<bool>()) << f;
  }
}

TEST_F(CliTest, RealizeAndFeasibility) {
  Json lags = Json::array();
  for (int k = 1; k <= 20; ++k) lags.push_back(0.3 * std::pow(0.5, k - 1));
  const std::string series = Write("s.json", Json{{"r0", 1.0}, {"lags", lags}}.dump());
  const Result r = RunCli({"realize", "--series", series, "--window", "4,4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("result").at("n"), 1);
  EXPECT_EQ(j.at("config").at("window"), Json::parse("[4, 4]"));
  EXPECT_NEAR(j.at("result").at("F")[0][0].get<double>(), 0.5, 1e-9);
  EXPECT_TRUE(j.at("result").at("diagnostics").contains("singular_values"));

  const std::string triplet =
      Write("t.json", R"({"r0": 1, "triplet": {"n": 1, "H": [1], "F": [[0.5]], "N": [0.3]}})");
  const Result f = RunCli({"feasibility", "--triplet", triplet});
  ASSERT_EQ(f.code, 0) << f.err;
  const Json interval = Json::parse(f.out).at("result").at("scalar_interval");
  EXPECT_NEAR(interval.at("lower").get<double>(), 0.094158, 1e-6);
  EXPECT_NEAR(interval.at("upper").get<double>(), 0.955842, 1e-6);
}

TEST_F(CliTest, SimulateIsDeterministicAndHonoursEnvSeed) {
  const std::string params = Write("p.json", kParams);
  const Result a = RunCli({"simulate", "--params", params, "--length", "50", "--seed", "9"});
  const Result b = RunCli({"simulate", "--params", params, "--length", "50", "--seed", "9"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  setenv("STOCHREAL_SEED", "9", 1);
  const Result c = RunCli({"simulate", "--params", params, "--length", "50"});
  const Json jc = Json::parse(c.out);
  EXPECT_EQ(jc.at("config").at("seed_source"), "env");
  EXPECT_EQ(jc.at("result"), Json::parse(a.out).at("result"));
  EXPECT_EQ(jc.at("result").at("trajectories")[0].at("observations").size(), 51u);
}

TEST_F(CliTest, CovarianceWithEmpiricalEstimate) {
  const Result r = RunCli({"covariance", "--params", Write("p.json", kParams), "--lags", "3",
                           "--empirical", "20", "--length", "500", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out).at("result");
  EXPECT_EQ(j.at("analytic").at("lags").size(), 3u);
  EXPECT_EQ(j.at("empirical").at("standard_errors").size(), 4u);
}

TEST_F(CliTest, ValidateReport) {
  const Result r = RunCli({"validate", "--params", Write("p.json", kParams), "--length",
                           "3000", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out).at("result");
  EXPECT_TRUE(j.at("steady_state_matches").get<bool>());
  EXPECT_EQ(j.at("autocorrelation").size(), 5u);
}

TEST_F(CliTest, CartographyGoldenFromClosedForms) {
  const std::string out = Path("carto.csv");
  const Result r = RunCli({"cartography", "--r0", "1", "--grid", "101", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(Slurp(out));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "F,HN,covariance,hmc,dgum,rnn_curve1_dist,rnn_curve2_dist");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string f, hn, cov, hmc, dgum, d1, d2;
    std::getline(row, f, ',');
    std::getline(row, hn, ',');
    std::getline(row, cov, ',');
    std::getline(row, hmc, ',');
    std::getline(row, dgum, ',');
    std::getline(row, d1, ',');
    std::getline(row, d2, ',');
    const int i = rows / 101, j = rows % 101;
    const double F = std::stod(f), HN = std::stod(hn);
    ASSERT_DOUBLE_EQ(F, -1.0 + (2.0 * i + 1.0) / 101);
    ASSERT_DOUBLE_EQ(HN, -1.0 + (2.0 * j + 1.0) / 101);
    EXPECT_EQ(cov, ExpectedCovarianceLabel(F, HN)) << line;
    EXPECT_EQ(hmc, ExpectedHmcLabel(F, HN)) << line;
    EXPECT_EQ(dgum, cov);
    EXPECT_NEAR(std::stod(d1), std::abs(HN - F), 1e-15);
    EXPECT_NEAR(std::stod(d2), std::abs(HN - F * (2 * F * F - 1)), 1e-15);
    ++rows;
  }
  EXPECT_EQ(rows, 101 * 101);

  fs::path sidecar(out);
  sidecar.replace_extension(".curves.json");
  const Json side = Json::parse(Slurp(sidecar));
  EXPECT_EQ(side.at("mismatches"), 0);
  EXPECT_EQ(side.at("config").at("grid"), 101);
  EXPECT_EQ(side.at("version"), "0.3.0");
}

TEST_F(CliTest, CartographyIsByteIdentical) {
  const std::string a = Path("a.csv"), b = Path("b.csv");
  ASSERT_EQ(RunCli({"cartography", "--grid", "31", "--out", a, "--threads", "1"}).code, 0);
  ASSERT_EQ(RunCli({"cartography", "--grid", "31", "--out", b, "--threads", "1"}).code, 0);
  EXPECT_EQ(Slurp(a), Slurp(b));
  const Result stdout_run = RunCli({"cartography", "--grid", "31", "--threads", "2"});
  EXPECT_EQ(stdout_run.out, Slurp(a));
}
