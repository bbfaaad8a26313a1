#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "scou/app.hpp"
#include "scou/evaluation.hpp"
#include "scou/ingest.hpp"
#include "scou/posterior.hpp"
#include "scou/report.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "scou");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = scou::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("scou_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

const std::string kData = SCOU_TEST_DATA;

TEST_F(CliTest, FitNeedsTenObservations) {
  std::string csv = "date,value,limit\n";
  for (int d = 1; d <= 9; ++d) csv += "2021-01-0" + std::to_string(d) + "," + std::to_string(d * 0.1) + ",\n";
  write("nine.csv", csv);
  const auto r = run({"fit", "--input", path("nine.csv"), "--output", path("p.json")});
  EXPECT_EQ(r.code, scou::cli::kExitValidation);
  EXPECT_NE(r.err.find("at least 10"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("p.json")));
  EXPECT_FALSE(fs::exists(path("p.json.tmp")));
}

TEST_F(CliTest, FitFailureExitsThreeAndLeavesNoOutput) {
  std::string csv = "date,value,limit\n";
  for (int d = 10; d <= 25; ++d) csv += "2021-01-" + std::to_string(d) + "," + (d % 4 ? "2.5" : "-1") + ",-1\n";
  write("in.csv", csv);
  const auto r = run({"fit", "--input", path("in.csv"), "--output", path("p.json"), "--bounds", "0,10", "--fix",
                      "p=1"});
  EXPECT_EQ(r.code, scou::cli::kExitFit) << r.err;
  EXPECT_FALSE(fs::exists(path("p.json")));
  EXPECT_FALSE(fs::exists(path("p.json.tmp")));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"fit", "--bogus"}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"fit"}).code, scou::cli::kExitValidation);
  const std::string in = kData + "/exp4_fixture.csv";
  EXPECT_EQ(run({"smooth", "--input", in, "--output", in}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"smooth", "--input", in, "--coverage", "1.5"}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"smooth", "--input", in, "--grid-d", "10", "--grid-delta", "0.1"}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"fit", "--input", in, "--fix", "rho=1"}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"benchmark", "--experiment", "9"}).code, scou::cli::kExitValidation);
  EXPECT_EQ(run({"--help"}).code, scou::cli::kExitOk);
}

TEST_F(CliTest, MalformedInputReportsLine) {
  write("bad.csv", "date,value,limit\n2021-01-01,1,\n2021-01-01,2,\n");
  const auto r = run({"smooth", "--input", path("bad.csv")});
  EXPECT_EQ(r.code, scou::cli::kExitValidation);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST_F(CliTest, GoldenFit) {
  const auto r = run({"fit", "--input", kData + "/exp4_fixture.csv", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kData + "/exp4_params.json"));
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"eta", "delta", "sigma", "tau", "p", "a", "b", "D", "log_likelihood"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(CliTest, GoldenSmooth) {
  const auto r = run({"smooth", "--input", kData + "/exp4_fixture.csv", "--params", kData + "/exp4_params.json",
                      "--output", path("s.csv"), "--svg", path("s.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("s.csv")), slurp(kData + "/exp4_smooth.csv"));
  const std::string svg = slurp(path("s.svg"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto again = run({"smooth", "--input", kData + "/exp4_fixture.csv", "--params",
                          kData + "/exp4_params.json"});
  EXPECT_EQ(again.out, slurp(kData + "/exp4_smooth.csv"));
}

TEST_F(CliTest, GoldenSimulate) {
  const auto r = run({"simulate", "--seed", "20220104", "--censor-rate", "0.16"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kData + "/exp4_fixture.csv"));
}

TEST_F(CliTest, SeedFallbackFromEnvironment) {
  const auto with_flag = run({"simulate", "--seed", "77"});
  ::setenv("SCOU_SEED", "77", 1);
  const auto with_env = run({"simulate"});
  const auto flag_wins = run({"simulate", "--seed", "78"});
  ::setenv("SCOU_SEED", "junk", 1);
  const auto junk = run({"simulate"});
  ::unsetenv("SCOU_SEED");
  EXPECT_EQ(with_flag.out, with_env.out);
  EXPECT_NE(flag_wins.out, with_env.out);
  EXPECT_EQ(junk.code, scou::cli::kExitValidation);
}

TEST_F(CliTest, SimulateRoundTripIsBitExact) {
  scou::ModelParams truth;
  truth.eta = 0.99;
  truth.delta = 0.001;
  truth.sigma = 0.3;
  truth.tau = 0.6;
  truth.p = 0.07;
  scou::SimulationOptions opt;
  opt.seed = 31;
  opt.bounds_from_marginal_quantiles = std::make_pair(0.0002, 0.9998);
  auto sim = scou::simulate(truth, 150, opt);
  std::vector<double> ystar;
  for (const auto& v : sim.ystar)
    if (v) ystar.push_back(*v);
  sim = scou::apply_censoring(sim, scou::CensoringLimits::constant(scou::censor_limit_for_rate(ystar, 0.16)));

  const auto cli = run({"simulate", "--seed", "31", "--censor-rate", "0.16", "--output", path("sim.csv"), "--truth",
                        path("truth.csv")});
  ASSERT_EQ(cli.code, 0) << cli.err;
  const auto data = scou::cli::ingest_file(path("sim.csv"));
  EXPECT_EQ(data.series, sim.observations);
  EXPECT_NE(slurp(path("truth.csv")).find("date,x,ystar,outlier"), std::string::npos);

  scou::cli::FittedModel model{sim.params, 150, 0.0, true, 0};
  write("params.json", scou::cli::params_json(model));
  const auto sm = run({"smooth", "--input", path("sim.csv"), "--params", path("params.json")});
  ASSERT_EQ(sm.code, 0) << sm.err;

  const auto grid = scou::Grid::uniform(sim.params.a, sim.params.b, 150);
  const auto post = scou::smooth(sim.observations, sim.params, grid);
  const auto report = scou::outlier_probabilities(sim.observations, sim.params, grid);
  std::ostringstream want;
  scou::cli::write_smooth_csv(scou::cli::smooth_rows({data.start, sim.observations}, post, report), want);
  EXPECT_EQ(sm.out, want.str());
}

TEST_F(CliTest, DetectListsOnlyFlaggedRows) {
  const auto r = run({"detect", "--input", kData + "/exp4_fixture.csv", "--params", kData + "/exp4_params.json",
                      "--threshold-h", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "date,value,censored,outlier_prob");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_GT(std::stod(line.substr(line.rfind(',') + 1)), 0.5);
  }
  const auto strict = run({"detect", "--input", kData + "/exp4_fixture.csv", "--params",
                           kData + "/exp4_params.json", "--threshold-h", "0.99"});
  EXPECT_LE(std::count(strict.out.begin(), strict.out.end(), '\n'), static_cast<long>(rows + 1));
}

TEST_F(CliTest, LogTransformIngest) {
  write("raw.csv", "date,value,limit\n2021-01-01,800,1000\n2021-01-02,5000,1000\n");
  const auto d = scou::cli::ingest_file(path("raw.csv"), {true});
  EXPECT_EQ(d.series[0].ell, std::log(1000.0));
  EXPECT_EQ(*d.series[0].y, std::log(1000.0));
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = SCOU_BINARY;
  const std::string out = path("x.json");
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " fit --input /nonexistent.csv -o " + out + " 2>/dev/null").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " simulate --seed 3 -o " + out + " 2>/dev/null").c_str())), 0);
  EXPECT_TRUE(fs::exists(out));
}

TEST_F(CliTest, BenchmarkScaledDownCoverage) {
  const auto r = run({"benchmark", "--experiment", "4", "--replicates", "30", "--methods", "scou", "--output",
                      path("m.csv"), "--summary", path("s.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("s.json")));
  const double cov = j["methods"]["scou"]["median_coverage"];
  EXPECT_GE(cov, 0.88);
  EXPECT_LE(cov, 0.97);
  const std::string table = slurp(path("m.csv"));
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 31);
}

}  // namespace
