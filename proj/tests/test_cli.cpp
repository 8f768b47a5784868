#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "convextest/cli.h"
#include "convextest/io.h"

using namespace convextest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("convextest_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST(Cli, SolveOneDimensionalBoxes) {
  const Outcome r = cli({"solve", "--problem", fixture("box_1d.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["rho"].get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(j["epsilon_star"].get<double>(), 0.1586553, 1e-7);
  EXPECT_TRUE(j["flags"]["converged"].get<bool>());
  for (const char* key : {"theta0_star", "theta1_star", "delta_raw", "delta_norm", "iterations", "bounds", "detector"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"solve", "--problem", fixture("touching_boxes.json")}).code, kExitOverlap);
  const Outcome pd = cli({"solve", "--problem", fixture("non_pd_sigma.json")});
  EXPECT_EQ(pd.code, kExitInvalid);
  EXPECT_NE(pd.err.find("sigma"), std::string::npos);
  EXPECT_EQ(cli({"solve", "--problem", fixture("does_not_exist.json")}).code, kExitInvalid);
  EXPECT_EQ(cli({"solve"}).code, kExitInvalid);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInvalid);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  const Outcome slow = cli({"solve", "--problem", fixture("mixed_3d.json"), "--max-iters", "1", "--tol", "1e-14"});
  EXPECT_EQ(slow.code, kExitNoConverge) << slow.err;
  EXPECT_EQ(cli({"campaign", "--kind", "bogus"}).code, kExitInvalid);
  const Outcome pmf = cli({"discrete", "--scheme", fixture("bad_pmf.json")});
  EXPECT_EQ(pmf.code, kExitInvalid);
  EXPECT_NE(pmf.err.find("params[0].pmf"), std::string::npos);
}

TEST(Cli, CertifyExamples) {
  const Outcome r = cli({"certify", "--problem", fixture("box_1d.json"), "--pair", fixture("perturbed_pair_1d.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["delta_raw"].get<double>(), 1.25, 1e-9);
  EXPECT_NEAR(j["gap"].get<double>(), 2.5, 1e-12);
  EXPECT_TRUE(j["sandwich"]["all_hold"].get<bool>());
  EXPECT_EQ(cli({"certify", "--problem", fixture("box_1d.json"), "--pair", fixture("zero_gap_pair_1d.json")}).code,
            kExitOverlap);
}

TEST_F(CliFiles, SolveReportRecertifies) {
  for (const char* problem : {"box_1d.json", "mixed_3d.json"}) {
    const std::string report = path(std::string("report_") + problem);
    ASSERT_EQ(cli({"solve", "--problem", fixture(problem), "--out", report}).code, kExitOk);
    const Json solved = read_json(report);
    const Outcome c = cli({"certify", "--problem", fixture(problem), "--pair", report});
    ASSERT_EQ(c.code, kExitOk) << c.err;
    const Json cert = Json::parse(c.out);
    EXPECT_NEAR(cert["delta_norm"].get<double>(), solved["delta_norm"].get<double>(), 1e-10);
    EXPECT_LE(cert["delta_norm"].get<double>(), 1e-8);
    // Coordinates survive the text round-trip exactly.
    EXPECT_EQ(cert["theta0"], solved["theta0_star"]);
    EXPECT_EQ(cert["theta1"], solved["theta1_star"]);
  }
}

TEST_F(CliFiles, SimulateIsDeterministic) {
  const std::vector<std::string> base = {"simulate", "--problem", fixture("box_1d.json"), "--samples", "200000",
                                         "--seed", "42"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.json")});
  b.insert(b.end(), {"--out", path("b.json")});
  ASSERT_EQ(cli(a).code, kExitOk);
  ASSERT_EQ(cli(b).code, kExitOk);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const Json j = read_json(path("a.json"));
  EXPECT_TRUE(j["hypothesis0"]["within_3se"].get<bool>());
  EXPECT_TRUE(j["hypothesis1"]["within_3se"].get<bool>());
  EXPECT_FALSE(fs::exists(path("a.json.tmp")));
}

TEST_F(CliFiles, CampaignIsDeterministic) {
  for (const char* kind : {"gaussian_bounds", "sandwich", "reduction_equiv", "surrogate_table"}) {
    SCOPED_TRACE(kind);
    const std::vector<std::string> base = {"campaign", "--kind", kind, "--n", "4", "--seed", "9", "--max-dim", "6",
                                           "--mc-samples", "2000"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", path("a.csv")});
    b.insert(b.end(), {"--out", path("b.csv")});
    ASSERT_EQ(cli(a).code, kExitOk);
    ASSERT_EQ(cli(b).code, kExitOk);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a.csv.summary.json")), slurp(path("b.csv.summary.json")));
    const Json s = read_json(path("a.csv.summary.json"));
    EXPECT_EQ(s["campaign"], kind);
    EXPECT_EQ(s["n_instances"], 4);
  }
}

TEST(Cli, CampaignToStdout) {
  const Outcome r = cli({"campaign", "--kind", "reduction_equiv", "--n", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("instance,seed,status,description,", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

TEST(Cli, DiscreteModes) {
  const Outcome p = cli({"discrete", "--scheme", fixture("two_outcome.json"), "--mode", "product"});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  const Json pj = Json::parse(p.out);
  EXPECT_NEAR(pj["value"].get<double>(), 2 * std::log(0.8), 1e-7);
  EXPECT_DOUBLE_EQ(pj["worst_case_error"].get<double>(), 0.2);
  EXPECT_GE(pj["exp_moment_bound"].get<double>(), 0.2);

  const Outcome d = cli({"discrete", "--scheme", fixture("two_outcome.json"), "--mode", "direct"});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  EXPECT_NEAR(Json::parse(d.out)["value"].get<double>(), std::log(0.8), 1e-7);

  const Outcome red = cli({"discrete", "--scheme", fixture("grid_scheme.json"), "--mode", "reduction"});
  ASSERT_EQ(red.code, kExitOk) << red.err;
  EXPECT_LE(Json::parse(red.out)["equivalence_residual"].get<double>(), 1e-6);

  const Outcome same = cli({"discrete", "--scheme", fixture("identical_pmfs.json"), "--mode", "product"});
  ASSERT_EQ(same.code, kExitOk) << same.err;
  EXPECT_GE(Json::parse(same.out)["worst_case_error"].get<double>(), 0.5);

  const Outcome table = cli({"discrete", "--scheme", fixture("identical_pmfs.json"), "--mode", "surrogates"});
  ASSERT_EQ(table.code, kExitOk);
  EXPECT_EQ(table.out.rfind("loss,value,worst_case_error,converged\n", 0), 0u);
  EXPECT_EQ(std::count(table.out.begin(), table.out.end(), '\n'), 4);

  const Outcome hinge = cli({"discrete", "--scheme", fixture("two_outcome.json"), "--mode", "surrogates", "--loss", "hinge"});
  EXPECT_EQ(std::count(hinge.out.begin(), hinge.out.end(), '\n'), 2);
  EXPECT_EQ(cli({"discrete", "--scheme", fixture("two_outcome.json"), "--loss", "square"}).code, kExitInvalid);
  EXPECT_EQ(cli({"discrete", "--scheme", fixture("two_outcome.json"), "--mode", "nope"}).code, kExitInvalid);
}
