#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "crp/json_io.hpp"

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("crp_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(CRP_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, TuneDefaultScenario) {
  ASSERT_EQ(run("tune -o " + dir_.string()), 0) << slurp("stderr.txt");
  const auto out = slurp("stdout.txt");
  EXPECT_NE(out.find("0.0628357"), std::string::npos);
  std::ifstream in(dir_ / "tune.json");
  const auto j = crp::json::parse(in);
  EXPECT_EQ(j.at("tree").at("k"), 6);
}

TEST_F(CliTest, OverridesApply) {
  ASSERT_EQ(run("tune --alpha 0 --n-max 20 -k 3 -M 4096 --method dp -o " + dir_.string()), 0)
      << slurp("stderr.txt");
  std::ifstream in(dir_ / "tune.json");
  const auto j = crp::json::parse(in);
  EXPECT_EQ(j.at("k"), 3);
  EXPECT_EQ(j.at("method"), "dp");
  EXPECT_EQ(j.at("grid_size"), 4096);
  EXPECT_EQ(j.at("scenario").at("n_max"), 20);
}

TEST_F(CliTest, OutputDirFromEnvironment) {
  const std::string cmd = "CRP_OUTPUT_DIR=" + dir_.string() + " " + CRP_CLI_PATH +
                          " tune -k 2 -M 1024 >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "tune.json"));
}

TEST_F(CliTest, RatesAndSimulate) {
  ASSERT_EQ(run("rates -n 2 -n 10 --trials 1000 --seed 4 -o " + dir_.string()), 0)
      << slurp("stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "rates_tuned.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "rates_conti.csv"));
  ASSERT_EQ(run("simulate -n 3 --seed 1 --successes 200 -o " + dir_.string()), 0)
      << slurp("stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "simulate.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "simulate_summary.json"));
}

TEST_F(CliTest, ConfigFile) {
  std::ofstream(dir_ / "c.json") << R"({"k": 2, "grid_size": 512, "k_range": [1, 3]})";
  ASSERT_EQ(run("bounds -c " + (dir_ / "c.json").string() + " -o " + dir_.string()), 0)
      << slurp("stderr.txt");
  std::ifstream in(dir_ / "bounds.json");
  EXPECT_EQ(crp::json::parse(in).at("rows").size(), 3u);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("tune -c " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(run("bounds --k-min 5 --k-max 2 -o " + dir_.string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("tune --method newton -o " + dir_.string()), 2);
  EXPECT_EQ(run("simulate -n 1 -o " + dir_.string()), 2);
  std::ofstream(dir_ / "bad.json") << R"({"rounds": 6})";
  EXPECT_EQ(run("tune -c " + (dir_ / "bad.json").string()), 2);
  EXPECT_FALSE(slurp("stderr.txt").empty());
}

TEST_F(CliTest, NumericErrorsExitThree) {
  // x^400 piles its curvature next to 1; the top quantiles collide on the grid.
  std::ofstream(dir_ / "steep.json") << R"({"scenario": {"weights": {"400": 1.0}}, "grid_size": 4096})";
  EXPECT_EQ(run("tune -c " + (dir_ / "steep.json").string() + " -o " + dir_.string()), 3);
  // f'' identically zero.
  std::ofstream(dir_ / "flat.json") << R"({"scenario": {"weights": {"1": 1.0}}})";
  EXPECT_EQ(run("tune -c " + (dir_ / "flat.json").string() + " -o " + dir_.string()), 3);
}

TEST_F(CliTest, Help) { EXPECT_EQ(run("--help"), 0); }

}  // namespace
