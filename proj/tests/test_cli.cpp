#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "dbmatch/harness.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(DBMATCH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dbmatch_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("rates --deltas 0.1 --out " + path("r.csv")), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("bogus"), 2);
  EXPECT_EQ(run("rates --no-such-flag"), 2);
  EXPECT_EQ(run("simulate-match --n 32 --rate 1.2 --row-model explicit"), 2);
  EXPECT_EQ(run("simulate-match --rate 0.1 --rows 4"), 2);
  EXPECT_EQ(run("oracle-check --cases 30"), 0);
  EXPECT_EQ(run("oracle-check --cases 30 --inject-fault skip-first-column"), 1);
}

TEST_F(Cli, ManifestDigestMatchesOutput) {
  ASSERT_EQ(run("simulate-match --n 12 --rate 0.3 --delta 0.2 --alpha 0.5 --trials 20 --out " + path("m.csv") +
                " --trials-out " + path("t.csv")),
            0);
  std::ifstream in(path("m.csv.manifest"));
  const auto kv = dbmatch::read_key_values(in);
  EXPECT_EQ(kv.at("output.0.sha256"), dbmatch::harness::sha256_hex(slurp(path("m.csv"))));
  EXPECT_EQ(kv.at("output.1.sha256"), dbmatch::harness::sha256_hex(slurp(path("t.csv"))));
  EXPECT_EQ(kv.at("command"), "simulate-match");
  EXPECT_TRUE(kv.contains("seed.point.0.trials"));
}

TEST_F(Cli, ConfigFileIsOverriddenByFlags) {
  std::ofstream(path("cfg.txt")) << "# sweep\nn=12\nrate=0.3\ndelta=0.2\nalpha=0.5\ntrials=10\nseed=5\n";
  ASSERT_EQ(run("simulate-match --config " + path("cfg.txt") + " --out " + path("a.csv")), 0);
  ASSERT_EQ(run("simulate-match --n 12 --rate 0.3 --delta 0.2 --alpha 0.5 --trials 10 --seed 5 --out " +
                path("b.csv")),
            0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  ASSERT_EQ(run("simulate-match --config " + path("cfg.txt") + " --seed 6 --out " + path("c.csv")), 0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
  std::ofstream(path("bad.txt")) << "no-such-key=1\n";
  EXPECT_EQ(run("simulate-match --config " + path("bad.txt")), 2);
}

TEST_F(Cli, ScalarAndAvx2BackendsAgree) {
  ASSERT_EQ(run("simulate-match --n 16 --rate 0.4 --delta 0.3 --alpha 0.3 --trials 30 --simd scalar --out " +
                path("s.csv")),
            0);
  const int avx = run("simulate-match --n 16 --rate 0.4 --delta 0.3 --alpha 0.3 --trials 30 --simd avx2 --out " +
                      path("v.csv"));
  if (avx != 0) GTEST_SKIP() << "AVX2 backend unavailable";
  EXPECT_EQ(slurp(path("s.csv")), slurp(path("v.csv")));
}

}  // namespace
