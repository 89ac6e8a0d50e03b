#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PAS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pas_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, KernelWritesCsvAndSidecar) {
  ASSERT_EQ(run("kernel --pairs 4 --lag-max 1 --step 0.5 --out " + out("k")), 0);
  const auto csv = slurp(out("k") + ".csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lag,re,im");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\n0,1,0\n"), std::string::npos);
  const auto side = nlohmann::json::parse(slurp(out("k") + ".json"));
  EXPECT_EQ(side.at("schema_version"), 1);
  EXPECT_EQ(side.at("command"), "kernel");
  EXPECT_EQ(side.at("params").at("pairs"), 4);
}

TEST_F(CliTest, DeltaScanIsReproducible) {
  const std::string args = "delta-scan --pairs 8 --frames 256 --ratio 0.125 --heads 4 --kv-heads 4 --trials 5 --tasks 2";
  ASSERT_EQ(run(args + " --out " + out("a")), 0);
  ASSERT_EQ(run(args + " --out " + out("b")), 0);
  const auto a = slurp(out("a") + ".csv");
  EXPECT_EQ(a, slurp(out("b") + ".csv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 12);
  EXPECT_EQ(a.substr(0, 6), "delta,");
}

TEST_F(CliTest, OtherCommandsRun) {
  EXPECT_EQ(run("smooth --pairs 8 --horizon 200 --out " + out("s")), 0);
  EXPECT_EQ(run("spectrum --pairs 8 --n 32 --delay 0.3 --out " + out("p")), 0);
  EXPECT_EQ(run("jitter --pairs 8 --heads 2 --video-tokens 6 --out " + out("j")), 0);
  EXPECT_EQ(run("cost --out " + out("c")), 0);
  EXPECT_EQ(run("sampling-scan --pairs 8 --frames 256 --heads 2 --kv-heads 2 --ratios 0.125,1 --trials 3 "
                "--tasks 2 --out " + out("r")),
            0);
  for (const char* name : {"s", "p", "j", "c", "r"}) EXPECT_TRUE(fs::exists(out(name) + ".json")) << name;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("kernel --pairs 0 --out " + out("bad")), 2);
  EXPECT_EQ(run("delta-scan --deltas 1.5 --out " + out("bad")), 2);
  EXPECT_EQ(run("kernel --pairs 4 --out " + out("missing/dir/k")), 1);
}
