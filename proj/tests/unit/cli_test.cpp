#include <gtest/gtest.h>

#include "mshape/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mshape;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv("MSHAPE_SEED");
    dir_ = fs::temp_directory_path() / ("mshape_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args, const fs::path& out) {
    args.insert(args.begin(), "mshape");
    args.push_back("--out");
    args.push_back(out.string());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    stdout_.str("");
    stderr_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), stdout_, stderr_);
  }
  int run(std::vector<std::string> args) { return run(std::move(args), dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  static std::string first_line(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    return line;
  }

  fs::path dir_;
  std::ostringstream stdout_, stderr_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesPathsAndJumpsWithHeader) {
  ASSERT_EQ(run({"simulate", "--process", "poisson", "--paths", "5", "--nt", "10", "--seed", "7"}), cli::kOk);
  const auto h = first_line(dir_ / "paths.csv");
  EXPECT_EQ(h.rfind("# mshape simulate process=poisson", 0), 0u) << h;
  EXPECT_NE(h.find(" seed=7"), std::string::npos);
  EXPECT_EQ(first_line(dir_ / "jumps.csv"), h);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const std::vector<std::string> args{"simulate", "--process", "jumpdiff", "--paths", "20", "--nt", "20", "--seed", "3"};
  ASSERT_EQ(run(args, dir_ / "a"), cli::kOk);
  ASSERT_EQ(run(args, dir_ / "b"), cli::kOk);
  EXPECT_EQ(slurp(dir_ / "a" / "paths.csv"), slurp(dir_ / "b" / "paths.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "jumps.csv"), slurp(dir_ / "b" / "jumps.csv"));
}

TEST_F(CliTest, VerifyPassesForBrownianCall) {
  EXPECT_EQ(run({"verify", "--process", "bm", "--payoff", "call", "--nt", "50", "--nx", "200"}), cli::kOk)
      << stdout_.str();
  const auto doc = Json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(doc["reports"].size(), 4u);
  for (const auto& r : doc["reports"]) EXPECT_TRUE(r["pass"].get<bool>()) << r.dump();
  EXPECT_EQ(first_line(dir_ / "surface.csv"), doc["header"].get<std::string>());
}

TEST_F(CliTest, VerifyFailsWithTooTightSlopes) {
  EXPECT_EQ(run({"verify", "--payoff", "call", "--k", "0", "--K", "0.5", "--nt", "50", "--nx", "200"}),
            cli::kCheckFailed);
}

TEST_F(CliTest, CoupleFlagsJumpDiffusion) {
  EXPECT_EQ(run({"couple", "--process", "jumpdiff", "--pairs", "500", "--nt", "50", "--events"}), cli::kCheckFailed);
  EXPECT_TRUE(fs::exists(dir_ / "events.csv"));
  EXPECT_EQ(run({"couple", "--process", "bm", "--pairs", "500", "--nt", "50"}), cli::kOk) << stdout_.str();
}

TEST_F(CliTest, SupportOnBrownianMotion) {
  EXPECT_EQ(run({"support", "--process", "bm", "--paths", "5000", "--nt", "20"}), cli::kOk) << stdout_.str();
  EXPECT_TRUE(fs::exists(dir_ / "support.csv"));
}

TEST_F(CliTest, CounterexampleDemonstratesDiscontinuity) {
  EXPECT_EQ(run({"counterexample", "--paths", "2000", "--nt", "100", "--nx", "300"}), cli::kOk) << stdout_.str();
  EXPECT_NE(stdout_.str().find("f(1, 0.5) = 1.25"), std::string::npos);
  const auto h = first_line(dir_ / "surface.csv");
  EXPECT_NE(h.find(" T=2 "), std::string::npos) << h;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({"simulate", "--process", "nope"}), cli::kUsage);
  EXPECT_EQ(run({"simulate", "--bogus", "1"}), cli::kUsage);
  EXPECT_EQ(run({"condexp", "--process", "poisson"}), cli::kUsage);
  EXPECT_EQ(run({"verify", "--k", "2", "--K", "1"}), cli::kUsage);
  EXPECT_EQ(run({"verify", "--payoff", "nope"}), cli::kUsage);
  EXPECT_EQ(run({"simulate", "--theta", "0.2"}), cli::kUsage);
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"--help"}), cli::kOk);
}

TEST_F(CliTest, ConfigFileAndPrecedence) {
  {
    std::ofstream cfg(dir_ / "run.cfg");
    cfg << "process=poisson\npaths=4\nnt=8\nseed=11\nmin-count=3\n";
  }
  ASSERT_EQ(run({"simulate", "--config", (dir_ / "run.cfg").string(), "--paths", "6"}), cli::kOk) << stderr_.str();
  const auto h = first_line(dir_ / "paths.csv");
  EXPECT_NE(h.find("process=poisson"), std::string::npos) << h;
  EXPECT_NE(h.find("paths=6"), std::string::npos) << h;
  EXPECT_NE(h.find("min-count=3"), std::string::npos) << h;
  EXPECT_NE(h.find("seed=11"), std::string::npos) << h;
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("MSHAPE_SEED", "1234", 1);
  ASSERT_EQ(run({"simulate", "--paths", "2", "--nt", "4"}), cli::kOk);
  EXPECT_NE(first_line(dir_ / "paths.csv").find("seed=1234"), std::string::npos);
  ::setenv("MSHAPE_SEED", "abc", 1);
  EXPECT_EQ(run({"simulate", "--paths", "2", "--nt", "4"}), cli::kUsage);
  ::unsetenv("MSHAPE_SEED");
}
