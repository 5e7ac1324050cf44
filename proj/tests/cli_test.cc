#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome Cli(const std::string& args) {
  const std::string cmd = std::string(OQA_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oqa_cli_" +
            std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }
  std::string Write(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name)) << text;
    return Path(name);
  }
  static std::string Slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, RunPrintsSummaryAndPasses) {
  const Outcome r = Cli(
      "run --learner lazy --adversary random:universe=10,T=200 "
      "--experts value:N=4 --M 2 --seed 1 --check-bounds");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"bounds_passed\": true"), std::string::npos);
  EXPECT_NE(r.out.find("\"learner\": \"lazy\""), std::string::npos);
}

TEST_F(CliTest, RunWritesFiles) {
  const std::string csv = Path("l.csv");
  const std::string summary = Path("s.json");
  const Outcome r = Cli(
      "run --learner value-lazy --adversary random:universe=10,T=50 "
      "--experts value:N=3 --M 1 --csv " + csv + " --summary " + summary);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  const std::string rows = Slurp(csv);
  EXPECT_EQ(rows.rfind("t,kind,qid,cost,L,opt", 0), 0u);
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 51);
  EXPECT_NE(Slurp(summary).find("\"T\": 50"), std::string::npos);
}

TEST_F(CliTest, StreamAndSuiteFiles) {
  const std::string stream = Write("s.txt", "T x 1\nT y 2\nE x\nE y\n");
  const std::string experts = Write(
      "e.txt",
      "expert a value x 2\nexpert a value y 1\n"
      "expert b value x 1\nexpert b value y 2\n");
  const Outcome r = Cli("run --learner value-lazy --adversary " + stream +
                        " --experts " + experts + " --N 2 --check-bounds");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"OPT\": 1"), std::string::npos);
}

TEST_F(CliTest, BudgetViolationExitsOne) {
  const Outcome r =
      Cli("run --learner lazy --adversary lowerbound:c=1,N=4,M=2,opt=1");
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(Cli("run --learner nope --adversary random:universe=3,T=5 "
                "--experts value:N=2").code,
            2);
  EXPECT_EQ(Cli("run --learner lazy --adversary random:universe=3,T=5 "
                "--experts value:N=2 --N 3").code,
            2);
  EXPECT_EQ(Cli("run --learner lazy --adversary " + Path("missing") +
                " --experts value:N=2").code,
            2);
  EXPECT_EQ(Cli("run --learner mwu --adversary random:universe=3,T=5 "
                "--experts value:N=2 --gamma 2").code,
            2);
  EXPECT_EQ(Cli("run --learner lazy").code, 2);
  EXPECT_EQ(Cli("run --learner lazy --adversary random:universe=3,T=5 "
                "--experts value:N=2 --oracle magic").code,
            2);
  EXPECT_EQ(Cli("").code, 2);
}

TEST_F(CliTest, SweepEmitsOneLinePerRun) {
  const std::string grid = Write("g.json", R"({
    "learners": ["lazy", "value-lazy"],
    "adversaries": ["random:universe=8,T=100"],
    "experts": ["value:N=3"],
    "M": [1, 2],
    "seeds": [0, 1, 2]
  })");
  const Outcome r = Cli("sweep --grid " + grid + " --workers 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 12);
  EXPECT_EQ(Cli("sweep --grid " + Write("bad.json", "[]")).code, 2);
}

TEST_F(CliTest, VerifyQuickReportsEveryCriterion) {
  const Outcome r = Cli("verify --quick");
  int lines = 0;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("PASS [", 0) == 0 || line.rfind("FAIL [", 0) == 0) ++lines;
  }
  EXPECT_EQ(lines, 9);
  const bool any_fail = r.out.find("FAIL [") != std::string::npos;
  EXPECT_EQ(r.code, any_fail ? 1 : 0);
}

}  // namespace
