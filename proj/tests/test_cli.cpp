#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "capmax/cli.hpp"
#include "capmax/conic.hpp"
#include "capmax/model.hpp"

using namespace capmax;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "capmax");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("capmax_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, GenerateSetsBudget) {
  const CliRun r = cli({"generate", "--m", "100", "--zones", "100", "--c-frac", "0.2", "--seed", "1", "-o", path("i.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Instance inst = read_instance_file(path("i.json"));
  EXPECT_DOUBLE_EQ(inst.budget, 20.0);
  EXPECT_EQ(inst.m, 100);
}

TEST_F(Cli, OracleRunsOnTwelveSites) {
  ASSERT_EQ(cli({"generate", "--m", "12", "--zones", "3", "--seed", "4", "-o", path("i.json")}).code, kExitOk);
  const CliRun r = cli({"solve-joint", path("i.json"), "--method", "oracle"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["result"]["status"], "optimal");
  EXPECT_EQ(doc["header"]["instance_hash"], instance_hash(read_instance_file(path("i.json"))));
}

TEST_F(Cli, MoaAgreesWithOracle) {
  ASSERT_EQ(cli({"generate", "--m", "7", "--zones", "4", "--seed", "9", "-o", path("i.json")}).code, kExitOk);
  const CliRun moa = cli({"solve-joint", path("i.json"), "--method", "moa", "--cuts", "1", "--tau", "1e-6"});
  const CliRun orc = cli({"solve-joint", path("i.json"), "--method", "oracle"});
  ASSERT_EQ(moa.code, kExitOk) << moa.err;
  ASSERT_EQ(orc.code, kExitOk) << orc.err;
  const double a = nlohmann::json::parse(moa.out)["result"]["value"];
  const double b = nlohmann::json::parse(orc.out)["result"]["value"];
  EXPECT_NEAR(a, b, 1e-6);
}

TEST_F(Cli, ReproducibleRunsAreByteIdentical) {
  for (int k = 0; k < 2; ++k) {
    const std::string s = std::to_string(k);
    ASSERT_EQ(cli({"generate", "--m", "8", "--zones", "5", "--seed", "21", "-o", path("i" + s + ".json")}).code, 0);
    for (const char* method : {"moa", "ls", "oracle"}) {
      const std::string tag = std::string(method) + s;
      const CliRun r = cli({"solve-joint", path("i0.json"), "--method", method, "--reproducible", "-o",
                         path(tag + ".json"), "--log", path(tag + ".csv")});
      ASSERT_EQ(r.code, kExitOk) << r.err;
    }
    ASSERT_EQ(cli({"bench", "--m", "5", "--zones", "2", "--count", "2", "--threads", "2", "--reproducible", "-o",
                   path("bench" + s + ".csv")})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(path("i0.json")), slurp(path("i1.json")));
  for (const char* method : {"moa", "ls", "oracle"}) {
    const std::string m = method;
    EXPECT_EQ(slurp(path(m + "0.json")), slurp(path(m + "1.json"))) << m;
    EXPECT_EQ(slurp(path(m + "0.csv")), slurp(path(m + "1.csv"))) << m;
    EXPECT_FALSE(slurp(path(m + "0.csv")).empty());
  }
  EXPECT_EQ(slurp(path("bench0.csv")), slurp(path("bench1.csv")));
}

TEST_F(Cli, SolveCostReportsMultipliers) {
  ASSERT_EQ(cli({"generate", "--m", "5", "--zones", "3", "--seed", "2", "-o", path("i.json")}).code, 0);
  const CliRun r = cli({"solve-cost", path("i.json"), "--open", "0,3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["y"], (std::vector<int>{1, 0, 0, 1, 0}));
  EXPECT_TRUE(doc["multipliers"].contains("lambda"));
}

TEST_F(Cli, ExportConicParses) {
  ASSERT_EQ(cli({"generate", "--m", "4", "--zones", "3", "--seed", "2", "-o", path("i.json")}).code, 0);
  const CliRun fc = cli({"export-conic", path("i.json"), "--which", "fc"});
  ASSERT_EQ(fc.code, kExitOk) << fc.err;
  const ConicModel model = conic_from_json(nlohmann::json::parse(fc.out));
  EXPECT_EQ(model.num_binary(), 4);
  EXPECT_EQ(model.num_constraints(), 6 * 4 + 2 * 3 + 2);
  const CliRun cp = cli({"export-conic", path("i.json"), "--which", "cp", "--open", "1"});
  ASSERT_EQ(cp.code, kExitOk) << cp.err;
  EXPECT_EQ(conic_from_json(nlohmann::json::parse(cp.out)).num_continuous(), 1 + 2 * 3);
}

TEST_F(Cli, FitWritesCsv) {
  const CliRun r = cli({"fit", "--experiment", "curve1d"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"solve-joint", "x.json", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"solve-joint", "x.json", "--method", "simplex"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({"solve-joint", path("missing.json")}).code, kExitInput);
  ASSERT_EQ(cli({"generate", "--m", "6", "--zones", "2", "--k-frac", "0.2", "--seed", "2", "-o", path("i.json")}).code,
            0);
  const CliRun r = cli({"solve-cost", path("i.json"), "--open", "0,1,2"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("cardinality"), std::string::npos);
  ASSERT_EQ(cli({"generate", "--m", "22", "--zones", "2", "--seed", "2", "-o", path("big.json")}).code, 0);
  EXPECT_EQ(cli({"solve-joint", path("big.json"), "--method", "oracle"}).code, kExitInput);
}

TEST_F(Cli, LimitExitCode) {
  ASSERT_EQ(cli({"generate", "--m", "8", "--zones", "4", "--seed", "3", "-o", path("i.json")}).code, 0);
  const CliRun r = cli({"solve-joint", path("i.json"), "--method", "ls", "--time-limit", "0"});
  EXPECT_EQ(r.code, kExitLimit);
  EXPECT_EQ(nlohmann::json::parse(r.out)["result"]["status"], "limit");
}
