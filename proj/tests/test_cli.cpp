#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "golden_cases.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  const int code = qcs::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string golden_path(const std::string& name) { return std::string(QCS_GOLDEN_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

class Golden : public ::testing::TestWithParam<golden::Case> {};

TEST_P(Golden, MatchesFile) {
  const golden::Case& c = GetParam();
  const Outcome o = run(golden::resolve(c, QCS_GOLDEN_DIR));
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string path = golden_path(c.file);
  // set QCS_UPDATE_GOLDEN=1 to rewrite the expected files
  if (std::getenv("QCS_UPDATE_GOLDEN")) {
    std::ofstream(path) << o.out;
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << path;
  EXPECT_EQ(o.out, slurp(path));
}

INSTANTIATE_TEST_SUITE_P(Cli, Golden, ::testing::ValuesIn(golden::cases()),
                         [](const auto& info) { return info.param.file.substr(0, info.param.file.find('.')); });

TEST(Bounds, DkwScaledRadius) {
  const Outcome o = run({"bounds", "--methods", "dkw_fixed", "--p", "0.5", "--t", "100,10000"});
  ASSERT_EQ(o.code, 0);
  const auto rows = csv_rows(o.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(std::stod(rows[1][4]), 1.358, 1e-3);
  EXPECT_NEAR(std::stod(rows[2][4]), 1.358, 1e-3);
}

TEST(Bounds, EchoesTunedR) {
  const Outcome o = run({"bounds", "--methods", "beta_binomial", "--p", "0.5", "--t", "100"});
  ASSERT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("# r=0.758"), std::string::npos);
}

TEST(Bounds, EmptyTimesGiveHeaderOnly) {
  const Outcome o = run({"bounds", "--t", ""});
  ASSERT_EQ(o.code, 0);
  const auto rows = csv_rows(o.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][0], "t");
}

TEST(Bounds, UnknownMethodIsUsageError) {
  const Outcome o = run({"bounds", "--methods", "nope"});
  EXPECT_EQ(o.code, qcs::cli::kUsage);
  EXPECT_NE(o.err.find("nope"), std::string::npos);
}

TEST(Track, EarlyBoundsAreInfinite) {
  const Outcome o = run({"track", "--p", "0.5"}, "1\n2\n3\n4\n");
  ASSERT_EQ(o.code, 0);
  const auto rows = csv_rows(o.out);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][2], "-inf");
    EXPECT_EQ(rows[i][3], "inf");
  }
}

TEST(Track, ParseErrorNamesTheLine) {
  const Outcome o = run({"track"}, "1\n\nabc\n");
  EXPECT_EQ(o.code, qcs::cli::kData);
  EXPECT_NE(o.err.find("line 3"), std::string::npos);
}

TEST(Track, NanRejected) {
  EXPECT_EQ(run({"track"}, "1\nnan\n").code, qcs::cli::kData);
}

TEST(Track, BadLevelIsUsageError) {
  EXPECT_EQ(run({"track", "--p", "1.5"}, "1\n").code, qcs::cli::kUsage);
}

TEST(Ks, UnequalCountsReportPairingError) {
  const Outcome o = run({"ks", "--mode", "two_sample", "--arms", "a,b"}, "a,1\nb,5\na,2\n");
  EXPECT_EQ(o.code, qcs::cli::kData);
  EXPECT_NE(o.err.find("'a'"), std::string::npos);
  EXPECT_EQ(csv_rows(o.out).size(), 2u);
}

TEST(Ks, LatchKeepsRejecting) {
  std::string input;
  for (int i = 0; i < 400; ++i) {
    input += "a," + std::to_string((i * 37 % 101) / 101.0) + "\n";
    input += "b," + std::to_string((i * 53 % 103) / 103.0 + 0.6) + "\n";
  }
  const auto latched = csv_rows(run({"ks", "--mode", "two_sample", "--arms", "a,b", "--latch"}, input).out);
  bool seen = false;
  for (std::size_t i = 1; i < latched.size(); ++i) {
    if (seen) {
      EXPECT_EQ(latched[i][3], "1");
    }
    seen = seen || latched[i][3] == "1";
  }
  EXPECT_TRUE(seen);
}

TEST(Ks, OneSampleJson) {
  const Outcome o = run({"ks", "--mode", "one_sample", "--reference", "uniform(0,4)", "--format", "json"},
                        "1\n2\n3\n4\n");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("\"columns\""), std::string::npos);
  EXPECT_NE(o.out.find("\"stat\": 0.25"), std::string::npos);
}

TEST(AbTest, RunningMinNeverIncreases) {
  const auto rows = csv_rows(run({"abtest", "--input", golden_path("ab.in"), "--arms", "control,treatment",
                                  "--running-min"})
                                 .out);
  double prev = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double p = std::stod(rows[i][3]);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(AbTest, UnknownLabelIsDataError) {
  EXPECT_EQ(run({"abtest", "--arms", "a,b"}, "a,1\nc,2\n").code, qcs::cli::kData);
}

TEST(Config, FileValuesAndFlagPrecedence) {
  const fs::path cfg = fs::temp_directory_path() / "qcs_cli_test.conf";
  std::ofstream(cfg) << "# bounds table\nmethods = dkw_fixed\np = 0.5\nt = 100\nalpha = 0.1\n";
  const Outcome from_file = run({"bounds", "--config", cfg.string()});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_NE(from_file.out.find("# alpha=0.1"), std::string::npos);
  const Outcome overridden = run({"bounds", "--config", cfg.string(), "--alpha", "0.05"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_NE(overridden.out.find("# alpha=0.05"), std::string::npos);
  fs::remove(cfg);
}

TEST(Config, MissingFileIsUsageError) {
  EXPECT_EQ(run({"bounds", "--config", "/nonexistent/qcs.conf"}).code, qcs::cli::kUsage);
}

TEST(Output, OutFlagWritesFile) {
  const fs::path path = fs::temp_directory_path() / "qcs_cli_out.csv";
  const Outcome o = run({"bounds", "--methods", "dkw_fixed", "--t", "100", "--p", "0.5", "--out", path.string()});
  ASSERT_EQ(o.code, 0);
  EXPECT_TRUE(o.out.empty());
  EXPECT_NE(slurp(path.string()).find("dkw_fixed"), std::string::npos);
  fs::remove(path);
}

TEST(Seed, EnvironmentDefault) {
  const std::vector<std::string> args = {"bai", "--runs", "1", "--pi", "0.5", "--K", "2", "--eps", "0.2"};
  ::setenv("QCS_SEED", "11", 1);
  const Outcome env = run(args);
  ::unsetenv("QCS_SEED");
  auto explicit_args = args;
  explicit_args.insert(explicit_args.end(), {"--seed", "11"});
  EXPECT_EQ(env.out, run(explicit_args).out);
  EXPECT_NE(env.out.find("# seed=11"), std::string::npos);
  ::setenv("QCS_SEED", "abc", 1);
  EXPECT_EQ(run(args).code, qcs::cli::kUsage);
  ::unsetenv("QCS_SEED");
}
