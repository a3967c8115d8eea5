#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "runner/runner.hpp"

using namespace critvar;
using namespace critvar::runner;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("critvar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    unsetenv("CRITVAR_OUT_DIR");
  }
  void TearDown() override {
    unsetenv("CRITVAR_OUT_DIR");
    fs::remove_all(root_);
  }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  RunOutcome run_config(const std::string& sub, const std::string& config, const std::string& out) {
    RunOptions opts;
    opts.subcommand = sub;
    opts.config_path = config;
    opts.out_dir = (root_ / out).string();
    opts.log = &log_;
    return run(opts);
  }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  static std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path root_;
  std::ostringstream log_;
};

const char* kHypotheses = R"(experiment: hypotheses
problem:
  N: 3
  lambda_over_Lambda: 0.1
  k:
    preset: two_peak
)";

}  // namespace

TEST_F(Cli, HypothesesSucceedAndSummaryIsComplete) {
  const RunOutcome r = run_config("hypotheses", write("h.yaml", kHypotheses), "out");
  ASSERT_EQ(r.exit_code, kSuccess) << r.message;
  const json s = read_json(r.out_dir / "summary.json");
  EXPECT_EQ(s["subcommand"], "hypotheses");
  EXPECT_EQ(s["status"]["exit_code"], 0);
  EXPECT_TRUE(s.contains("version"));
  EXPECT_EQ(s["modules"].size(), 9u);
  EXPECT_TRUE(s["metadata"].contains("timestamp"));
  // the resolved config carries the defaults
  EXPECT_EQ(s["config"]["problem"]["N"], 3);
  EXPECT_TRUE(s["config"].contains("solver"));
  const std::string csv = read_text(r.out_dir / "trace.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "hypothesis,holds");
}

TEST_F(Cli, FailingHypothesisExitsWithThree) {
  const std::string cfg = write("k.yaml", R"(experiment: hypotheses
problem:
  N: 3
  lambda_over_Lambda: 0.1
)");
  const RunOutcome r = run_config("hypotheses", cfg, "out");
  EXPECT_EQ(r.exit_code, kHypothesisViolated);
  EXPECT_NE(r.message.find("K0"), std::string::npos);
  EXPECT_EQ(read_json(r.out_dir / "summary.json")["status"]["exit_code"], 3);
}

TEST_F(Cli, PohozaevAuditReportsObstruction) {
  const std::string cfg = write("p.yaml", R"(experiment: pohozaev-audit
problem:
  N: 3
  A_over_Lambda: 0.3
  h:
    preset: radial_power
    params: {amplitude: 0.05, exponent: 2.0, radius: 1.0}
)");
  const RunOutcome r = run_config("pohozaev-audit", cfg, "out");
  EXPECT_EQ(r.exit_code, kHypothesisViolated);
  const json s = read_json(r.out_dir / "summary.json");
  EXPECT_EQ(s["results"]["verdict"], "PohozaevObstruction");
  EXPECT_GT(s["results"]["witness_value"].get<double>(), 0.0);
}

TEST_F(Cli, VerifyGroundStateMeetsTolerances) {
  const std::string cfg = write("v.yaml", R"(experiment: verify-groundstate
problem:
  N: 4
  A_over_Lambda: 0.5
sweep:
  mu: [0.1, 1.0, 10.0]
)");
  const RunOutcome r = run_config("verify-groundstate", cfg, "out");
  ASSERT_EQ(r.exit_code, kSuccess) << r.message;
  const json s = read_json(r.out_dir / "summary.json");
  for (const auto& row : s["results"]["rows"]) {
    EXPECT_LE(row["residual"].get<double>(), 1e-6);
    EXPECT_LE(row["quotient_rel_error"].get<double>(), 1e-6);
  }
  const std::string csv = read_text(r.out_dir / "trace.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(Cli, NonConvergenceExitsWithFour) {
  const std::string cfg = write("s.yaml", R"(experiment: solve
problem:
  N: 3
  A_over_Lambda: 0.5
solver:
  max_iterations: 2
init:
  profile: talenti
)");
  const RunOutcome r = run_config("solve", cfg, "out");
  EXPECT_EQ(r.exit_code, kNonConvergence);
  EXPECT_TRUE(fs::exists(r.out_dir / "trace.csv"));
  EXPECT_TRUE(fs::exists(r.out_dir / "fields" / "solution.json"));
}

TEST_F(Cli, MalformedConfigNamesLineAndField) {
  const RunOutcome syntax = run_config("hypotheses", write("bad.yaml", "experiment: hypotheses\nproblem: [1, 2\n"), "o1");
  EXPECT_EQ(syntax.exit_code, kConfigError);
  EXPECT_NE(syntax.message.find("bad.yaml:"), std::string::npos) << syntax.message;

  const RunOutcome field = run_config(
      "hypotheses", write("typo.yaml", "experiment: hypotheses\nproblem:\n  N: 3\n  lamda: 0.1\n"), "o2");
  EXPECT_EQ(field.exit_code, kConfigError);
  EXPECT_NE(field.message.find("lamda"), std::string::npos) << field.message;
  EXPECT_NE(field.message.find(":4"), std::string::npos) << field.message;

  const RunOutcome value = run_config(
      "hypotheses", write("n.yaml", "experiment: hypotheses\nproblem:\n  N: 2\n"), "o3");
  EXPECT_EQ(value.exit_code, kConfigError);
  EXPECT_NE(value.message.find("problem.N"), std::string::npos) << value.message;

  const RunOutcome missing = run_config("hypotheses", (root_ / "absent.yaml").string(), "o4");
  EXPECT_EQ(missing.exit_code, kConfigError);
}

TEST_F(Cli, SubcommandMustMatchTheConfig) {
  EXPECT_EQ(run_config("solve", write("h.yaml", kHypotheses), "out").exit_code, kConfigError);
  EXPECT_EQ(run_config("nonsense", write("h2.yaml", kHypotheses), "out2").exit_code, kConfigError);
}

TEST_F(Cli, SummariesAreDeterministic) {
  const std::string cfg = write("t.yaml", R"(experiment: thresholds
problem:
  N: 3
  lambda_over_Lambda: 0.05
  k:
    preset: two_peak
sweep:
  lambda_over_Lambda: [0.01, 0.1, 0.5]
)");
  const RunOutcome a = run_config("thresholds", cfg, "a");
  const RunOutcome b = run_config("thresholds", cfg, "b");
  ASSERT_EQ(a.exit_code, kSuccess) << a.message;
  ASSERT_EQ(b.exit_code, kSuccess);
  EXPECT_EQ(summary_without_metadata(a.out_dir / "summary.json"), summary_without_metadata(b.out_dir / "summary.json"));
  EXPECT_EQ(read_text(a.out_dir / "trace.csv"), read_text(b.out_dir / "trace.csv"));
}

TEST_F(Cli, OutputDirectoryPrecedence) {
  const std::string with_dir = write("d.yaml", std::string(kHypotheses) + "output:\n  dir: " + (root_ / "cfg").string() + "\n");
  RunOptions opts;
  opts.subcommand = "hypotheses";
  opts.config_path = with_dir;
  opts.log = &log_;
  EXPECT_EQ(run(opts).out_dir, root_ / "cfg");

  setenv("CRITVAR_OUT_DIR", (root_ / "env").c_str(), 1);
  EXPECT_EQ(run(opts).out_dir, root_ / "env");

  opts.out_dir = (root_ / "flag").string();
  EXPECT_EQ(run(opts).out_dir, root_ / "flag");
  for (const char* d : {"cfg", "env", "flag"}) EXPECT_TRUE(fs::exists(root_ / d / "summary.json")) << d;
}

TEST_F(Cli, CsvNumbers) {
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(csv_number(std::nan("")), "nan");
}

#ifdef CRITVAR_BINARY
TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = CRITVAR_BINARY;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status(bin + " --version"), 0);
  EXPECT_EQ(status(bin + " --help"), 0);
  EXPECT_EQ(status(bin), kConfigError);
  EXPECT_EQ(status(bin + " hypotheses"), kConfigError);
  EXPECT_EQ(status(bin + " hypotheses --config " + (root_ / "absent.yaml").string()), kConfigError);
  EXPECT_EQ(status(bin + " hypotheses --config " + write("h.yaml", kHypotheses) + " --workers 0"), kConfigError);
  EXPECT_EQ(status(bin + " hypotheses --config " + write("h2.yaml", kHypotheses) + " --out " + (root_ / "bin").string()),
            kSuccess);
  EXPECT_TRUE(fs::exists(root_ / "bin" / "summary.json"));
}
#endif
