#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ncsbound/pipeline.hpp"

using namespace ncsbound;
namespace fs = std::filesystem;

namespace {

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ncsbound-test-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    opts_.out_dir = dir_.string();
    opts_.out = &out_;
    opts_.err = &err_;
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Writes a config next to the outputs and points the options at it.
  void use_config(const std::string& text) {
    fs::create_directories(dir_);
    const auto path = dir_ / "config.toml";
    std::ofstream(path) << text;
    opts_.config_path = path.string();
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string builtin_with(const std::string& from, const std::string& to) const {
    std::string text(pipeline::builtin_config());
    const auto at = text.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return text.replace(at, from.size(), to);
  }

  fs::path dir_;
  pipeline::Options opts_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(Pipeline, DelayOnCaseStudy) {
  opts_.json = true;
  ASSERT_EQ(pipeline::cmd_delay(opts_), pipeline::kOk) << err_.str();
  const auto csv = read("delay.csv");
  EXPECT_NE(csv.find("s1,process,controller,1,72,"), std::string::npos);
  EXPECT_NE(out_.str().find("2.895828"), std::string::npos);
  EXPECT_FALSE(read("delay_switches.csv").empty());
  const auto sweep = read("capacity_sweep.csv");
  EXPECT_NE(sweep.find("1250000,10,s1,0.00289582814"), std::string::npos);
  EXPECT_NE(read("delay.json").find("\"ubd_s\""), std::string::npos);
}

TEST_F(Pipeline, DelayWithoutStreams) {
  use_config("[network]\nstations = [\"a\"]\n");
  ASSERT_EQ(pipeline::cmd_delay(opts_), pipeline::kOk) << err_.str();
  const auto csv = read("delay.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
}

TEST_F(Pipeline, DelayOnSaturatedNetwork) {
  use_config(builtin_with("rho = 305200", "rho = 1000000"));
  EXPECT_EQ(pipeline::cmd_delay(opts_), pipeline::kNonConvergent);
  EXPECT_NE(err_.str().find("process"), std::string::npos) << err_.str();
}

TEST_F(Pipeline, DelayOnBrokenConfig) {
  use_config(builtin_with("sigma = 72", "sigma = \"lots\""));
  EXPECT_EQ(pipeline::cmd_delay(opts_), pipeline::kFailure);
  EXPECT_NE(err_.str().find("stream[0].sigma"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("line "), std::string::npos);
}

TEST_F(Pipeline, StabilityGivenDelay) {
  opts_.plot = true;
  opts_.json = true;
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::string("3.5ms")), pipeline::kViolated);
  EXPECT_NE(out_.str().find("violating band [0.23538"), std::string::npos) << out_.str();
  EXPECT_NE(read("stability.svg").find("<svg"), std::string::npos);
  EXPECT_NE(read("stability.json").find("\"holds\": false"), std::string::npos);
  EXPECT_EQ(read("stability_sweep.csv").substr(0, 25), "omega,abs_T,limit,abs_wh_");
}

TEST_F(Pipeline, StabilityZeroDelayHolds) {
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::string("0")), pipeline::kOk) << err_.str();
}

TEST_F(Pipeline, StabilityUnitMismatch) {
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::string("0.0035s")), pipeline::kFailure);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(Pipeline, StabilityFromNetworkUsesSensorStream) {
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::string("from-network")), pipeline::kViolated);
  EXPECT_NE(out_.str().find("UBD = 2.89583 ms (network bound of s1)"), std::string::npos) << out_.str();
  // Same as giving the network value explicitly.
  const std::string explicit_run = out_.str().substr(out_.str().find('\n'));
  out_.str("");
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::string("2.8958281411955965ms")), pipeline::kViolated);
  EXPECT_EQ(out_.str().substr(out_.str().find('\n')), explicit_run);
}

TEST_F(Pipeline, StabilityNominallyUnstable) {
  use_config(builtin_with("den = [1.0, 5.2, 1.0]", "den = [-1.0, 5.2, 1.0]"));
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::string("3.5ms")), pipeline::kNominallyUnstable);
}

TEST_F(Pipeline, SimulateBoth) {
  opts_.plot = true;
  ASSERT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Both), pipeline::kOk) << err_.str();
  const auto metrics = read("metrics.csv");
  EXPECT_NE(metrics.find("plain,"), std::string::npos);
  EXPECT_NE(metrics.find("smith,18.4615"), std::string::npos) << metrics;
  EXPECT_FALSE(read("trace_smith.csv").empty());
  EXPECT_FALSE(read("trace_plain.csv").empty());
  EXPECT_NE(read("simulate.svg").find("<svg"), std::string::npos);
}

TEST_F(Pipeline, SimulateIsReproducible) {
  ASSERT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Smith), pipeline::kOk);
  const auto first = read("trace_smith.csv");
  ASSERT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Smith), pipeline::kOk);
  EXPECT_EQ(read("trace_smith.csv"), first);
  opts_.seed = 1;
  ASSERT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Smith), pipeline::kOk);
  EXPECT_NE(read("trace_smith.csv"), first);
}

TEST_F(Pipeline, SimulateZeroHorizon) {
  use_config(builtin_with("horizon = 200.0", "horizon = 0.0"));
  EXPECT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Both), pipeline::kFailure);
}

TEST_F(Pipeline, SimulateDelayFromNetwork) {
  use_config(builtin_with("bound = \"3.5ms\", ", ""));
  ASSERT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Smith), pipeline::kOk) << err_.str();
  EXPECT_NE(out_.str().find("delays up to 2.89583 / 2.89583 ms"), std::string::npos) << out_.str();
}

TEST_F(Pipeline, ValidateConfiguredOnly) {
  opts_.json = true;
  ASSERT_EQ(pipeline::cmd_validate(opts_, std::size_t{0}), pipeline::kOk) << err_.str();
  EXPECT_NE(out_.str().find("models 1 (solved 1)"), std::string::npos) << out_.str();
  EXPECT_NE(read("validate.json").find("\"violations\": 0"), std::string::npos);
}

TEST_F(Pipeline, ValidateIsReproducible) {
  opts_.seed = 4;
  ASSERT_EQ(pipeline::cmd_validate(opts_, std::size_t{5}), pipeline::kOk);
  const auto first = read("validate_summary.csv");
  ASSERT_EQ(pipeline::cmd_validate(opts_, std::size_t{5}), pipeline::kOk);
  EXPECT_EQ(read("validate_summary.csv"), first);
}

TEST_F(Pipeline, MissingSections) {
  use_config("[output]\ndirectory = \"x\"\n");
  EXPECT_EQ(pipeline::cmd_delay(opts_), pipeline::kFailure);
  EXPECT_EQ(pipeline::cmd_stability(opts_, std::nullopt), pipeline::kFailure);
  EXPECT_EQ(pipeline::cmd_simulate(opts_, pipeline::SimMode::Both), pipeline::kFailure);
  EXPECT_EQ(pipeline::cmd_validate(opts_, std::nullopt), pipeline::kFailure);
}
