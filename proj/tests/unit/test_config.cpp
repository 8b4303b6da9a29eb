#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ncsbound/config.hpp"
#include "ncsbound/error.hpp"
#include "ncsbound/pipeline.hpp"

using namespace ncsbound;

namespace {

std::string minimal_network() {
  return R"(
[network]
stations = ["a", "b"]
[[network.switch]]
id = "sw"
port_count = 2
[[network.link]]
from = "a"
to = "sw"
capacity = "10Mbps"
[[network.link]]
from = "b"
to = "sw"
capacity = 1250000
[[stream]]
id = "f"
source = "a"
destination = "b"
sigma = 100
rho = "80kbps"
max_frame_len = 100
)";
}

// Parses and returns the ConfigError, failing the test if none is thrown.
ConfigError config_error(const std::string& text) {
  try {
    config::parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("none");
}

}  // namespace

TEST(Config, BuiltinMatchesHandBuiltCaseStudy) {
  const auto cfg = config::parse_config(pipeline::builtin_config());
  ASSERT_TRUE(cfg.network);
  const auto expected = fixtures::case_study();
  EXPECT_EQ(cfg.network->stations, expected.stations);
  ASSERT_EQ(cfg.network->streams.size(), expected.streams.size());
  for (std::size_t i = 0; i < expected.streams.size(); ++i) {
    const auto& a = cfg.network->streams[i];
    const auto& b = expected.streams[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.envelope0, b.envelope0);
    EXPECT_EQ(a.max_frame_len, b.max_frame_len);
    EXPECT_EQ(a.route, b.route);
  }
  EXPECT_EQ(cfg.network->links.size(), expected.links.size());
  for (const auto& l : expected.links) {
    const auto* found = cfg.network->find_link(l.from, l.to);
    ASSERT_NE(found, nullptr);
    EXPECT_EQ(found->capacity, l.capacity);
  }
  ASSERT_TRUE(cfg.control);
  EXPECT_EQ(cfg.control->unit, TimeUnit::Milliseconds);
  EXPECT_EQ(cfg.control->plant.den, fixtures::plant_ms().den);
  EXPECT_EQ(cfg.control->controller.num, fixtures::controller_ms().num);
  EXPECT_EQ(cfg.control->sensor_stream, "s1");
  EXPECT_FALSE(cfg.stability.ubd);
  EXPECT_EQ(cfg.stability.grid.points_per_decade, 200);
  EXPECT_EQ(cfg.simulation.sensor.bound, 3.5);
  EXPECT_EQ(cfg.simulation.actuator.redraw_period, 10.0);
  EXPECT_EQ(cfg.validation.cases, 100u);
  EXPECT_DOUBLE_EQ(cfg.validation.horizon, 0.2);
  EXPECT_EQ(cfg.output.capacity_sweep, (std::vector<double>{6.25e5, 1.25e6, 1.25e7}));
}

TEST(Config, SectionsAreOptional) {
  const auto cfg = config::parse_config(minimal_network());
  ASSERT_TRUE(cfg.network);
  EXPECT_FALSE(cfg.control);
  EXPECT_EQ(cfg.network->links.size(), 4u);  // duplex by default
  EXPECT_EQ(cfg.network->streams[0].route, (std::vector<std::string>{"sw"}));
  EXPECT_DOUBLE_EQ(cfg.network->streams[0].envelope0.rho, 1e4);
  EXPECT_FALSE(config::parse_config("").network);
}

TEST(Config, ErrorsNameFieldAndLine) {
  auto text = minimal_network();
  text.replace(text.find("rho = \"80kbps\""), 14, "rho = \"quick\"");
  const auto e = config_error(text);
  EXPECT_EQ(e.field(), "stream[0].rho");
  EXPECT_EQ(e.line(), 20);
}

TEST(Config, UnknownKeysAreRejected) {
  const auto e = config_error(minimal_network() + "colour = \"red\"\n");
  EXPECT_NE(e.field().find("colour"), std::string::npos);
  const auto f = config_error("[control]\ntime_unit = \"ms\"\nplant = { num = [1], den = [1, 1], gain = 2 }\n"
                              "controller = { num = [1], den = [1] }\n");
  EXPECT_NE(f.field().find("gain"), std::string::npos);
}

TEST(Config, SyntaxErrorHasALine) {
  const auto e = config_error("[network]\nstations = [\"a\",\n\n= 3\n");
  EXPECT_GT(e.line(), 0);
}

TEST(Config, ControlStreamsMustExist) {
  const auto control = std::string("[control]\ntime_unit = \"ms\"\n"
                                    "plant = { num = [2.0], den = [1.0, 5.2, 1.0] }\n"
                                    "controller = { num = [0.5, 0.5], den = [0.0, 1.0] }\n");
  EXPECT_NO_THROW(config::parse_config(minimal_network() + control + "sensor_stream = \"f\"\n"));
  const auto e = config_error(minimal_network() + control + "sensor_stream = \"g\"\n");
  EXPECT_EQ(e.field(), "control.sensor_stream");
}

TEST(Config, TimeUnitIsRequired) {
  const auto e = config_error("[control]\nplant = { num = [1], den = [1, 1] }\ncontroller = { num = [1], den = [1] }\n");
  EXPECT_EQ(e.field(), "control.time_unit");
}

TEST(Config, DurationsKeepOrConvertUnits) {
  const auto text = std::string("[control]\ntime_unit = \"ms\"\n"
                                "plant = { num = [1], den = [1, 1] }\ncontroller = { num = [1], den = [1] }\n"
                                "[stability]\nubd = \"0.002s\"\n"
                                "[simulation]\nhorizon = \"0.5s\"\nstep = 0.02\n"
                                "sensor_delay = { kind = \"constant\", bound = 1.5 }\n");
  const auto cfg = config::parse_config(text);
  ASSERT_TRUE(cfg.stability.ubd);
  // The stability ubd keeps its own unit; the check later refuses it.
  EXPECT_EQ(cfg.stability.ubd->unit, TimeUnit::Seconds);
  EXPECT_DOUBLE_EQ(cfg.simulation.horizon, 500.0);
  EXPECT_DOUBLE_EQ(cfg.simulation.step, 0.02);
  EXPECT_EQ(cfg.simulation.sensor.kind, smith::DelayProcess::Kind::Constant);
  EXPECT_EQ(cfg.simulation.sensor.bound, 1.5);
  EXPECT_FALSE(cfg.simulation.actuator.bound);
}

TEST(Config, BadValues) {
  EXPECT_EQ(config_error("[output]\ncapacity_sweep = [\"fast\"]\n").field(), "output.capacity_sweep[0]");
  EXPECT_EQ(config_error("[simulation]\ninternal_delay = \"pade\"\n").field(), "simulation.internal_delay");
  EXPECT_EQ(config_error("[validation]\ncases = -3\n").field(), "validation.cases");
}

TEST(Config, LoadMissingFile) { EXPECT_THROW(config::load_config("/nonexistent/ncsbound.toml"), ConfigError); }
