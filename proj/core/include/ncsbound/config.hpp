#pragma once

// One TOML file describes the whole pipeline. Every section is optional;
// commands complain about the sections they need.
//
//   [network]          stations, [[network.switch]], [[network.link]]
//   [[stream]]         id, source, destination, sigma, rho, max_frame_len, route
//   [control]          time_unit, plant, controller, model, sensor_stream, actuator_stream
//   [stability]        ubd, omega_min, omega_max, points_per_decade
//   [simulation]       setpoint, step, horizon, delay, model_delay, internal_delay
//   [validation]       cases, horizon
//   [output]           directory, capacity_sweep

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncsbound/lti.hpp"
#include "ncsbound/net_model.hpp"
#include "ncsbound/smith_sim.hpp"
#include "ncsbound/stability.hpp"
#include "ncsbound/units.hpp"

namespace ncsbound::config {

struct ControlSection {
  TimeUnit unit = TimeUnit::Milliseconds;
  lti::TransferFunction plant;
  lti::TransferFunction controller;
  std::optional<lti::TransferFunction> model;  // plant model for the predictor
  std::string sensor_stream;
  std::string actuator_stream;
};

struct StabilitySection {
  stability::Grid grid;
  std::optional<TimeValue> ubd;  // none: take it from the network
};

struct DelaySpec {
  smith::DelayProcess::Kind kind = smith::DelayProcess::Kind::Uniform;
  std::optional<double> bound;  // control time unit; none: the stream's bound from the network
  double redraw_period = 10.0;
};

struct SimulationSection {
  smith::Setpoint setpoint = smith::Setpoint::square(1.0, 100.0);
  double step = 0.01;
  double horizon = 200.0;
  DelaySpec sensor;
  DelaySpec actuator;
  std::optional<double> model_delay;  // none: the larger of the two delay bounds
  smith::InternalDelay internal_delay = smith::InternalDelay::ExactBuffer;
};

struct ValidationSection {
  std::size_t cases = 100;
  double horizon = 0.2;  // seconds
};

struct OutputSection {
  std::string directory = "ncsbound-out";
  std::vector<double> capacity_sweep;  // bytes/second
};

struct PipelineConfig {
  std::optional<net::NetworkModel> network;
  std::optional<ControlSection> control;
  StabilitySection stability;
  SimulationSection simulation;
  ValidationSection validation;
  OutputSection output;
};

/// Throws ConfigError with the line and field of the first problem found.
PipelineConfig parse_config(std::string_view text, std::string_view source_name = "config");
PipelineConfig load_config(const std::string& path);

}  // namespace ncsbound::config
