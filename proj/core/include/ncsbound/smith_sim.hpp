#pragma once

// Fixed-step simulation of a loop closed over a network: the controller
// output reaches the plant after an actuator-side delay and the measurement
// reaches the controller after a sensor-side delay. Optionally with a Smith
// predictor built from a plant model.
//
// All times are in the loop's time unit (that of the transfer functions).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncsbound/lti.hpp"

namespace ncsbound::smith {

struct DelayProcess {
  enum class Kind { Constant, Uniform };

  Kind kind = Kind::Constant;
  double value = 0.0;          // Constant: the delay; Uniform: the upper end
  double redraw_period = 10.0;  // Uniform only
  std::uint64_t seed = 0;       // Uniform only

  static DelayProcess constant(double tau) { return {Kind::Constant, tau, 0.0, 0}; }
  static DelayProcess uniform(double ubd, double redraw_period, std::uint64_t seed) {
    return {Kind::Uniform, ubd, redraw_period, seed};
  }
  double upper() const { return value; }
};

/// Delay applied at each time instant. Uniform draws are piecewise constant
/// over [k T, (k + 1) T) and depend only on (seed, k). Throws InvalidArgument.
std::vector<double> realize(const DelayProcess& process, std::span<const double> times);

struct Setpoint {
  enum class Kind { Step, Square, Samples };

  Kind kind = Kind::Square;
  double amplitude = 1.0;
  double low = 0.0;       // Square: value during the second half period
  double period = 100.0;  // Square
  double start = 0.0;     // Step: switching time
  std::vector<double> sample_times;  // Samples: piecewise linear, held flat outside
  std::vector<double> sample_values;

  static Setpoint step(double amplitude = 1.0, double start = 0.0);
  static Setpoint square(double amplitude, double period, double low = 0.0);
  static Setpoint samples(std::vector<double> times, std::vector<double> values);

  double at(double t) const;
  /// End of the first constant segment, or the horizon if it never changes.
  double first_change(double horizon) const;
};

enum class InternalDelay { ExactBuffer, RationalApprox };

struct LoopConfig {
  lti::TransferFunction plant;
  std::optional<lti::TransferFunction> model;  // defaults to the plant
  lti::TransferFunction controller;
  double model_delay = 0.0;  // round-trip estimate used inside the predictor
  InternalDelay internal_delay = InternalDelay::ExactBuffer;
  DelayProcess sensor_delay;
  DelayProcess actuator_delay;
  Setpoint setpoint;
  double step = 0.01;
  double horizon = 200.0;

  const lti::TransferFunction& plant_model() const { return model ? *model : plant; }
};

/// Throws InvalidArgument / UnitMismatch / ImproperTransferFunction. Checks
/// step > 0, step <= redraw period / 10, horizon >= 10 x the slowest
/// non-integrating plant time constant, strictly proper plant and model.
void validate(const LoopConfig& cfg);

struct Metrics {
  double ise = 0.0;
  double overshoot_pct = 0.0;            // first setpoint segment
  std::optional<double> settling_time;   // 2 % band, first segment; none if it never settles there
};

struct SimTrace {
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> error;  // corrected error for the Smith loop, plain error otherwise
  std::vector<double> u;
  std::vector<double> actuator_delay;
  std::vector<double> sensor_delay;
  std::vector<double> y;
  bool diverged = false;  // |y| exceeded 1e9; the columns stop there
  Metrics metrics;

  std::size_t size() const { return t.size(); }
};

/// Metrics from the columns alone. `step` is the sample spacing.
Metrics compute_metrics(const SimTrace& trace, const Setpoint& setpoint, double step);

/// e = r - y_sensor, no compensation.
SimTrace run_uncompensated(const LoopConfig& cfg);

/// e = r - y_sensor + y*_delayed - y*, with y* the model driven by the
/// controller output and y*_delayed the same signal delayed by model_delay.
SimTrace run_smith(const LoopConfig& cfg);

struct Run {
  std::string label;
  bool smith = true;
  LoopConfig cfg;
};

struct ComparisonEntry {
  std::string label;
  bool smith = true;
  SimTrace trace;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;
};

/// Runs every configuration. All must share step and horizon.
ComparisonReport compare(std::span<const Run> runs);

void write_trace_csv(std::ostream& out, const SimTrace& trace);

/// Setpoint plus one output curve per entry.
std::string traces_svg(const ComparisonReport& report, const std::string& time_unit);

}  // namespace ncsbound::smith
