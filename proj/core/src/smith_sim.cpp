#include "ncsbound/smith_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "ncsbound/error.hpp"
#include "ncsbound/report.hpp"

namespace ncsbound::smith {

namespace {

constexpr double kDivergence = 1e9;
constexpr double kSettleBand = 0.02;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits.
double unit_draw(std::uint64_t seed, std::uint64_t index) {
  const auto bits = splitmix64(splitmix64(seed) ^ index);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// History of a signal sampled every `step`, read back at a delay with linear
// interpolation. Samples before the start of the run read as 0.
class TransportBuffer {
 public:
  TransportBuffer(double step, double max_delay)
      : step_(step), data_(static_cast<std::size_t>(std::ceil(max_delay / step)) + 3, 0.0) {}

  void push(double v) {
    head_ = (head_ + 1) % data_.size();
    data_[head_] = v;
    ++count_;
  }

  double read(double delay) const {
    const double d = delay / step_;
    if (d <= 0.0) return back(0);
    const auto i = static_cast<std::size_t>(std::floor(d));
    const double frac = d - static_cast<double>(i);
    return (1.0 - frac) * back(i) + frac * back(i + 1);
  }

 private:
  double back(std::size_t i) const {
    if (i >= count_ || i >= data_.size()) return 0.0;
    return data_[(head_ + data_.size() - i) % data_.size()];
  }

  double step_;
  std::vector<double> data_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

lti::DiscreteSystem discrete(const lti::TransferFunction& tf, double step) {
  return lti::DiscreteSystem(lti::discretize(lti::to_state_space(tf), step));
}

void check_delay(const DelayProcess& p, const char* which) {
  if (!(p.value >= 0.0) || !std::isfinite(p.value)) {
    throw InvalidArgument(fmt::format("{} delay must be finite and >= 0", which));
  }
  if (p.kind == DelayProcess::Kind::Uniform && !(p.redraw_period > 0.0)) {
    throw InvalidArgument(fmt::format("{} delay redraw period must be positive", which));
  }
}

SimTrace simulate(const LoopConfig& cfg, bool smith) {
  validate(cfg);
  const double h = cfg.step;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / h));
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * h;
  const auto ta = realize(cfg.actuator_delay, times);
  const auto ts = realize(cfg.sensor_delay, times);

  auto plant = discrete(cfg.plant, h);
  auto model = discrete(cfg.plant_model(), h);
  auto controller = discrete(cfg.controller, h);
  auto approx = discrete(lti::delay_rational_approx(cfg.model_delay, cfg.plant.unit), h);
  TransportBuffer sensor(h, cfg.sensor_delay.upper());
  TransportBuffer actuator(h, cfg.actuator_delay.upper());
  TransportBuffer model_out(h, cfg.model_delay);

  SimTrace tr;
  for (auto* col : {&tr.t, &tr.r, &tr.error, &tr.u, &tr.actuator_delay, &tr.sensor_delay, &tr.y}) {
    col->reserve(steps + 1);
  }
  for (std::size_t k = 0; k <= steps; ++k) {
    const double y = plant.peek(0.0);  // strictly proper: no feedthrough
    if (!std::isfinite(y) || std::abs(y) > kDivergence) {
      tr.diverged = true;
      break;
    }
    sensor.push(y);
    const double y_sensor = sensor.read(ts[k]);
    const double r = cfg.setpoint.at(times[k]);

    double e = r - y_sensor;
    double y_star = 0.0;
    if (smith) {
      y_star = model.peek(0.0);
      model_out.push(y_star);
      const double y_star_delayed = cfg.internal_delay == InternalDelay::ExactBuffer
                                        ? model_out.read(cfg.model_delay)
                                        : approx.peek(y_star);
      e += y_star_delayed - y_star;
    }
    const double u = controller.step(e);
    actuator.push(u);
    const double u_applied = actuator.read(ta[k]);

    tr.t.push_back(times[k]);
    tr.r.push_back(r);
    tr.error.push_back(e);
    tr.u.push_back(u);
    tr.actuator_delay.push_back(ta[k]);
    tr.sensor_delay.push_back(ts[k]);
    tr.y.push_back(y);

    plant.step(u_applied);
    if (smith) {
      model.step(u);
      approx.step(y_star);
    }
  }
  tr.metrics = compute_metrics(tr, cfg.setpoint, h);
  return tr;
}

}  // namespace

std::vector<double> realize(const DelayProcess& process, std::span<const double> times) {
  check_delay(process, "the");
  std::vector<double> out(times.size(), process.value);
  if (process.kind == DelayProcess::Kind::Constant) return out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto slot = static_cast<std::uint64_t>(std::max(0.0, std::floor(times[i] / process.redraw_period)));
    out[i] = process.value * unit_draw(process.seed, slot);
  }
  return out;
}

Setpoint Setpoint::step(double amplitude, double start) {
  Setpoint s;
  s.kind = Kind::Step;
  s.amplitude = amplitude;
  s.start = start;
  return s;
}

Setpoint Setpoint::square(double amplitude, double period, double low) {
  if (!(period > 0.0)) throw InvalidArgument("square-wave period must be positive");
  Setpoint s;
  s.kind = Kind::Square;
  s.amplitude = amplitude;
  s.period = period;
  s.low = low;
  return s;
}

Setpoint Setpoint::samples(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw InvalidArgument("setpoint samples need equal, non-empty time and value lists");
  }
  if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("setpoint sample times must be sorted");
  Setpoint s;
  s.kind = Kind::Samples;
  s.sample_times = std::move(times);
  s.sample_values = std::move(values);
  return s;
}

double Setpoint::at(double t) const {
  switch (kind) {
    case Kind::Step:
      return t >= start ? amplitude : low;
    case Kind::Square: {
      const double phase = t - period * std::floor(t / period);
      return phase < period / 2.0 ? amplitude : low;
    }
    case Kind::Samples: {
      if (t <= sample_times.front()) return sample_values.front();
      if (t >= sample_times.back()) return sample_values.back();
      const auto it = std::upper_bound(sample_times.begin(), sample_times.end(), t);
      const auto j = static_cast<std::size_t>(it - sample_times.begin());
      const double w = (t - sample_times[j - 1]) / (sample_times[j] - sample_times[j - 1]);
      return (1.0 - w) * sample_values[j - 1] + w * sample_values[j];
    }
  }
  return 0.0;
}

double Setpoint::first_change(double horizon) const {
  if (kind == Kind::Square) return std::min(horizon, period / 2.0);
  return horizon;
}

void validate(const LoopConfig& cfg) {
  const auto unit = cfg.plant.unit;
  for (const auto* tf : {&cfg.plant_model(), &cfg.controller}) {
    if (tf->unit != unit) {
      throw UnitMismatch(fmt::format("loop mixes {} and {}", to_string(unit), to_string(tf->unit)));
    }
  }
  if (!cfg.controller.is_proper()) throw ImproperTransferFunction("controller is improper");
  for (const auto* tf : {&cfg.plant, &cfg.plant_model()}) {
    if (!tf->is_proper() || (!tf->num.is_zero() && tf->num.degree() == tf->den.degree())) {
      throw ImproperTransferFunction("plant and plant model must be strictly proper");
    }
  }
  if (!(cfg.step > 0.0)) throw InvalidArgument("step must be positive");
  if (!(cfg.horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(cfg.model_delay >= 0.0)) throw InvalidArgument("model_delay must be >= 0");
  check_delay(cfg.sensor_delay, "sensor");
  check_delay(cfg.actuator_delay, "actuator");
  for (const auto* d : {&cfg.sensor_delay, &cfg.actuator_delay}) {
    if (d->kind == DelayProcess::Kind::Uniform && cfg.step > d->redraw_period / 10.0) {
      throw InvalidArgument(
          fmt::format("step {} is longer than a tenth of the delay redraw period {}", cfg.step, d->redraw_period));
    }
  }
  double slowest = 0.0;
  for (const auto& p : lti::roots(cfg.plant.den)) {
    if (std::abs(p.real()) > 1e-12) slowest = std::max(slowest, 1.0 / std::abs(p.real()));
  }
  if (cfg.horizon < 10.0 * slowest) {
    throw InvalidArgument(fmt::format("horizon {} is shorter than 10 x the slowest plant time constant {}",
                                      cfg.horizon, slowest));
  }
}

Metrics compute_metrics(const SimTrace& trace, const Setpoint& setpoint, double step) {
  Metrics m;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double e = trace.r[k] - trace.y[k];
    m.ise += e * e * step;
  }
  if (trace.size() == 0) return m;

  const double horizon = trace.t.back() + step;
  const double begin = setpoint.kind == Setpoint::Kind::Step ? setpoint.start : 0.0;
  const double end = setpoint.first_change(horizon);
  std::size_t first = trace.size();
  std::size_t last = 0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.t[k] >= begin && trace.t[k] < end) {
      first = std::min(first, k);
      last = k;
    }
  }
  if (first == trace.size()) return m;

  const double target = setpoint.kind == Setpoint::Kind::Samples ? setpoint.at(end) : setpoint.at(begin);
  const double base = trace.y[first];
  const double span = target - base;
  if (span == 0.0) {
    m.settling_time = 0.0;
    return m;
  }
  double peak = 0.0;
  std::optional<std::size_t> last_outside;
  for (std::size_t k = first; k <= last; ++k) {
    peak = std::max(peak, (trace.y[k] - target) / span);
    if (std::abs(trace.y[k] - target) > kSettleBand * std::abs(span)) last_outside = k;
  }
  m.overshoot_pct = 100.0 * peak;
  if (!last_outside) {
    m.settling_time = 0.0;
  } else if (*last_outside < last) {
    m.settling_time = trace.t[*last_outside + 1] - trace.t[first];
  }
  return m;
}

SimTrace run_uncompensated(const LoopConfig& cfg) { return simulate(cfg, false); }

SimTrace run_smith(const LoopConfig& cfg) { return simulate(cfg, true); }

ComparisonReport compare(std::span<const Run> runs) {
  ComparisonReport report;
  for (const auto& run : runs) {
    if (run.cfg.step != runs.front().cfg.step || run.cfg.horizon != runs.front().cfg.horizon) {
      throw InvalidArgument("compared runs must share step and horizon");
    }
  }
  for (const auto& run : runs) {
    report.entries.push_back({run.label, run.smith, run.smith ? run_smith(run.cfg) : run_uncompensated(run.cfg)});
  }
  return report;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "t,r,error,u,actuator_delay,sensor_delay,y\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << fmt::format("{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", trace.t[k], trace.r[k], trace.error[k],
                       trace.u[k], trace.actuator_delay[k], trace.sensor_delay[k], trace.y[k]);
  }
}

std::string traces_svg(const ComparisonReport& report, const std::string& time_unit) {
  report::Chart chart;
  chart.title = "Loop output";
  chart.x_label = fmt::format("t [{}]", time_unit);
  chart.y_label = "y";
  static const char* palette[] = {"#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  if (!report.entries.empty()) {
    const auto& first = report.entries.front().trace;
    chart.series.push_back({"setpoint", first.t, first.r, "#333333", true});
  }
  // Divergent runs are clipped to a band around the setpoint so the
  // stable curves stay readable.
  double lo = 0.0;
  double hi = 1.0;
  for (const auto& e : report.entries) {
    if (e.trace.diverged) continue;
    for (double v : e.trace.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double pad = 0.5 * (hi - lo);
  std::size_t color = 0;
  for (const auto& e : report.entries) {
    std::vector<double> y = e.trace.y;
    for (auto& v : y) v = std::clamp(v, lo - pad, hi + pad);
    chart.series.push_back({e.label + (e.trace.diverged ? " (diverged)" : ""), e.trace.t, std::move(y),
                            palette[color++ % 5], false});
  }
  return report::render_svg(chart);
}

}  // namespace ncsbound::smith
