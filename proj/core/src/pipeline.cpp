#include "ncsbound/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "case_study_config.hpp"
#include "ncsbound/campaign.hpp"
#include "ncsbound/des_oracle.hpp"
#include "ncsbound/error.hpp"
#include "ncsbound/report.hpp"
#include "ncsbound/stability.hpp"

namespace ncsbound::pipeline {

namespace {

using nlohmann::json;

std::ostream& out_of(const Options& o) { return o.out != nullptr ? *o.out : std::cout; }
std::ostream& err_of(const Options& o) { return o.err != nullptr ? *o.err : std::cerr; }

std::string out_dir(const Options& o, const config::PipelineConfig& cfg) {
  return o.out_dir ? *o.out_dir : cfg.output.directory;
}

std::string in_dir(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// JSON has no infinities.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const config::ControlSection& need_control(const config::PipelineConfig& cfg) {
  if (!cfg.control) throw ConfigError("the configuration has no [control] section", "control");
  return *cfg.control;
}

const net::NetworkModel& need_network(const config::PipelineConfig& cfg) {
  if (!cfg.network) throw ConfigError("the configuration has no [network] section", "network");
  return *cfg.network;
}

// Loads the configuration or reports why not; nullopt means exit 1.
std::optional<config::PipelineConfig> try_load(const Options& o) {
  try {
    return load(o);
  } catch (const Error& e) {
    err_of(o) << "config error: " << e.what() << "\n";
    return std::nullopt;
  }
}

smith::DelayProcess delay_process(const config::DelaySpec& spec, double bound, std::uint64_t seed) {
  if (spec.kind == smith::DelayProcess::Kind::Constant) return smith::DelayProcess::constant(bound);
  return smith::DelayProcess::uniform(bound, spec.redraw_period, seed);
}

std::string metrics_row(const std::string& label, const smith::SimTrace& tr) {
  const auto& m = tr.metrics;
  return fmt::format("{},{:.9g},{:.9g},{},{}\n", label, m.ise, m.overshoot_pct,
                     m.settling_time ? fmt::format("{:.9g}", *m.settling_time) : std::string(),
                     tr.diverged ? 1 : 0);
}

}  // namespace

std::string_view builtin_config() { return detail::kCaseStudyToml; }

config::PipelineConfig load(const Options& options) {
  if (options.config_path) return config::load_config(*options.config_path);
  return config::parse_config(builtin_config(), "builtin:case_study.toml");
}

TimeValue stream_ubd(const calculus::Analysis& analysis, std::string_view stream_id, TimeUnit unit) {
  const TimeValue seconds{analysis.stream(stream_id).end_to_end, TimeUnit::Seconds};
  return seconds.in(unit);
}

smith::LoopConfig build_loop(const config::PipelineConfig& cfg, std::uint64_t seed,
                             const calculus::Analysis* analysis) {
  const auto& control = need_control(cfg);
  const auto& sim = cfg.simulation;

  auto bound_for = [&](const config::DelaySpec& spec, const std::string& stream, const char* side) {
    if (spec.bound) return *spec.bound;
    if (analysis == nullptr || stream.empty()) {
      throw ConfigError(fmt::format("the {} delay bound comes from the network, which needs [network] and "
                                    "control.{}_stream",
                                    side, side),
                        fmt::format("simulation.{}_delay", side));
    }
    return stream_ubd(*analysis, stream, control.unit).value;
  };
  const double sensor = bound_for(sim.sensor, control.sensor_stream, "sensor");
  const double actuator = bound_for(sim.actuator, control.actuator_stream, "actuator");

  smith::LoopConfig loop;
  loop.plant = control.plant;
  loop.model = control.model;
  loop.controller = control.controller;
  loop.model_delay = sim.model_delay.value_or(std::max(sensor, actuator));
  loop.internal_delay = sim.internal_delay;
  loop.sensor_delay = delay_process(sim.sensor, sensor, 2 * seed);
  loop.actuator_delay = delay_process(sim.actuator, actuator, 2 * seed + 1);
  loop.setpoint = sim.setpoint;
  loop.step = sim.step;
  loop.horizon = sim.horizon;
  return loop;
}

int cmd_delay(const Options& o) {
  auto& out = out_of(o);
  auto& err = err_of(o);
  const auto cfg = try_load(o);
  if (!cfg) return kFailure;

  calculus::Analysis analysis;
  try {
    analysis = calculus::analyze(need_network(*cfg));
  } catch (const NonConvergent& e) {
    err << "no finite bound: " << e.what() << "\n";
    return kNonConvergent;
  } catch (const UnstableInput& e) {
    err << "no finite bound: " << e.what() << "\n";
    return kNonConvergent;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  const auto& model = *cfg->network;
  const auto dir = out_dir(o, *cfg);

  std::string csv = "stream,source,destination,switches,sigma0,sigma_out,rho,ubd_s,ubd_ms,switch_sum_s\n";
  std::string per_switch =
      "stream,hop,switch,ingress,egress,mux_delay_s,mux_backlog_B,mux_argmin,shared_queue_delay_s,"
      "demux_delay_s,output_queue_delay_s,total_s\n";
  out << fmt::format("{:<10} {:<24} {:>5} {:>12} {:>12}\n", "stream", "path", "hops", "sigma_out[B]", "UBD[ms]");
  for (const auto& d : analysis.streams) {
    const auto& st = model.stream(d.stream_id);
    csv += fmt::format("{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", st.id, st.source, st.destination,
                       st.route.size(), d.sigma0, d.sigma_final, d.rho, d.end_to_end, d.end_to_end * 1e3,
                       d.switch_sum);
    for (const auto& sb : d.switches) {
      per_switch += fmt::format("{},{},{},{},{},{:.9g},{:.9g},{},{:.9g},{:.9g},{:.9g},{:.9g}\n", st.id, sb.hop,
                                sb.switch_id, sb.ingress, sb.egress, sb.mux.delay_bound, sb.mux.backlog_bound,
                                sb.mux.argmin_id, sb.shared_queue_delay, sb.demux_delay, sb.output_queue_delay,
                                sb.total());
    }
    out << fmt::format("{:<10} {:<24} {:>5} {:>12.4f} {:>12.6f}\n", st.id, st.source + "->" + st.destination,
                       st.route.size(), d.sigma_final, d.end_to_end * 1e3);
  }

  json summary;
  summary["solver"] = analysis.solution.method == calculus::SolveMethod::LinearSystem ? "linear-system"
                                                                                       : "value-iteration";
  summary["streams"] = json::array();
  for (const auto& d : analysis.streams) {
    summary["streams"].push_back({{"id", d.stream_id},
                                  {"sigma0", d.sigma0},
                                  {"sigma_out", d.sigma_final},
                                  {"rho", d.rho},
                                  {"ubd_s", d.end_to_end}});
  }

  try {
    report::write_file(in_dir(dir, "delay.csv"), csv);
    report::write_file(in_dir(dir, "delay_switches.csv"), per_switch);
    if (!cfg->output.capacity_sweep.empty()) {
      std::string sweep_csv = "capacity_Bps,capacity_Mbps,stream,ubd_s,error\n";
      summary["capacity_sweep"] = json::array();
      out << "capacity sweep:\n";
      for (const auto& p : calculus::capacity_sweep(model, cfg->output.capacity_sweep)) {
        json entry{{"capacity_Bps", p.capacity}, {"solved", p.solved}};
        if (!p.solved) {
          sweep_csv += fmt::format("{:.9g},{:.9g},,,{}\n", p.capacity, p.capacity * 8e-6, p.error);
          out << fmt::format("  {:>8.3f} Mb/s  no bound: {}\n", p.capacity * 8e-6, p.error);
          entry["error"] = p.error;
        }
        for (const auto& [id, ubd] : p.delays) {
          sweep_csv += fmt::format("{:.9g},{:.9g},{},{:.9g},\n", p.capacity, p.capacity * 8e-6, id, ubd);
          entry["ubd_s"][id] = ubd;
        }
        if (p.solved && !p.delays.empty()) {
          const auto worst = std::max_element(p.delays.begin(), p.delays.end(),
                                              [](const auto& a, const auto& b) { return a.second < b.second; });
          out << fmt::format("  {:>8.3f} Mb/s  max UBD {:.6f} ms ({})\n", p.capacity * 8e-6, worst->second * 1e3,
                             worst->first);
        }
        summary["capacity_sweep"].push_back(entry);
      }
      report::write_file(in_dir(dir, "capacity_sweep.csv"), sweep_csv);
    }
    if (o.json) report::write_file(in_dir(dir, "delay.json"), summary.dump(2) + "\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

int cmd_stability(const Options& o, const std::optional<std::string>& ubd_arg) {
  auto& out = out_of(o);
  auto& err = err_of(o);
  const auto cfg = try_load(o);
  if (!cfg) return kFailure;

  try {
    const auto& control = need_control(*cfg);
    std::optional<TimeValue> ubd = cfg->stability.ubd;
    bool from_network = !ubd;
    if (ubd_arg) {
      from_network = *ubd_arg == "from-network";
      // An explicit value keeps its own unit; a mismatch is an error, not a
      // conversion.
      if (!from_network) ubd = parse_time_value(*ubd_arg, control.unit);
    }
    std::string origin = "given";
    if (from_network) {
      if (control.sensor_stream.empty()) {
        throw ConfigError("UBD from the network needs control.sensor_stream", "control.sensor_stream");
      }
      calculus::Analysis analysis;
      try {
        analysis = calculus::analyze(need_network(*cfg));
      } catch (const NonConvergent& e) {
        err << "no finite network bound: " << e.what() << "\n";
        return kFailure;
      }
      ubd = stream_ubd(analysis, control.sensor_stream, control.unit);
      origin = "network bound of " + control.sensor_stream;
    }

    const auto& grid = cfg->stability.grid;
    stability::Verdict verdict;
    try {
      verdict = stability::check(control.plant, control.controller, *ubd, grid);
    } catch (const NominallyUnstable& e) {
      err << "nominally unstable: " << e.what() << "\n";
      return kNominallyUnstable;
    }
    const auto unit = to_string(control.unit);
    const auto points = stability::sweep(control.plant, control.controller, *ubd, grid);
    const auto tolerable = stability::max_tolerable_delay(control.plant, control.controller, grid);

    out << fmt::format("UBD = {:.6g} {} ({})\n", ubd->value, unit, origin);
    out << fmt::format("criterion {}\n", verdict.holds ? "holds" : "violated");
    for (const auto& b : verdict.violating_bands) {
      out << fmt::format("  violating band [{:.6g}, {:.6g}] rad/{}{}\n", b.low, b.high, unit,
                         b.low_at_grid_edge || b.high_at_grid_edge ? " (reaches the grid edge)" : "");
    }
    out << fmt::format("margin {:.6g} at w = {:.6g} rad/{}\n", verdict.margin, verdict.margin_omega, unit);
    out << fmt::format("peak |w_h T| {:.6g}\n", verdict.robust_peak);
    out << fmt::format("max tolerable delay {:.6g} {}{}\n", tolerable.value, unit,
                       tolerable.grid_limited ? " (limited by the grid)" : "");

    std::ostringstream csv;
    stability::write_sweep_csv(csv, points);
    const auto dir = out_dir(o, *cfg);
    report::write_file(in_dir(dir, "stability_sweep.csv"), csv.str());
    if (o.plot) report::write_file(in_dir(dir, "stability.svg"), stability::bode_svg(points, verdict));
    if (o.json) {
      json j{{"ubd", ubd->value},
             {"time_unit", unit},
             {"ubd_origin", origin},
             {"holds", verdict.holds},
             {"margin", number_or_null(verdict.margin)},
             {"margin_omega", verdict.margin_omega},
             {"robust_peak", verdict.robust_peak},
             {"max_tolerable_delay", number_or_null(tolerable.value)},
             {"max_tolerable_delay_grid_limited", tolerable.grid_limited}};
      j["violating_bands"] = json::array();
      for (const auto& b : verdict.violating_bands) j["violating_bands"].push_back({b.low, b.high});
      report::write_file(in_dir(dir, "stability.json"), j.dump(2) + "\n");
    }
    return verdict.holds ? kOk : kViolated;
  } catch (const NominallyUnstable& e) {
    err << "nominally unstable: " << e.what() << "\n";
    return kNominallyUnstable;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_simulate(const Options& o, SimMode mode) {
  auto& out = out_of(o);
  auto& err = err_of(o);
  const auto cfg = try_load(o);
  if (!cfg) return kFailure;

  try {
    const auto& control = need_control(*cfg);
    std::optional<calculus::Analysis> analysis;
    const bool needs_network = !cfg->simulation.sensor.bound || !cfg->simulation.actuator.bound;
    if (needs_network && cfg->network) analysis = calculus::analyze(*cfg->network);
    const auto loop = build_loop(*cfg, o.seed, analysis ? &*analysis : nullptr);
    smith::validate(loop);

    std::vector<smith::Run> runs;
    if (mode != SimMode::Smith) runs.push_back({"plain", false, loop});
    if (mode != SimMode::Plain) runs.push_back({"smith", true, loop});
    const auto comparison = smith::compare(runs);

    const auto dir = out_dir(o, *cfg);
    std::string metrics = "run,ise,overshoot_pct,settling_time,diverged\n";
    json j{{"seed", o.seed},
           {"time_unit", to_string(control.unit)},
           {"model_delay", loop.model_delay},
           {"sensor_delay_bound", loop.sensor_delay.upper()},
           {"actuator_delay_bound", loop.actuator_delay.upper()}};
    out << fmt::format("delays up to {:.6g} / {:.6g} {} (sensor / actuator), model delay {:.6g}\n",
                       loop.sensor_delay.upper(), loop.actuator_delay.upper(), to_string(control.unit),
                       loop.model_delay);
    for (const auto& e : comparison.entries) {
      std::ostringstream csv;
      smith::write_trace_csv(csv, e.trace);
      report::write_file(in_dir(dir, "trace_" + e.label + ".csv"), csv.str());
      metrics += metrics_row(e.label, e.trace);
      const auto& m = e.trace.metrics;
      out << fmt::format("{:<6} ISE {:.6g}  overshoot {:.3g} %  settling {}{}\n", e.label, m.ise, m.overshoot_pct,
                         m.settling_time ? fmt::format("{:.4g} {}", *m.settling_time, to_string(control.unit))
                                         : std::string("not reached"),
                         e.trace.diverged ? "  DIVERGED" : "");
      j["runs"][e.label] = {{"ise", number_or_null(m.ise)},
                            {"overshoot_pct", number_or_null(m.overshoot_pct)},
                            {"settling_time", m.settling_time ? json(*m.settling_time) : json(nullptr)},
                            {"diverged", e.trace.diverged}};
    }
    if (comparison.entries.size() == 2) {
      const double ratio = comparison.entries[1].trace.metrics.ise / comparison.entries[0].trace.metrics.ise;
      out << fmt::format("ISE ratio smith/plain {:.6g}\n", ratio);
      j["ise_ratio"] = number_or_null(ratio);
    }
    report::write_file(in_dir(dir, "metrics.csv"), metrics);
    if (o.plot) {
      report::write_file(in_dir(dir, "simulate.svg"),
                         smith::traces_svg(comparison, std::string(to_string(control.unit))));
    }
    if (o.json) report::write_file(in_dir(dir, "simulate.json"), j.dump(2) + "\n");
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_validate(const Options& o, std::optional<std::size_t> cases) {
  auto& out = out_of(o);
  auto& err = err_of(o);
  const auto cfg = try_load(o);
  if (!cfg) return kFailure;

  try {
    const auto& model = need_network(*cfg);
    const std::size_t n = cases.value_or(cfg->validation.cases);
    std::vector<des::NamedModel> models{{"configured", model}};
    for (std::size_t i = 0; i < n; ++i) {
      models.emplace_back(fmt::format("mutation-{}", i + 1), des::mutate_model(model, o.seed * 1000003 + i + 1));
    }
    des::CampaignOptions options;
    options.random_models = 0;
    options.workload_seeds = {3 * o.seed + 1, 3 * o.seed + 2, 3 * o.seed + 3};
    options.horizon = cfg->validation.horizon;
    const auto result = des::run_campaign(models, options);

    std::string csv = "model,stream,workload,bound_s,observed_s\n";
    for (const auto& v : result.violations) {
      csv += fmt::format("{},{},{},{:.9g},{:.9g}\n", v.model, v.stream_id, v.workload, v.bound, v.observed);
    }
    const auto dir = out_dir(o, *cfg);
    report::write_file(in_dir(dir, "validate_violations.csv"), csv);
    report::write_file(in_dir(dir, "validate_summary.csv"),
                       fmt::format("models,solved,simulations,frames,violations,max_ratio,max_identity_error\n"
                                   "{},{},{},{},{},{:.9g},{:.3g}\n",
                                   result.models, result.solved, result.simulations, result.frames,
                                   result.violations.size(), result.max_ratio, result.max_identity_error));

    out << fmt::format("models {} (solved {}), simulations {}, frames {}\n", result.models, result.solved,
                       result.simulations, result.frames);
    out << fmt::format("violations {}, worst observed/bound {:.4f}, identity error {:.3g}\n",
                       result.violations.size(), result.max_ratio, result.max_identity_error);
    for (const auto& u : result.unsolved) out << "  unsolved " << u << "\n";
    for (const auto& v : result.violations) {
      out << fmt::format("  VIOLATION {} {} {}: observed {:.9g} s > bound {:.9g} s\n", v.model, v.stream_id,
                         v.workload, v.observed, v.bound);
    }
    if (o.json) {
      json j{{"seed", o.seed},
             {"models", result.models},
             {"solved", result.solved},
             {"simulations", result.simulations},
             {"frames", result.frames},
             {"violations", result.violations.size()},
             {"max_ratio", result.max_ratio},
             {"max_identity_error", result.max_identity_error},
             {"unsolved", result.unsolved}};
      report::write_file(in_dir(dir, "validate.json"), j.dump(2) + "\n");
    }
    return result.violations.empty() ? kOk : kViolated;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace ncsbound::pipeline
