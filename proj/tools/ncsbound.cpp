// ncsbound: delay bounds, the delay stability test, Smith-predictor
// simulation and simulator validation for one switched-Ethernet control loop.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncsbound/pipeline.hpp"

namespace pl = ncsbound::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Delay bounds and delay-robustness checks for networked control loops"};
  app.require_subcommand(1);
  // Global flags are accepted after the subcommand too.
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  pl::Options opts;
  app.add_option("--config", config_path, "TOML configuration (default: the built-in case study)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opts.seed, "seed for every random draw");
  app.add_flag("--plot", opts.plot, "also write SVG figures");
  app.add_flag("--json", opts.json, "also write a JSON summary");
  app.add_option("--out", out_dir, "output directory (NCSBOUND_OUT takes precedence)");

  auto* delay = app.add_subcommand("delay", "end-to-end delay bound per stream");

  auto* stab = app.add_subcommand("stability", "frequency-domain delay stability test");
  std::string ubd;
  stab->add_option("--ubd", ubd, "delay bound such as 3.5ms, or from-network");

  auto* sim = app.add_subcommand("simulate", "closed-loop simulation with random delays");
  std::string mode = "both";
  sim->add_option("--mode", mode, "smith, plain or both")
      ->check(CLI::IsMember({"smith", "plain", "both"}));

  auto* val = app.add_subcommand("validate", "compare bounds against the event simulator");
  std::size_t cases = 0;
  auto* cases_opt = val->add_option("--cases", cases, "number of mutated models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pl::kFailure;
  }

  if (!config_path.empty()) opts.config_path = config_path;
  if (const char* env = std::getenv("NCSBOUND_OUT"); env != nullptr && *env != '\0') {
    opts.out_dir = env;
  } else if (!out_dir.empty()) {
    opts.out_dir = out_dir;
  }

  if (delay->parsed()) return pl::cmd_delay(opts);
  if (stab->parsed()) return pl::cmd_stability(opts, ubd.empty() ? std::nullopt : std::optional(ubd));
  if (sim->parsed()) {
    const auto m = mode == "smith" ? pl::SimMode::Smith : mode == "plain" ? pl::SimMode::Plain : pl::SimMode::Both;
    return pl::cmd_simulate(opts, m);
  }
  if (val->parsed()) {
    return pl::cmd_validate(opts, cases_opt->count() > 0 ? std::optional(cases) : std::nullopt);
  }
  return pl::kFailure;
}
