#pragma once

// The four commands behind the ncsbound executable. Each returns its exit
// code and writes CSV (always), SVG (with plot) and JSON (with json) into
// the output directory.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "ncsbound/calculus.hpp"
#include "ncsbound/config.hpp"
#include "ncsbound/smith_sim.hpp"

namespace ncsbound::pipeline {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // configuration, unit or argument error
  kViolated = 2,
  kNonConvergent = 3,
  kNominallyUnstable = 4,
};

struct Options {
  std::optional<std::string> config_path;  // none: the built-in case study
  std::uint64_t seed = 0;
  bool plot = false;
  bool json = false;
  std::optional<std::string> out_dir;  // overrides output.directory
  std::ostream* out = nullptr;         // defaults to std::cout
  std::ostream* err = nullptr;         // defaults to std::cerr
};

/// The case-study configuration shipped in configs/, compiled in.
std::string_view builtin_config();

config::PipelineConfig load(const Options& options);

/// Bound of one stream from a solved analysis, in the loop's time unit.
TimeValue stream_ubd(const calculus::Analysis& analysis, std::string_view stream_id, TimeUnit unit);

/// Loop configuration for one seed. Delay bounds left to the network are
/// taken from `analysis`; throws ConfigError when one is needed but absent.
/// The sensor draws use seed 2 * seed, the actuator draws 2 * seed + 1.
smith::LoopConfig build_loop(const config::PipelineConfig& cfg, std::uint64_t seed,
                             const calculus::Analysis* analysis);

int cmd_delay(const Options& options);

/// `ubd` is a duration ("3.5ms", or a bare number in the loop's unit) or
/// "from-network"; none falls back to the stability section.
int cmd_stability(const Options& options, const std::optional<std::string>& ubd);

enum class SimMode { Smith, Plain, Both };
int cmd_simulate(const Options& options, SimMode mode);

/// Configured model plus `cases` mutations of it (none: validation.cases).
int cmd_validate(const Options& options, std::optional<std::size_t> cases);

}  // namespace ncsbound::pipeline
