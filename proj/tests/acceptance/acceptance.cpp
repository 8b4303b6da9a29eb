// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   ncsbound_acceptance            every criterion
//   ncsbound_acceptance c2 c5      only those

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "ncsbound/calculus.hpp"
#include "ncsbound/campaign.hpp"
#include "ncsbound/lti.hpp"
#include "ncsbound/pipeline.hpp"
#include "ncsbound/smith_sim.hpp"
#include "ncsbound/stability.hpp"

using namespace ncsbound;

namespace {

// Tolerances and limits, fixed here rather than taken from any config.
constexpr double kUbdLowMs = 2.5;
constexpr double kUbdHighMs = 5.0;
constexpr double kUbdBaselineS = 2.8958281411955965e-3;
constexpr double kBaselineTol = 1e-12;
constexpr double kBandLowMin = 0.1;
constexpr double kBandLowMax = 0.4;
constexpr double kBandHighMin = 4.5;
constexpr double kBandHighMax = 18.0;
constexpr int kHurwitzPolys = 1000;
constexpr double kAxisGap = 1e-6;
constexpr int kSmithSeeds = 10;
constexpr double kMedianRatio = 0.5;
constexpr std::size_t kRandomModels = 100;
constexpr double kCampaignHorizonS = 0.2;
constexpr double kIdentityTol = 1e-9;
constexpr double kWeightTol = 1e-6;
constexpr double kSmithIdentityTol = 1e-9;
constexpr double kStepHalvingTol = 0.01;

constexpr double kRuntime1 = 1.0;
constexpr double kRuntime2 = 1.0;
constexpr double kRuntime3 = 5.0;
constexpr double kRuntime4 = 10.0;
constexpr double kRuntime5 = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The campaign feeds criteria 5 and 6; run it once.
const des::CampaignResult& campaign(double* elapsed = nullptr) {
  static double took = 0.0;
  static const des::CampaignResult result = [] {
    const auto t0 = std::chrono::steady_clock::now();
    des::CampaignOptions opts;
    opts.random_models = kRandomModels;
    opts.workload_seeds = {1, 2, 3};
    opts.horizon = kCampaignHorizonS;
    const std::vector<des::NamedModel> fixed{{"case-study", fixtures::case_study()}};
    auto r = des::run_campaign(fixed, opts);
    took = seconds_since(t0);
    return r;
  }();
  if (elapsed != nullptr) *elapsed = took;
  return result;
}

Outcome c1_case_study_ubd() {
  const auto t0 = std::chrono::steady_clock::now();
  pipeline::Options opts;
  std::ostringstream out;
  std::ostringstream err;
  opts.out = &out;
  opts.err = &err;
  opts.out_dir = (std::filesystem::temp_directory_path() / "ncsbound-acceptance-c1").string();
  const int code = pipeline::cmd_delay(opts);
  const auto cfg = pipeline::load(opts);
  const auto a = calculus::analyze(*cfg.network);
  const double elapsed = seconds_since(t0);
  const double u1 = a.stream("s1").end_to_end;
  const double u2 = a.stream("s2").end_to_end;
  const auto sweep = calculus::capacity_sweep(*cfg.network, cfg.output.capacity_sweep);
  std::string sweep_text;
  for (const auto& p : sweep) {
    sweep_text += fmt::format(" {}Mb/s:{}", p.capacity * 8e-6,
                              p.solved ? fmt::format("{:.4f}ms", p.delays[0].second * 1e3) : std::string("none"));
  }
  const bool pass = code == 0 && u1 == u2 && u1 * 1e3 >= kUbdLowMs && u1 * 1e3 <= kUbdHighMs &&
                    std::abs(u1 - kUbdBaselineS) <= kBaselineTol && sweep.size() == 3 && elapsed < kRuntime1;
  return {pass, fmt::format("UBD_1 = {:.6f} ms, UBD_2 = {:.6f} ms (equal: {}), range [{}, {}] ms, baseline "
                            "{:.6f} ms; sweep{}; {:.3f} s",
                            u1 * 1e3, u2 * 1e3, u1 == u2 ? "yes" : "no", kUbdLowMs, kUbdHighMs,
                            kUbdBaselineS * 1e3, sweep_text, elapsed)};
}

Outcome c2_instability_band() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto v = stability::check(fixtures::plant_ms(), fixtures::controller_ms(), {3.5, TimeUnit::Milliseconds});
  const double elapsed = seconds_since(t0);
  std::string bands;
  for (const auto& b : v.violating_bands) bands += fmt::format(" [{:.4f}, {:.4f}]", b.low, b.high);
  bool pass = v.violating_bands.size() == 1 && elapsed < kRuntime2;
  if (pass) {
    const auto& b = v.violating_bands[0];
    pass = b.low >= kBandLowMin && b.low <= kBandLowMax && b.high >= kBandHighMin && b.high <= kBandHighMax;
  }
  // For reference only: the delay at which the upper edge would first reach
  // the accepted range.
  const auto wide = stability::check(fixtures::plant_ms(), fixtures::controller_ms(), {7.0, TimeUnit::Milliseconds});
  std::string wide_text;
  for (const auto& b : wide.violating_bands) wide_text += fmt::format(" [{:.4f}, {:.4f}]", b.low, b.high);
  return {pass, fmt::format("{} band(s){} rad/ms, need one with low in [{}, {}] and high in [{}, {}]; "
                            "(info: UBD 7 ms gives{}) {:.3f} s",
                            v.violating_bands.size(), bands, kBandLowMin, kBandLowMax, kBandHighMin, kBandHighMax,
                            wide_text, elapsed)};
}

Outcome c3_hurwitz() {
  const auto t0 = std::chrono::steady_clock::now();
  const bool nominal = lti::is_hurwitz({1.0, 2.0, 5.2, 1.0});
  const auto den = lti::complementary_sensitivity(fixtures::plant_ms(), fixtures::controller_ms()).den;
  std::mt19937_64 rng(3);
  int disagreements = 0;
  int stable = 0;
  for (int i = 0; i < kHurwitzPolys; ++i) {
    const auto rs = fixtures::random_roots(rng, kAxisGap);
    const auto p = rs.scale * fixtures::from_roots(rs.roots);
    const bool oracle = fixtures::eigen_hurwitz(p);
    disagreements += lti::is_hurwitz(p) != oracle;
    stable += oracle;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = nominal && den == lti::Polynomial{1.0, 2.0, 5.2, 1.0} && disagreements == 0 && elapsed < kRuntime3;
  return {pass, fmt::format("s^3 + 5.2 s^2 + 2 s + 1 Hurwitz: {}; {} disagreements over {} polynomials ({} stable); "
                            "{:.3f} s",
                            nominal ? "yes" : "no", disagreements, kHurwitzPolys, stable, elapsed)};
}

Outcome c4_compensation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = pipeline::load({});
  std::vector<double> ratios;
  int wins = 0;
  for (int seed = 0; seed < kSmithSeeds; ++seed) {
    auto loop = pipeline::build_loop(cfg, static_cast<std::uint64_t>(seed), nullptr);
    const double smith_ise = smith::run_smith(loop).metrics.ise;
    const double plain_ise = smith::run_uncompensated(loop).metrics.ise;
    wins += smith_ise < plain_ise;
    ratios.push_back(smith_ise / plain_ise);
  }
  const double elapsed = seconds_since(t0);
  std::sort(ratios.begin(), ratios.end());
  const double median = 0.5 * (ratios[kSmithSeeds / 2 - 1] + ratios[kSmithSeeds / 2]);
  const bool pass = wins == kSmithSeeds && median < kMedianRatio && elapsed < kRuntime4;
  return {pass, fmt::format("smith better in {}/{} seeds, median ISE ratio {:.3g} (< {}); {:.3f} s", wins,
                            kSmithSeeds, median, kMedianRatio, elapsed)};
}

Outcome c5_soundness() {
  double elapsed = 0.0;
  const auto& r = campaign(&elapsed);
  const bool pass = r.violations.empty() && r.unsolved.empty() && r.models == kRandomModels + 1 && elapsed < kRuntime5;
  return {pass, fmt::format("{} models ({} solved), {} simulations, {} frames, {} violations, worst "
                            "observed/bound {:.4f}; {:.2f} s",
                            r.models, r.solved, r.simulations, r.frames, r.violations.size(), r.max_ratio, elapsed)};
}

Outcome c6_identity() {
  const auto& r = campaign();
  const bool pass = r.solved == r.models && r.max_identity_error <= kIdentityTol;
  return {pass, fmt::format("max relative gap between end-to-end and per-switch sum {:.3g} over {} models (<= {})",
                            r.max_identity_error, r.solved, kIdentityTol)};
}

Outcome c7_robust_weight() {
  const auto w = lti::robust_weight(3.5, TimeUnit::Milliseconds);
  const double far = std::abs(lti::evaluate(w, 1e9));
  const auto zero = lti::evaluate(w, 0.0);
  const bool pass = std::abs(far - 3.465) <= kWeightTol && zero == std::complex<double>(0.0, 0.0);
  return {pass, fmt::format("|w_h(j 1e9)| = {:.9f} (3.465 +- {}), w_h(0) = {} + {}j", far, kWeightTol, zero.real(),
                            zero.imag())};
}

Outcome c8_smith_identity() {
  smith::LoopConfig cfg;
  cfg.plant = fixtures::plant_ms();
  cfg.controller = fixtures::controller_ms();
  cfg.setpoint = smith::Setpoint::square(1.0, 100.0);
  const auto a = smith::run_smith(cfg);
  const auto b = smith::run_uncompensated(cfg);
  double diff = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) diff = std::max(diff, std::abs(a.y[k] - b.y[k]));

  // Reference scenario: the case-study loop with seed 0.
  auto loop = pipeline::build_loop(pipeline::load({}), 0, nullptr);
  const double coarse = smith::run_smith(loop).metrics.ise;
  loop.step /= 2;
  const double fine = smith::run_smith(loop).metrics.ise;
  const double change = std::abs(fine - coarse) / coarse;
  const bool pass = diff < kSmithIdentityTol && change < kStepHalvingTol;
  return {pass, fmt::format("max |y_smith - y_plain| = {:.3g} (< {}); ISE {:.6f} -> {:.6f} on halving the step, "
                            "change {:.3f} % (< {} %)",
                            diff, kSmithIdentityTol, coarse, fine, change * 100, kStepHalvingTol * 100)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"c1", c1_case_study_ubd}, {"c2", c2_instability_band}, {"c3", c3_hurwitz},       {"c4", c4_compensation},
      {"c5", c5_soundness},      {"c6", c6_identity},         {"c7", c7_robust_weight}, {"c8", c8_smith_identity},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; })) {
      std::fprintf(stderr, "unknown criterion %s (expected c1..c8)\n", w.c_str());
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!wanted.empty() && wanted.count(name) == 0) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
