#include <benchmark/benchmark.h>

#include "ncsbound/calculus.hpp"
#include "ncsbound/campaign.hpp"
#include "ncsbound/config.hpp"
#include "ncsbound/des_oracle.hpp"
#include "ncsbound/pipeline.hpp"
#include "ncsbound/smith_sim.hpp"
#include "ncsbound/stability.hpp"

using namespace ncsbound;

namespace {

const config::PipelineConfig& case_study() {
  static const auto cfg = config::parse_config(pipeline::builtin_config(), "builtin");
  return cfg;
}

void BM_AnalyzeCaseStudy(benchmark::State& state) {
  const auto& m = *case_study().network;
  for (auto _ : state) benchmark::DoNotOptimize(calculus::analyze(m));
}
BENCHMARK(BM_AnalyzeCaseStudy);

// Random models grow with the seed only loosely, so a fixed batch is timed.
void BM_AnalyzeRandomModels(benchmark::State& state) {
  std::vector<net::NetworkModel> models;
  for (std::uint64_t s = 1; s <= 20; ++s) models.push_back(des::random_model(s));
  for (auto _ : state) {
    for (const auto& m : models) benchmark::DoNotOptimize(calculus::analyze(m));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(models.size()));
}
BENCHMARK(BM_AnalyzeRandomModels)->Unit(benchmark::kMillisecond);

void BM_SimulateGreedy(benchmark::State& state) {
  const auto& m = *case_study().network;
  const double horizon = static_cast<double>(state.range(0)) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(des::simulate(m, des::Workload::greedy(), horizon));
}
BENCHMARK(BM_SimulateGreedy)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_StabilityCheck(benchmark::State& state) {
  const auto& c = *case_study().control;
  const TimeValue ubd{3.5, c.unit};
  for (auto _ : state) benchmark::DoNotOptimize(stability::check(c.plant, c.controller, ubd));
}
BENCHMARK(BM_StabilityCheck);

void BM_MaxTolerableDelay(benchmark::State& state) {
  const auto& c = *case_study().control;
  for (auto _ : state) benchmark::DoNotOptimize(stability::max_tolerable_delay(c.plant, c.controller));
}
BENCHMARK(BM_MaxTolerableDelay)->Unit(benchmark::kMillisecond);

void BM_SmithRun(benchmark::State& state) {
  const auto& cfg = case_study();
  const auto analysis = calculus::analyze(*cfg.network);
  const auto loop = pipeline::build_loop(cfg, 0, &analysis);
  for (auto _ : state) benchmark::DoNotOptimize(smith::run_smith(loop));
}
BENCHMARK(BM_SmithRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
