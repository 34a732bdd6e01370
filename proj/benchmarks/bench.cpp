#include <benchmark/benchmark.h>

#include "xlmimo/correlation.hpp"
#include "xlmimo/pipeline.hpp"
#include "xlmimo/scenario.hpp"
#include "xlmimo/scheduling.hpp"
#include "xlmimo/special_functions.hpp"

using namespace xlmimo;

namespace {

ScenarioConfig bench_config(int users, int antennas) {
  ScenarioConfig c;
  c.num_users = users;
  c.array.num_antennas = antennas;
  return c;
}

void BM_ComplexErf(benchmark::State& state) {
  const cplx ray = std::polar(1.0, kPi / 4.0);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(complex_erf(ray * x));
    x = x > 40.0 ? 0.0 : x + 0.37;
  }
}
BENCHMARK(BM_ComplexErf);

void BM_CorrelationMatrix(benchmark::State& state) {
  const auto cfg = bench_config(1, static_cast<int>(state.range(0)));
  const LocalScattering ls{0.3, cfg.half_width(), 80.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(build_correlation_matrix(cfg.array, ls));
}
BENCHMARK(BM_CorrelationMatrix)->Arg(64)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_IspSchedule(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Scenario s = build_scenario(cfg, 1);
  const BlockDraws d = draw_block(s, 1);
  SchedulerConfig sc;
  const auto link = LinkBudget::from_snr_db(1.0, 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(isp_schedule(s, d.h0, sc, link));
}
BENCHMARK(BM_IspSchedule)->Args({50, 64})->Args({200, 200})->Unit(benchmark::kMillisecond);

void BM_SusSchedule(benchmark::State& state) {
  const auto cfg = bench_config(50, 64);
  const Scenario s = build_scenario(cfg, 1);
  const BlockDraws d = draw_block(s, 1);
  const auto link = LinkBudget::from_snr_db(1.0, 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(sus_schedule(d.h0, 0.3, link, 64));
}
BENCHMARK(BM_SusSchedule)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
