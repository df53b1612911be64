#include <benchmark/benchmark.h>

#include <random>

#include "rcdcm/oracle.hpp"
#include "rcdcm/suite.hpp"

using namespace rcdcm;

namespace {

MnaSystem ladder(int segments)
{
  std::mt19937_64 rng(4);
  return assemble_mna(make_ladder(segments, 1300.0, 50e-15, rng));
}

void BM_simulate_pwl(benchmark::State& st)
{
  const MnaSystem sys = ladder(static_cast<int>(st.range(0)));
  const PwlWaveform src({{0.0, 0.0}, {60e-12, 1.1}});
  for (auto _ : st)
    benchmark::DoNotOptimize(simulate_pwl(sys, src, 0.1e-12, 300e-12));
}
BENCHMARK(BM_simulate_pwl)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_simulate_driver(benchmark::State& st)
{
  const MnaSystem sys = ladder(static_cast<int>(st.range(0)));
  const DriverModel d = st.range(1) ? make_mos_like("mos1x") : make_thevenin("thev400", 400.0);
  const PwlWaveform in = d.input_ramp(1.1, 50e-12, Direction::rising);
  for (auto _ : st)
    benchmark::DoNotOptimize(simulate_driver(sys, d, 1.1, in, 0.1e-12, 300e-12));
}
BENCHMARK(BM_simulate_driver)
  ->ArgNames({"segments", "mos"})
  ->Args({2000, 0})
  ->Args({2000, 1})
  ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
