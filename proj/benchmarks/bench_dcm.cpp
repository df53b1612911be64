#include <benchmark/benchmark.h>

#include <random>

#include "rcdcm/dcm.hpp"
#include "rcdcm/suite.hpp"

using namespace rcdcm;

namespace {

const DriverCharTable& table(bool mos)
{
  static const DriverCharTable th = characterize(make_thevenin("thev400", 400.0), 1.1, 50e-12,
                                                 Direction::rising, default_cap_grid(60e-15),
                                                 200e-12, 0.1e-12);
  static const DriverCharTable mo = characterize(make_mos_like("mos1x"), 1.1, 50e-12,
                                                 Direction::rising, default_cap_grid(60e-15),
                                                 200e-12, 0.1e-12);
  return mos ? mo : th;
}

ReducedAdmittance load()
{
  std::mt19937_64 rng(3);
  return reduce(assemble_mna(make_ladder(2000, 1300.0, 50e-15, rng)), 4);
}

void BM_run_dcm(benchmark::State& st)
{
  const DriverCharTable& t = table(st.range(0) != 0);
  const ReducedAdmittance ya = load();
  DcmConfig cfg;
  cfg.n_steps = static_cast<int>(st.range(1));
  for (auto _ : st)
    benchmark::DoNotOptimize(run_dcm(t, ya, cfg));
}
BENCHMARK(BM_run_dcm)
  ->ArgNames({"mos", "N"})
  ->Args({0, 25})
  ->Args({0, 50})
  ->Args({0, 100})
  ->Args({1, 100})
  ->Unit(benchmark::kMillisecond);

void BM_characterize(benchmark::State& st)
{
  const DriverModel d = st.range(0) ? make_mos_like("mos1x") : make_thevenin("thev400", 400.0);
  const auto grid = default_cap_grid(60e-15);
  for (auto _ : st)
    benchmark::DoNotOptimize(
      characterize(d, 1.1, 50e-12, Direction::rising, grid, 200e-12, 0.1e-12));
}
BENCHMARK(BM_characterize)->ArgName("mos")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
