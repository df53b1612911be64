#include <benchmark/benchmark.h>

#include <random>

#include "rcdcm/mor.hpp"
#include "rcdcm/suite.hpp"

using namespace rcdcm;

namespace {

RcNetwork ladder(int segments)
{
  std::mt19937_64 rng(2);
  return make_ladder(segments, 1200.0, 50e-15, rng);
}

void BM_assemble(benchmark::State& st)
{
  const RcNetwork net = ladder(static_cast<int>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(assemble_mna(net));
}
BENCHMARK(BM_assemble)->Arg(100)->Arg(2000);

void BM_reduce(benchmark::State& st)
{
  const MnaSystem sys = assemble_mna(ladder(static_cast<int>(st.range(0))));
  const int q = static_cast<int>(st.range(1));
  for (auto _ : st)
    benchmark::DoNotOptimize(reduce(sys, q));
}
BENCHMARK(BM_reduce)->Args({100, 4})->Args({2000, 2})->Args({2000, 4})->Args({2000, 6});

void BM_parse_netlist(benchmark::State& st)
{
  const std::string text = serialize_netlist(ladder(2000));
  for (auto _ : st)
    benchmark::DoNotOptimize(parse_netlist(text, "n0"));
  st.SetBytesProcessed(st.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_parse_netlist);

} // namespace

BENCHMARK_MAIN();
