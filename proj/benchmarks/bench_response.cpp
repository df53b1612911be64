#include <benchmark/benchmark.h>

#include <random>

#include "rcdcm/mor.hpp"
#include "rcdcm/response.hpp"
#include "rcdcm/suite.hpp"

using namespace rcdcm;

namespace {

struct Fixture
{
  ReducedAdmittance ya;
  PwlWaveform w;

  explicit Fixture(int segments)
  {
    std::mt19937_64 rng(1);
    ya = reduce(assemble_mna(make_ladder(2000, 1200.0, 50e-15, rng)), 4);
    std::vector<PwlPoint> pts{{0.0, 0.0}};
    for (int k = 1; k <= segments; ++k) {
      const double x = static_cast<double>(k) / segments;
      pts.push_back({100e-12 * x, 1.1 * x * (2.0 - x)});
    }
    w = PwlWaveform(pts);
  }
};

void BM_eval_current(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  double t = 1e-12;
  for (auto _ : st) {
    benchmark::DoNotOptimize(eval_current(f.ya, f.w, t));
    t = t < 150e-12 ? t + 0.7e-12 : 1e-12;
  }
}
BENCHMARK(BM_eval_current)->Arg(10)->Arg(100)->Arg(1000);

void BM_talbot(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  double t = 1e-12;
  for (auto _ : st) {
    benchmark::DoNotOptimize(inverse_laplace_reference(f.ya, f.w, t, 16));
    t = t < 150e-12 ? t + 0.7e-12 : 1e-12;
  }
}
BENCHMARK(BM_talbot)->Arg(10)->Arg(100)->Arg(1000);

// Incremental evaluation as used by the matcher: append a point, probe the end.
void BM_closed_form_append(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    ClosedFormResponse r(f.ya, PwlWaveform({f.w[0], f.w[1]}));
    for (std::size_t k = 2; k < f.w.size(); ++k)
      r.append(f.w[k].t, f.w[k].v);
    benchmark::DoNotOptimize(r.at_end().current);
  }
  st.SetItemsProcessed(st.iterations() * (f.w.size() - 2));
}
BENCHMARK(BM_closed_form_append)->Arg(100)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
