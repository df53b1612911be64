#include "rcdcm/suite.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include <json.hpp>

namespace rcdcm {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double best_of(int repeats, F&& f)
{
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(repeats, 1); ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

} // namespace

RuntimeReport runtime_benchmark(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg,
                                TableCache& cache, int repeats)
{
  RuntimeReport rep;
  for (const auto& b : suite) {
    const auto table = cache.get(b.driver, cfg.vdd, b.slew, b.direction, table_cmax(b.c_total, cfg.table_headroom),
                                 cfg.table_window, cfg.table_dt);
    // One untimed run fixes the oracle window so every repeat does the
    // same work.
    const double window = simulate_benchmark(b, cfg).result.t.back();
    const PwlWaveform input = b.driver.input_ramp(cfg.vdd, b.slew, b.direction);

    RuntimeRow row;
    row.name = b.name;
    row.dcm_s = best_of(repeats, [&] { dcm_for_net(b.net, *table, cfg, b.name); });
    row.oracle_s = best_of(repeats, [&] {
      const MnaSystem sys = assemble_mna(b.net);
      simulate_driver(sys, b.driver, cfg.vdd, input, cfg.oracle_dt, window);
    });
    row.speedup = row.oracle_s / row.dcm_s;
    rep.rows.push_back(row);
  }
  return rep;
}

std::string RuntimeReport::to_json() const
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"name", r.name}, {"dcm_s", r.dcm_s}, {"oracle_s", r.oracle_s},
                 {"speedup", r.speedup}});
  return j.dump(2);
}

double batch_throughput(const std::vector<RcNetwork>& nets, const DriverCharTable& table,
                        const ComparisonConfig& cfg)
{
  if (nets.empty())
    throw DomainError("empty batch");
  const auto t0 = Clock::now();
  for (const auto& n : nets)
    dcm_for_net(n, table, cfg);
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  return static_cast<double>(nets.size()) / s;
}

} // namespace rcdcm
