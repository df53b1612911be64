#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "rcdcm/dcm.hpp"
#include "rcdcm/driver_model.hpp"
#include "rcdcm/metrics.hpp"
#include "rcdcm/mor.hpp"
#include "rcdcm/netlist.hpp"
#include "rcdcm/oracle.hpp"

namespace rcdcm {

enum class Topology { ladder, tree, bus, wordline };
std::string to_string(Topology t);

// Uniform draw on [lo, hi) from the top 53 bits; keeps suites identical
// across standard libraries, which the std distributions do not.
double uniform(std::mt19937_64& rng, double lo, double hi);

// Element values are perturbed by +-spread around the nominal split.
RcNetwork make_ladder(int segments, double r_total, double c_total, std::mt19937_64& rng,
                      double spread = 0.2);
// Balanced tree with `depth` levels of segments; level l holds fanout^l.
RcNetwork make_tree(int fanout, int depth, double r_seg, double c_seg, std::mt19937_64& rng,
                    double spread = 0.2);
// Trunk into `branches` branches, each ending in a receiver capacitor.
RcNetwork make_bus(int trunk_segments, int branches, int branch_segments, double r_seg,
                   double c_seg, double c_receiver, std::mt19937_64& rng, double spread = 0.2);
// Chain of cells, each with a short stub to a small gate load.
RcNetwork make_wordline(int cells, double r_seg, double c_seg, double r_stub, double c_gate,
                        std::mt19937_64& rng, double spread = 0.2);

// Largest shortest-path resistance from the port to any node.
double max_path_resistance(const RcNetwork& net);

struct Benchmark
{
  std::string name;
  Topology topology = Topology::ladder;
  RcNetwork net;
  DriverModel driver;
  double slew = 0.0;
  Direction direction = Direction::rising;
  std::size_t element_count = 0;
  double c_total = 0.0;
  double r_wire = 0.0;

  // Wire resistance at least half the driver's output resistance.
  bool shielding_dominant(double vdd) const;
};

struct SuiteOptions
{
  std::uint64_t seed = 2024;
  std::vector<int> ladder_sizes{10, 100, 500, 2000};
  bool trees = true;
  bool bus = true;
  bool wordline = true;
  std::vector<double> slews{10e-12, 50e-12, 150e-12};
  std::vector<DriverModel> drivers; // empty: the two default models
  // Per-net totals are drawn uniformly from these ranges.
  double r_total_min = 1000.0, r_total_max = 1500.0;
  double c_total_min = 40e-15, c_total_max = 60e-15;
  Direction direction = Direction::rising;
};

std::vector<DriverModel> default_drivers();
std::vector<Benchmark> generate_suite(const SuiteOptions& opts = {});

struct ComparisonConfig
{
  DcmConfig dcm;
  int q = 4;
  ReductionMethod method = ReductionMethod::congruence;
  double vdd = 1.1;
  double oracle_dt = 0.1e-12;
  double table_dt = 0.1e-12;
  double table_window = 200e-12;
  double table_headroom = 1.0; // table C_max as a multiple of C_total
  int jobs = 1;
};

// Characterized tables keyed by (driver, slew, direction, C_max).
class TableCache
{
public:
  std::shared_ptr<const DriverCharTable> get(const DriverModel& model, double vdd, double slew,
                                             Direction dir, double c_max, double window,
                                             double dt);
  std::size_t size() const;

private:
  using Key = std::tuple<std::string, double, int, double>;
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const DriverCharTable>> tables_;
};

struct BenchmarkResult
{
  std::string name;
  std::string topology;
  std::string driver;
  double slew = 0.0;
  bool shielding = false;
  double c_total = 0.0;
  double window = 0.0;
  CurrentMetrics oracle, dcm, baseline;
  MetricErrors dcm_error, baseline_error;
  double dcm_runtime_s = 0.0; // reduce + match + stitch
  double oracle_runtime_s = 0.0;
  double residual_max = 0.0;
  double c_eff_first = 0.0;
  double c_eff_last = 0.0;
};

struct ErrorReport
{
  std::vector<BenchmarkResult> rows;
  MetricErrors dcm_mean, dcm_max, baseline_mean, baseline_max;
  double dcm_runtime_total_s = 0.0;
  double oracle_runtime_total_s = 0.0;

  void summarize(); // recomputes the aggregate fields from rows
  std::string to_json() const;
  void print_table(std::ostream& os) const;
};

// Oracle metrics window: time at which the oracle port voltage completes
// 99% of its swing.
double metrics_window(const TransientResult& oracle, double vdd, Direction dir);

struct OracleRun
{
  TransientResult result;
  double window = 0.0; // metrics window
  double runtime_s = 0.0;
};
// Driver transient of the benchmark, extended until the port completes
// 99% of its swing.
OracleRun simulate_benchmark(const Benchmark& b, const ComparisonConfig& cfg);

// DCM path for one net: assemble, reduce and run_dcm against `table`.
DcmTrace dcm_for_net(const RcNetwork& net, const DriverCharTable& table,
                     const ComparisonConfig& cfg, const std::string& net_id = {});

// Table C_max for a net: the sum of its capacitances, times headroom.
double table_cmax(double c_total, double headroom = 1.0);

BenchmarkResult run_benchmark(const Benchmark& b, const ComparisonConfig& cfg, TableCache& cache);
ErrorReport run_comparison(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg);
ErrorReport run_comparison(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg,
                           TableCache& cache);

struct NSweepRow
{
  int n_steps = 0;
  double mean_rms_error = 0.0;
  double mean_avg_error = 0.0;
  double mean_peak_error = 0.0;
  double dcm_runtime_s = 0.0;
};
std::vector<NSweepRow> run_n_sweep(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg,
                                   const std::vector<int>& n_values, TableCache& cache);

struct RuntimeRow
{
  std::string name;
  double dcm_s = 0.0;    // assemble + reduce + match + stitch
  double oracle_s = 0.0; // simulate_driver
  double speedup = 0.0;
};
struct RuntimeReport
{
  std::vector<RuntimeRow> rows;
  std::string to_json() const;
};
// Times each benchmark's DCM path against the oracle transient; tables are
// characterized beforehand and excluded. Each timing is the best of
// `repeats` runs.
RuntimeReport runtime_benchmark(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg,
                                TableCache& cache, int repeats = 3);

// Nets per second through assemble, reduce and DCM for a batch of nets
// sharing one table.
double batch_throughput(const std::vector<RcNetwork>& nets, const DriverCharTable& table,
                        const ComparisonConfig& cfg);

} // namespace rcdcm
