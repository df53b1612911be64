#include "rcdcm/suite.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <queue>
#include <thread>
#include <unordered_set>

#include <json.hpp>

namespace rcdcm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class NetBuilder
{
public:
  explicit NetBuilder(std::string port) { net_.port = std::move(port); }

  void r(const std::string& a, const std::string& b, double v) { add(ElementKind::resistor, 'R', a, b, v); }
  void c(const std::string& a, double v) { add(ElementKind::capacitor, 'C', a, "0", v); }

  RcNetwork take() { return std::move(net_); }

private:
  void add(ElementKind k, char prefix, const std::string& a, const std::string& b, double v)
  {
    const int n = k == ElementKind::resistor ? ++nr_ : ++nc_;
    net_.elements.push_back({prefix + std::to_string(n), k, a, b, v});
    for (const auto* node : {&a, &b})
      if (*node != ground_node && seen_.insert(*node).second)
        net_.nodes.push_back(*node);
  }

  RcNetwork net_;
  std::unordered_set<std::string> seen_;
  int nr_ = 0, nc_ = 0;
};

double jitter(std::mt19937_64& rng, double nominal, double spread)
{
  return nominal * uniform(rng, 1.0 - spread, 1.0 + spread);
}

template <class F>
void parallel_for(std::size_t n, int jobs, F&& body)
{
  if (jobs <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k)
      body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < n;) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lk(fail_mu);
          if (!failure)
            failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

std::shared_ptr<const DriverCharTable> table_for(const Benchmark& b, const ComparisonConfig& cfg,
                                                 TableCache& cache)
{
  return cache.get(b.driver, cfg.vdd, b.slew, b.direction, table_cmax(b.c_total, cfg.table_headroom),
                   cfg.table_window, cfg.table_dt);
}

CurrentMetrics oracle_metrics(const OracleRun& run)
{
  return compute_metrics(run.result.t, run.result.i_port, run.window);
}

} // namespace

std::string to_string(Topology t)
{
  switch (t) {
  case Topology::ladder: return "ladder";
  case Topology::tree: return "tree";
  case Topology::bus: return "bus";
  case Topology::wordline: return "wordline";
  }
  return "?";
}

double uniform(std::mt19937_64& rng, double lo, double hi)
{
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

RcNetwork make_ladder(int segments, double r_total, double c_total, std::mt19937_64& rng,
                      double spread)
{
  if (segments < 1)
    throw DomainError("ladder needs at least one segment");
  NetBuilder nb("n0");
  const double r = r_total / segments, c = c_total / segments;
  for (int k = 1; k <= segments; ++k) {
    const std::string a = "n" + std::to_string(k - 1), b = "n" + std::to_string(k);
    nb.r(a, b, jitter(rng, r, spread));
    nb.c(b, jitter(rng, c, spread));
  }
  return nb.take();
}

RcNetwork make_tree(int fanout, int depth, double r_seg, double c_seg, std::mt19937_64& rng,
                    double spread)
{
  if (fanout < 1 || depth < 1)
    throw DomainError("tree needs fanout >= 1 and depth >= 1");
  NetBuilder nb("root");
  int counter = 0;
  std::vector<std::string> level{"root"};
  for (int l = 0; l < depth; ++l) {
    std::vector<std::string> next;
    const int width = l == 0 ? 1 : fanout;
    for (const auto& parent : level)
      for (int k = 0; k < width; ++k) {
        const std::string child = "t" + std::to_string(++counter);
        nb.r(parent, child, jitter(rng, r_seg, spread));
        nb.c(child, jitter(rng, c_seg, spread));
        next.push_back(child);
      }
    level = std::move(next);
  }
  return nb.take();
}

RcNetwork make_bus(int trunk_segments, int branches, int branch_segments, double r_seg,
                   double c_seg, double c_receiver, std::mt19937_64& rng, double spread)
{
  if (trunk_segments < 1 || branches < 1 || branch_segments < 1)
    throw DomainError("bus needs positive segment and branch counts");
  NetBuilder nb("drv");
  std::string prev = "drv";
  for (int k = 1; k <= trunk_segments; ++k) {
    const std::string n = "tr" + std::to_string(k);
    nb.r(prev, n, jitter(rng, r_seg, spread));
    nb.c(n, jitter(rng, c_seg, spread));
    prev = n;
  }
  const std::string hub = prev;
  for (int b = 1; b <= branches; ++b) {
    prev = hub;
    for (int k = 1; k <= branch_segments; ++k) {
      const std::string n = "b" + std::to_string(b) + "_" + std::to_string(k);
      nb.r(prev, n, jitter(rng, r_seg, spread));
      nb.c(n, jitter(rng, c_seg, spread));
      prev = n;
    }
    nb.c(prev, jitter(rng, c_receiver, spread));
  }
  return nb.take();
}

RcNetwork make_wordline(int cells, double r_seg, double c_seg, double r_stub, double c_gate,
                        std::mt19937_64& rng, double spread)
{
  if (cells < 1)
    throw DomainError("wordline needs at least one cell");
  NetBuilder nb("wl0");
  for (int k = 1; k <= cells; ++k) {
    const std::string n = "wl" + std::to_string(k), g = "g" + std::to_string(k);
    nb.r("wl" + std::to_string(k - 1), n, jitter(rng, r_seg, spread));
    nb.c(n, jitter(rng, c_seg, spread));
    nb.r(n, g, jitter(rng, r_stub, spread));
    nb.c(g, jitter(rng, c_gate, spread));
  }
  return nb.take();
}

double max_path_resistance(const RcNetwork& net)
{
  std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> adj;
  for (const auto& e : net.elements)
    if (e.kind == ElementKind::resistor && e.node_a != ground_node && e.node_b != ground_node) {
      adj[e.node_a].emplace_back(e.node_b, e.value);
      adj[e.node_b].emplace_back(e.node_a, e.value);
    }
  std::unordered_map<std::string, double> dist{{net.port, 0.0}};
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(0.0, net.port);
  while (!pq.empty()) {
    auto [d, n] = pq.top();
    pq.pop();
    if (d > dist[n])
      continue;
    for (const auto& [m, r] : adj[n]) {
      auto it = dist.find(m);
      if (it == dist.end() || d + r < it->second) {
        dist[m] = d + r;
        pq.emplace(d + r, m);
      }
    }
  }
  double worst = 0.0;
  for (const auto& [n, d] : dist)
    worst = std::max(worst, d);
  return worst;
}

bool Benchmark::shielding_dominant(double vdd) const
{
  return r_wire >= 0.5 * driver.effective_resistance(vdd);
}

std::vector<DriverModel> default_drivers()
{
  return {make_thevenin("thev400", 400.0), make_mos_like("mos1x")};
}

std::vector<Benchmark> generate_suite(const SuiteOptions& opts)
{
  std::mt19937_64 rng(opts.seed);
  struct Net
  {
    std::string name;
    Topology topo;
    RcNetwork net;
  };
  std::vector<Net> nets;
  auto target_c = [&] { return uniform(rng, opts.c_total_min, opts.c_total_max); };
  auto target_r = [&] { return uniform(rng, opts.r_total_min, opts.r_total_max); };

  for (int n : opts.ladder_sizes) {
    const double r = target_r(), c = target_c();
    nets.push_back({"ladder" + std::to_string(n), Topology::ladder, make_ladder(n, r, c, rng)});
  }
  if (opts.trees) {
    for (auto [f, d] : {std::pair{2, 5}, std::pair{3, 4}, std::pair{4, 4}}) {
      int segs = 0;
      for (int l = 0, w = 1; l < d; ++l, w *= f)
        segs += w;
      const double r = target_r(), c = target_c();
      nets.push_back({"tree_f" + std::to_string(f) + "d" + std::to_string(d), Topology::tree,
                      make_tree(f, d, r / d, c / segs, rng)});
    }
  }
  if (opts.bus) {
    // 10-segment trunk into 4 branches of 10, 2 fF per receiver
    const double r = target_r(), c = target_c() - 8e-15;
    nets.push_back({"bus4", Topology::bus, make_bus(10, 4, 10, r / 20, c / 50, 2e-15, rng)});
  }
  if (opts.wordline) {
    const double r = target_r(), c = target_c();
    const int cells = 64;
    nets.push_back({"wordline64", Topology::wordline,
                    make_wordline(cells, r / cells, 0.6 * c / cells, 50.0, 0.4 * c / cells, rng)});
  }

  const auto drivers = opts.drivers.empty() ? default_drivers() : opts.drivers;
  std::vector<Benchmark> out;
  for (const auto& n : nets) {
    const double rw = max_path_resistance(n.net);
    for (const auto& d : drivers)
      for (double s : opts.slews) {
        Benchmark b;
        char tag[32];
        std::snprintf(tag, sizeof tag, "%gps", s * 1e12);
        b.name = n.name + "/" + d.id + "/" + tag;
        b.topology = n.topo;
        b.net = n.net;
        b.driver = d;
        b.slew = s;
        b.direction = opts.direction;
        b.element_count = n.net.elements.size();
        b.c_total = n.net.total_capacitance();
        b.r_wire = rw;
        out.push_back(std::move(b));
      }
  }
  return out;
}

std::shared_ptr<const DriverCharTable> TableCache::get(const DriverModel& model, double vdd,
                                                       double slew, Direction dir, double c_max,
                                                       double window, double dt)
{
  Key key{model.id + "@" + std::to_string(vdd), slew, static_cast<int>(dir), c_max};
  {
    std::lock_guard lk(mu_);
    if (auto it = tables_.find(key); it != tables_.end())
      return it->second;
  }
  // Characterization runs unlocked; a duplicate race only wastes work.
  const auto grid = default_cap_grid(c_max);
  auto table = std::make_shared<const DriverCharTable>(
      characterize(model, vdd, slew, dir, grid, window, dt));
  std::lock_guard lk(mu_);
  return tables_.try_emplace(key, std::move(table)).first->second;
}

std::size_t TableCache::size() const
{
  std::lock_guard lk(mu_);
  return tables_.size();
}

double table_cmax(double c_total, double headroom)
{
  return headroom * c_total;
}

double metrics_window(const TransientResult& oracle, double vdd, Direction dir)
{
  const double target = dir == Direction::rising ? 0.99 * vdd : 0.01 * vdd;
  auto past = [&](double v) { return dir == Direction::rising ? v >= target : v <= target; };
  const auto& v = oracle.v_port;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (past(v[k])) {
      if (past(v[k - 1]))
        continue; // starts past the level only for degenerate inputs
      const double f = (target - v[k - 1]) / (v[k] - v[k - 1]);
      return oracle.t[k - 1] + f * (oracle.t[k] - oracle.t[k - 1]);
    }
  throw DomainError("oracle port never completes 99% of the swing");
}

OracleRun simulate_benchmark(const Benchmark& b, const ComparisonConfig& cfg)
{
  const auto t0 = Clock::now();
  const MnaSystem sys = assemble_mna(b.net);
  const PwlWaveform input = b.driver.input_ramp(cfg.vdd, b.slew, b.direction);
  const double tau = (b.driver.effective_resistance(cfg.vdd) + b.r_wire) * b.c_total;
  double window = b.slew / 0.8 + 6.0 * tau;
  for (int attempt = 0; attempt < 6; ++attempt, window *= 2.0) {
    OracleRun run;
    run.result = simulate_driver(sys, b.driver, cfg.vdd, input, cfg.oracle_dt, window);
    try {
      run.window = metrics_window(run.result, cfg.vdd, b.direction);
    } catch (const DomainError&) {
      continue;
    }
    run.runtime_s = seconds_since(t0);
    return run;
  }
  throw NumericalError("oracle transient for " + b.name + " did not settle");
}

DcmTrace dcm_for_net(const RcNetwork& net, const DriverCharTable& table,
                     const ComparisonConfig& cfg, const std::string& net_id)
{
  const MnaSystem sys = assemble_mna(net);
  const ReducedAdmittance ya = reduce(sys, cfg.q, cfg.method, net_id);
  return run_dcm(table, ya, cfg.dcm);
}

BenchmarkResult run_benchmark(const Benchmark& b, const ComparisonConfig& cfg, TableCache& cache)
{
  const auto table = table_for(b, cfg, cache);
  const OracleRun orun = simulate_benchmark(b, cfg);

  BenchmarkResult r;
  r.name = b.name;
  r.topology = to_string(b.topology);
  r.driver = b.driver.id;
  r.slew = b.slew;
  r.shielding = b.shielding_dominant(cfg.vdd);
  r.c_total = b.c_total;
  r.window = orun.window;
  r.oracle_runtime_s = orun.runtime_s;
  r.oracle = oracle_metrics(orun);

  const auto t0 = Clock::now();
  const DcmTrace trace = dcm_for_net(b.net, *table, cfg, b.name);
  r.dcm_runtime_s = seconds_since(t0);
  r.dcm = compute_metrics(trace, orun.window);
  r.residual_max = trace.residual_max;
  r.c_eff_first = trace.c_eff_first;
  r.c_eff_last = trace.c_eff_last;

  const BaselineWaveform base = baseline_ctotal(*table, b.c_total);
  r.baseline = compute_metrics(base.t, base.i, orun.window);

  r.dcm_error = relative_errors(r.dcm, r.oracle);
  r.baseline_error = relative_errors(r.baseline, r.oracle);
  return r;
}

ErrorReport run_comparison(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg,
                           TableCache& cache)
{
  ErrorReport rep;
  rep.rows.resize(suite.size());
  parallel_for(suite.size(), cfg.jobs,
               [&](std::size_t k) { rep.rows[k] = run_benchmark(suite[k], cfg, cache); });
  rep.summarize();
  return rep;
}

ErrorReport run_comparison(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg)
{
  TableCache cache;
  return run_comparison(suite, cfg, cache);
}

void ErrorReport::summarize()
{
  dcm_mean = dcm_max = baseline_mean = baseline_max = {};
  dcm_runtime_total_s = oracle_runtime_total_s = 0.0;
  if (rows.empty())
    return;
  auto acc = [](MetricErrors& mean, MetricErrors& mx, const MetricErrors& e) {
    mean.avg += e.avg;
    mean.rms += e.rms;
    mean.peak += e.peak;
    mx.avg = std::max(mx.avg, e.avg);
    mx.rms = std::max(mx.rms, e.rms);
    mx.peak = std::max(mx.peak, e.peak);
  };
  for (const auto& r : rows) {
    acc(dcm_mean, dcm_max, r.dcm_error);
    acc(baseline_mean, baseline_max, r.baseline_error);
    dcm_runtime_total_s += r.dcm_runtime_s;
    oracle_runtime_total_s += r.oracle_runtime_s;
  }
  const double n = static_cast<double>(rows.size());
  for (auto* m : {&dcm_mean, &baseline_mean}) {
    m->avg /= n;
    m->rms /= n;
    m->peak /= n;
  }
}

std::string ErrorReport::to_json() const
{
  using nlohmann::json;
  auto metrics = [](const CurrentMetrics& m) {
    return json{{"avg_A", m.avg}, {"avg_abs_A", m.avg_abs}, {"rms_A", m.rms}, {"peak_A", m.peak}};
  };
  auto errors = [](const MetricErrors& e) {
    return json{{"avg", e.avg}, {"rms", e.rms}, {"peak", e.peak}};
  };
  json j;
  j["benchmarks"] = json::array();
  for (const auto& r : rows)
    j["benchmarks"].push_back({{"name", r.name},
                               {"topology", r.topology},
                               {"driver", r.driver},
                               {"slew_s", r.slew},
                               {"shielding_dominant", r.shielding},
                               {"c_total_F", r.c_total},
                               {"window_s", r.window},
                               {"oracle", metrics(r.oracle)},
                               {"dcm", metrics(r.dcm)},
                               {"baseline", metrics(r.baseline)},
                               {"dcm_error", errors(r.dcm_error)},
                               {"baseline_error", errors(r.baseline_error)},
                               {"dcm_runtime_s", r.dcm_runtime_s},
                               {"oracle_runtime_s", r.oracle_runtime_s},
                               {"residual_max", r.residual_max},
                               {"c_eff_first_F", r.c_eff_first},
                               {"c_eff_last_F", r.c_eff_last}});
  j["summary"] = {{"count", rows.size()},
                  {"dcm_mean", errors(dcm_mean)},
                  {"dcm_max", errors(dcm_max)},
                  {"baseline_mean", errors(baseline_mean)},
                  {"baseline_max", errors(baseline_max)},
                  {"dcm_runtime_total_s", dcm_runtime_total_s},
                  {"oracle_runtime_total_s", oracle_runtime_total_s}};
  return j.dump(2);
}

void ErrorReport::print_table(std::ostream& os) const
{
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %3s %8s | %7s %7s %7s | %7s %7s %7s\n", "benchmark", "sh",
                "Ctot_fF", "dcm_avg", "dcm_rms", "dcm_pk", "cap_avg", "cap_rms", "cap_pk");
  os << buf;
  auto pct = [](double x) { return 100.0 * x; };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %3s %8.2f | %6.2f%% %6.2f%% %6.2f%% | %6.2f%% %6.2f%% %6.2f%%\n",
                  r.name.c_str(), r.shielding ? "y" : "n", r.c_total * 1e15, pct(r.dcm_error.avg),
                  pct(r.dcm_error.rms), pct(r.dcm_error.peak), pct(r.baseline_error.avg),
                  pct(r.baseline_error.rms), pct(r.baseline_error.peak));
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-41s | %6.2f%% %6.2f%% %6.2f%% | %6.2f%% %6.2f%% %6.2f%%\n",
                "mean", pct(dcm_mean.avg), pct(dcm_mean.rms), pct(dcm_mean.peak),
                pct(baseline_mean.avg), pct(baseline_mean.rms), pct(baseline_mean.peak));
  os << buf;
  std::snprintf(buf, sizeof buf, "%-41s | %6.2f%% %6.2f%% %6.2f%% | %6.2f%% %6.2f%% %6.2f%%\n",
                "max", pct(dcm_max.avg), pct(dcm_max.rms), pct(dcm_max.peak),
                pct(baseline_max.avg), pct(baseline_max.rms), pct(baseline_max.peak));
  os << buf;
}

std::vector<NSweepRow> run_n_sweep(const std::vector<Benchmark>& suite, const ComparisonConfig& cfg,
                                   const std::vector<int>& n_values, TableCache& cache)
{
  std::vector<CurrentMetrics> ref(suite.size());
  std::vector<double> windows(suite.size());
  parallel_for(suite.size(), cfg.jobs, [&](std::size_t k) {
    const OracleRun run = simulate_benchmark(suite[k], cfg);
    ref[k] = oracle_metrics(run);
    windows[k] = run.window;
    table_for(suite[k], cfg, cache);
  });

  std::vector<NSweepRow> out;
  for (int n : n_values) {
    ComparisonConfig c = cfg;
    c.dcm.n_steps = n;
    NSweepRow row;
    row.n_steps = n;
    for (std::size_t k = 0; k < suite.size(); ++k) {
      const auto table = table_for(suite[k], c, cache);
      const auto t0 = Clock::now();
      const DcmTrace trace = dcm_for_net(suite[k].net, *table, c, suite[k].name);
      row.dcm_runtime_s += seconds_since(t0);
      const MetricErrors e = relative_errors(compute_metrics(trace, windows[k]), ref[k]);
      row.mean_avg_error += e.avg;
      row.mean_rms_error += e.rms;
      row.mean_peak_error += e.peak;
    }
    const double m = std::max<std::size_t>(suite.size(), 1);
    row.mean_avg_error /= m;
    row.mean_rms_error /= m;
    row.mean_peak_error /= m;
    out.push_back(row);
  }
  return out;
}

} // namespace rcdcm
