#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcdcm/dcm.hpp"
#include "rcdcm/driverlib.hpp"
#include "rcdcm/error.hpp"
#include "rcdcm/metrics.hpp"
#include "rcdcm/mor.hpp"
#include "rcdcm/netlist.hpp"
#include "rcdcm/oracle.hpp"
#include "rcdcm/response.hpp"
#include "rcdcm/suite.hpp"

namespace rcdcm::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double si(const std::string& text, const char* what)
{
  try {
    return parse_si_value(text);
  } catch (const ParseError& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::vector<double> si_list(const std::vector<std::string>& items, const char* what)
{
  std::vector<double> out;
  for (const auto& s : items)
    out.push_back(si(s, what));
  return out;
}

std::ofstream open_out(const fs::path& path)
{
  fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os)
    throw ParseError("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

template <class F>
void parallel_for(std::size_t n, int jobs, F&& body)
{
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int w = 1; w < std::min<int>(jobs, static_cast<int>(n)); ++w)
    pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure)
    std::rethrow_exception(failure);
}

// Options shared by the net-level commands.
struct NetOptions
{
  std::vector<std::string> netlists;
  std::string port;
  std::string tables;
  std::string driver;
  std::string slew = "50p";
  std::string direction = "rising";
  int q = 4;
  int n_steps = 100;
  double tol = 0.01;
  std::string crossing = "absolute";
  std::string method = "congruence";
  int jobs = 1;
  std::string out = "rcdcm_out";
};

void add_net_options(CLI::App* app, NetOptions& o, bool dcm, bool tables)
{
  app->add_option("--netlist", o.netlists, "RC netlist file(s)")
    ->required()
    ->check(CLI::ExistingFile)
    ->envname("RCDCM_NETLIST");
  app->add_option("--port", o.port, "driver port node")->required()->envname("RCDCM_PORT");
  app->add_option("--q", o.q, "reduced order")->check(CLI::Range(1, 64))->envname("RCDCM_Q");
  app->add_option("--method", o.method, "reduction method")
    ->check(CLI::IsMember({"congruence", "projection"}))
    ->envname("RCDCM_METHOD");
  app->add_option("--out", o.out, "output directory")->envname("RCDCM_OUT");
  app->add_option("--jobs", o.jobs, "nets processed in parallel")
    ->check(CLI::Range(1, 1024))
    ->envname("RCDCM_JOBS");
  if (tables) {
    app->add_option("--tables", o.tables, "directory of characterized driver tables")
      ->required()
      ->check(CLI::ExistingDirectory)
      ->envname("RCDCM_TABLES");
    app->add_option("--driver", o.driver, "driver id (default: the only one in --tables)")
      ->envname("RCDCM_DRIVER");
    app->add_option("--slew", o.slew, "input 10-90% slew, e.g. 50p")->envname("RCDCM_SLEW");
    app->add_option("--direction", o.direction, "output transition")
      ->check(CLI::IsMember({"rising", "falling"}))
      ->envname("RCDCM_DIRECTION");
  }
  if (dcm) {
    app->add_option("--n-steps", o.n_steps, "DCM step count")->envname("RCDCM_N_STEPS");
    app->add_option("--tol", o.tol, "DCM match tolerance")->envname("RCDCM_TOL");
    app->add_option("--crossing", o.crossing, "step end time on the candidate curve")
      ->check(CLI::IsMember({"incremental", "absolute"}))
      ->envname("RCDCM_CROSSING");
  }
}

ReductionMethod method_of(const NetOptions& o)
{
  return o.method == "projection" ? ReductionMethod::projection : ReductionMethod::congruence;
}

DcmConfig dcm_config(const NetOptions& o)
{
  DcmConfig cfg;
  cfg.n_steps = o.n_steps;
  cfg.tolerance = o.tol;
  cfg.crossing = o.crossing == "incremental" ? CrossingMode::incremental : CrossingMode::absolute;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return cfg;
}

ComparisonConfig comparison_config(const NetOptions& o)
{
  ComparisonConfig cfg;
  cfg.dcm = dcm_config(o);
  cfg.q = o.q;
  cfg.method = method_of(o);
  cfg.jobs = o.jobs;
  return cfg;
}

std::string net_id(const std::string& path) { return fs::path(path).stem().string(); }

// Per-net output directory: --out itself for one net, a subdirectory each
// for several.
fs::path net_dir(const NetOptions& o, std::size_t k)
{
  if (o.netlists.size() == 1)
    return o.out;
  return fs::path(o.out) / net_id(o.netlists[k]);
}

DriverCharTable pick_table(const NetOptions& o, std::ostream& err)
{
  const std::vector<DriverCharTable> lib = load_table_dir(o.tables);
  if (lib.empty())
    throw ParseError("no tables in " + o.tables);
  std::string driver = o.driver;
  if (driver.empty()) {
    driver = lib.front().driver;
    for (const auto& t : lib)
      if (t.driver != driver)
        throw ParseError("--tables holds several drivers; choose one with --driver");
  }
  TableSelection sel =
    select_table(lib, driver, si(o.slew, "--slew"), direction_from_string(o.direction));
  if (sel.out_of_range)
    err << "warning: slew " << o.slew << " lies outside the characterized range of '" << driver
        << "'; using the nearest table\n";
  return std::move(sel.table);
}

// Metrics window without an oracle: the last matched level.
double trace_window(const DcmTrace& trace)
{
  return trace.steps.empty() ? trace.end_time() : trace.steps.back().t;
}

json metrics_json(const CurrentMetrics& m)
{
  return {{"avg_A", m.avg}, {"avg_abs_A", m.avg_abs}, {"rms_A", m.rms}, {"peak_A", m.peak}};
}

json errors_json(const MetricErrors& e)
{
  return {{"avg", e.avg}, {"rms", e.rms}, {"peak", e.peak}};
}

struct NetRun
{
  RcNetwork net;
  DcmTrace trace;
  double runtime_s = 0.0;
};

NetRun run_net(const std::string& path, const NetOptions& o, const DriverCharTable& table,
               const ComparisonConfig& cfg)
{
  NetRun r;
  r.net = read_netlist(path, o.port);
  const auto t0 = Clock::now();
  r.trace = dcm_for_net(r.net, table, cfg, net_id(path));
  r.runtime_s = seconds_since(t0);
  return r;
}

void write_respond_artifacts(const fs::path& dir, const NetRun& r, double window)
{
  const DcmTrace& tr = r.trace;
  std::vector<double> t, v, i;
  for (const auto& p : tr.waveform.points()) {
    t.push_back(p.t);
    v.push_back(tr.voltage(p.t));
    i.push_back(tr.current(p.t));
  }
  {
    auto os = open_out(dir / "waveform.csv");
    write_waveform_csv(os, t, v, i);
  }
  {
    auto os = open_out(dir / "trace.csv");
    write_trace_csv(os, tr);
  }
  json m = metrics_json(compute_metrics(tr, window));
  m["runtime_s"] = r.runtime_s;
  m["residual_max"] = tr.residual_max;
  m["window_s"] = window;
  m["c_eff_first_F"] = tr.c_eff_first;
  m["c_eff_last_F"] = tr.c_eff_last;
  m["c_total_F"] = r.net.total_capacitance();
  m["unconverged_steps"] = tr.unconverged_steps;
  auto os = open_out(dir / "metrics.json");
  os << m.dump(2) << '\n';
}

int cmd_characterize(const std::vector<std::string>& drivers, const std::vector<std::string>& slews,
                     const std::vector<std::string>& directions, const std::string& vdd_s,
                     const std::string& c_max_s, const std::vector<std::string>& grid_s,
                     const std::string& dt_s, const std::string& window_s, const std::string& out,
                     std::ostream& os)
{
  const double vdd = si(vdd_s, "--vdd");
  const double dt = si(dt_s, "--dt");
  const double window = si(window_s, "--window");
  if (!(vdd > 0 && dt > 0 && window > dt))
    throw ParseError("--vdd, --dt and --window must be positive with window > dt");

  std::vector<double> grid;
  if (!grid_s.empty()) {
    grid = si_list(grid_s, "--grid");
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (!(grid[k] > 0) || (k > 0 && !(grid[k] > grid[k - 1])))
        throw ParseError("--grid must be positive and strictly ascending");
    if (grid.size() < 2)
      throw ParseError("--grid needs at least two capacitances");
  } else {
    if (c_max_s.empty())
      throw ParseError("one of --c-max or --grid is required");
    const double c_max = si(c_max_s, "--c-max");
    if (!(c_max > 0))
      throw ParseError("--c-max must be positive");
    grid = default_cap_grid(c_max);
  }

  os << "grid (fF):";
  for (double c : grid)
    os << ' ' << c * 1e15;
  os << '\n';
  for (const auto& spec : drivers) {
    const auto eq = spec.find('=');
    const bool named = eq != std::string::npos && spec.find(':') > eq;
    const DriverModel model = named ? parse_driver_spec(spec.substr(eq + 1), spec.substr(0, eq))
                                    : parse_driver_spec(spec);
    for (double slew : si_list(slews, "--slew"))
      for (const auto& d : directions) {
        const Direction dir = direction_from_string(d);
        const auto t0 = Clock::now();
        const DriverCharTable tab = characterize(model, vdd, slew, dir, grid, window, dt);
        const double secs = seconds_since(t0);
        std::ostringstream name;
        name << model.id << '_' << to_string(dir) << '_' << slew * 1e12 << "ps.json";
        const fs::path path = fs::path(out) / name.str();
        fs::create_directories(out);
        save_table(tab, path.string());
        os << std::fixed << std::setprecision(3) << path.string() << "  " << secs << " s  window "
           << tab.window * 1e12 << " ps\n"
           << std::defaultfloat;
      }
  }
  return exit_ok;
}

int cmd_respond(const NetOptions& o, std::ostream& os, std::ostream& err)
{
  const ComparisonConfig cfg = comparison_config(o);
  const DriverCharTable table = pick_table(o, err);
  std::vector<std::string> lines(o.netlists.size());
  parallel_for(o.netlists.size(), o.jobs, [&](std::size_t k) {
    const NetRun r = run_net(o.netlists[k], o, table, cfg);
    const double window = trace_window(r.trace);
    write_respond_artifacts(net_dir(o, k), r, window);
    const CurrentMetrics m = compute_metrics(r.trace, window);
    std::ostringstream line;
    line << net_id(o.netlists[k]) << "  avg " << m.avg * 1e3 << " mA  rms " << m.rms * 1e3
         << " mA  peak " << m.peak * 1e3 << " mA  " << r.runtime_s * 1e3 << " ms";
    lines[k] = line.str();
  });
  for (const auto& l : lines)
    os << l << '\n';
  return exit_ok;
}

struct Verified
{
  NetRun run;
  OracleRun oracle;
  CurrentMetrics dcm, ref, base;
  MetricErrors dcm_error, base_error;
};

Verified verify_net(const std::string& path, const NetOptions& o, const DriverCharTable& table,
                    const ComparisonConfig& cfg)
{
  Verified v;
  v.run = run_net(path, o, table, cfg);
  Benchmark b;
  b.name = net_id(path);
  b.net = v.run.net;
  b.driver = table.model;
  b.slew = table.slew;
  b.direction = table.direction;
  b.c_total = b.net.total_capacitance();
  b.r_wire = max_path_resistance(b.net);
  ComparisonConfig ocfg = cfg;
  ocfg.vdd = table.vdd;
  v.oracle = simulate_benchmark(b, ocfg);
  v.ref = compute_metrics(v.oracle.result.t, v.oracle.result.i_port, v.oracle.window);
  v.dcm = compute_metrics(v.run.trace, v.oracle.window);
  v.dcm_error = relative_errors(v.dcm, v.ref);
  const BaselineWaveform base = baseline_ctotal(table, b.c_total);
  v.base = compute_metrics(base.t, base.i, v.oracle.window);
  v.base_error = relative_errors(v.base, v.ref);
  return v;
}

int cmd_verify(const NetOptions& o, bool baseline, double max_err, std::ostream& os,
               std::ostream& err)
{
  const ComparisonConfig cfg = comparison_config(o);
  const DriverCharTable table = pick_table(o, err);
  std::vector<Verified> res(o.netlists.size());
  parallel_for(o.netlists.size(), o.jobs,
               [&](std::size_t k) { res[k] = verify_net(o.netlists[k], o, table, cfg); });

  bool failed = false;
  json report = json::array();
  os << std::left << std::setw(20) << "net" << std::setw(10) << "model" << std::right
     << std::setw(10) << "avg_err" << std::setw(10) << "rms_err" << std::setw(10) << "peak_err"
     << std::setw(10) << "speedup" << '\n';
  auto row = [&](const std::string& net, const char* model, const MetricErrors& e,
                 std::optional<double> speedup) {
    os << std::left << std::setw(20) << net << std::setw(10) << model << std::right << std::fixed
       << std::setprecision(4) << std::setw(10) << e.avg << std::setw(10) << e.rms
       << std::setw(10) << e.peak;
    if (speedup)
      os << std::setprecision(1) << std::setw(10) << *speedup;
    os << std::defaultfloat << '\n';
  };
  for (std::size_t k = 0; k < res.size(); ++k) {
    const Verified& v = res[k];
    const std::string id = net_id(o.netlists[k]);
    const double speedup = v.oracle.runtime_s / v.run.runtime_s;
    row(id, "dcm", v.dcm_error, speedup);
    if (baseline)
      row(id, "c_total", v.base_error, std::nullopt);
    failed = failed || v.dcm_error.worst() > max_err;

    json j = {{"net", id},
              {"window_s", v.oracle.window},
              {"oracle", metrics_json(v.ref)},
              {"dcm", metrics_json(v.dcm)},
              {"dcm_error", errors_json(v.dcm_error)},
              {"dcm_runtime_s", v.run.runtime_s},
              {"oracle_runtime_s", v.oracle.runtime_s},
              {"speedup", speedup}};
    if (baseline) {
      j["baseline"] = metrics_json(v.base);
      j["baseline_error"] = errors_json(v.base_error);
    }
    report.push_back(j);
    write_respond_artifacts(net_dir(o, k), v.run, v.oracle.window);
  }
  auto f = open_out(fs::path(o.out) / "verify.json");
  f << report.dump(2) << '\n';
  if (failed)
    err << "error above --max-err " << max_err << '\n';
  return failed ? exit_threshold : exit_ok;
}

int cmd_sweep(const NetOptions& o, const std::vector<int>& n_values, std::ostream& os,
              std::ostream& err)
{
  const DriverCharTable table = pick_table(o, err);
  json report = json::array();
  os << std::left << std::setw(20) << "net" << std::right << std::setw(6) << "N" << std::setw(10)
     << "avg_err" << std::setw(10) << "rms_err" << std::setw(10) << "peak_err" << std::setw(12)
     << "dcm_ms" << '\n';
  for (const auto& path : o.netlists) {
    NetOptions base = o;
    std::optional<Verified> ref;
    for (int n : n_values) {
      base.n_steps = n;
      const ComparisonConfig cfg = comparison_config(base);
      if (!ref) {
        ref = verify_net(path, base, table, cfg);
      } else {
        ref->run = run_net(path, base, table, cfg);
        ref->dcm = compute_metrics(ref->run.trace, ref->oracle.window);
        ref->dcm_error = relative_errors(ref->dcm, ref->ref);
      }
      const MetricErrors& e = ref->dcm_error;
      os << std::left << std::setw(20) << net_id(path) << std::right << std::setw(6) << n
         << std::fixed << std::setprecision(4) << std::setw(10) << e.avg << std::setw(10) << e.rms
         << std::setw(10) << e.peak << std::setprecision(3) << std::setw(12)
         << ref->run.runtime_s * 1e3 << std::defaultfloat << '\n';
      report.push_back({{"net", net_id(path)},
                        {"n_steps", n},
                        {"dcm_error", errors_json(e)},
                        {"dcm_runtime_s", ref->run.runtime_s}});
    }
  }
  auto f = open_out(fs::path(o.out) / "sweep.json");
  f << report.dump(2) << '\n';
  return exit_ok;
}

int cmd_suite(const NetOptions& o, std::uint64_t seed, const std::vector<int>& sizes,
              const std::vector<std::string>& slews, bool baseline,
              std::optional<double> max_err, std::ostream& os, std::ostream& err)
{
  SuiteOptions so;
  so.seed = seed;
  so.ladder_sizes = sizes;
  if (!slews.empty())
    so.slews = si_list(slews, "--slew");
  const ComparisonConfig cfg = comparison_config(o);
  const ErrorReport rep = run_comparison(generate_suite(so), cfg);
  rep.print_table(os);
  auto f = open_out(fs::path(o.out) / "report.json");
  f << rep.to_json() << '\n';

  if (!max_err)
    return exit_ok;
  bool failed = rep.dcm_max.worst() > *max_err;
  if (baseline)
    for (const auto& r : rep.rows)
      if (r.shielding && !(r.dcm_error.worst() < r.baseline_error.worst()))
        failed = true;
  if (failed)
    err << "suite errors above --max-err " << *max_err
        << (baseline ? " or not below the C_total baseline" : "") << '\n';
  return failed ? exit_threshold : exit_ok;
}

int cmd_reduce(const NetOptions& o, std::ostream& os)
{
  std::vector<std::string> lines(o.netlists.size());
  parallel_for(o.netlists.size(), o.jobs, [&](std::size_t k) {
    const RcNetwork net = read_netlist(o.netlists[k], o.port);
    const ReducedAdmittance ya =
      reduce(assemble_mna(net), o.q, method_of(o), net_id(o.netlists[k]));
    auto f = open_out(net_dir(o, k) / "admittance.json");
    f << admittance_to_json(ya) << '\n';
    std::ostringstream line;
    line << ya.net_id << "  q=" << ya.order() << "  Y(0)=" << ya.dc_value()
         << " S  direct=" << ya.direct << " S";
    for (const auto& t : ya.terms)
      line << "\n  pole " << t.pole << " 1/s  residue " << t.residue << " S";
    if (!ya.notice.empty())
      line << "\n  note: " << ya.notice;
    lines[k] = line.str();
  });
  for (const auto& l : lines)
    os << l << '\n';
  return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"RC interconnect current response by dynamic capacitance matching", "rcdcm"};
  app.require_subcommand(1);

  // characterize
  std::vector<std::string> ch_drivers{"thevenin-ramp", "mos-like"};
  std::vector<std::string> ch_slews{"10p", "50p", "150p"};
  std::vector<std::string> ch_dirs{"rising"};
  std::string ch_vdd = "1.1", ch_cmax, ch_dt = "0.1p", ch_window = "200p", ch_out = "tables";
  std::vector<std::string> ch_grid;
  auto* ch = app.add_subcommand("characterize", "drive a capacitor grid and write table files");
  ch->add_option("--driver", ch_drivers, "driver spec, [id=]kind[:key=value,...]; repeatable");
  ch->add_option("--slew", ch_slews, "input slews")->delimiter(',')->envname("RCDCM_SLEW");
  ch->add_option("--direction", ch_dirs, "output transitions")
    ->delimiter(',')
    ->check(CLI::IsMember({"rising", "falling"}));
  ch->add_option("--vdd", ch_vdd, "supply voltage")->envname("RCDCM_VDD");
  ch->add_option("--c-max", ch_cmax, "largest grid capacitance; default grid below it");
  ch->add_option("--grid", ch_grid, "explicit ascending capacitance grid")->delimiter(',');
  ch->add_option("--dt", ch_dt, "integration step");
  ch->add_option("--window", ch_window, "initial simulation window");
  ch->add_option("--out", ch_out, "output directory")->envname("RCDCM_OUT");

  NetOptions respond_o, verify_o, sweep_o, suite_o, reduce_o;
  auto* rs = app.add_subcommand("respond", "DCM current response of a net");
  add_net_options(rs, respond_o, true, true);

  bool vf_baseline = false;
  double vf_max_err = 0.05;
  auto* vf = app.add_subcommand("verify", "DCM against the transient oracle");
  add_net_options(vf, verify_o, true, true);
  vf->add_flag("--baseline", vf_baseline, "also report the C_total comparator");
  vf->add_option("--max-err", vf_max_err, "largest accepted relative error")
    ->envname("RCDCM_MAX_ERR");

  std::vector<int> sw_n{25, 50, 100};
  auto* sw = app.add_subcommand("sweep", "error and runtime versus step count");
  add_net_options(sw, sweep_o, true, true);
  sw->add_option("--n-values", sw_n, "step counts")->delimiter(',');

  std::uint64_t su_seed = 2024;
  std::vector<int> su_sizes{10, 100, 500, 2000};
  std::vector<std::string> su_slews;
  bool su_baseline = false;
  std::optional<double> su_max_err;
  auto* su = app.add_subcommand("suite", "generated benchmark suite against the oracle");
  su->add_option("--seed", su_seed, "suite seed")->envname("RCDCM_SEED");
  su->add_option("--sizes", su_sizes, "ladder segment counts")->delimiter(',');
  su->add_option("--slew", su_slews, "input slews")->delimiter(',');
  su->add_option("--q", suite_o.q, "reduced order")->check(CLI::Range(1, 64))->envname("RCDCM_Q");
  su->add_option("--n-steps", suite_o.n_steps, "DCM step count")->envname("RCDCM_N_STEPS");
  su->add_option("--tol", suite_o.tol, "DCM match tolerance")->envname("RCDCM_TOL");
  su->add_option("--crossing", suite_o.crossing, "step end time on the candidate curve")
    ->check(CLI::IsMember({"incremental", "absolute"}))
    ->envname("RCDCM_CROSSING");
  su->add_option("--jobs", suite_o.jobs, "benchmarks run in parallel")
    ->check(CLI::Range(1, 1024))
    ->envname("RCDCM_JOBS");
  su->add_option("--out", suite_o.out, "output directory")->envname("RCDCM_OUT");
  su->add_flag("--baseline", su_baseline, "require errors below the C_total baseline on shielded nets");
  su->add_option("--max-err", su_max_err, "largest accepted relative error")
    ->envname("RCDCM_MAX_ERR");

  auto* rd = app.add_subcommand("reduce", "pole-residue admittance of a net");
  add_net_options(rd, reduce_o, false, false);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (ch->parsed())
      return cmd_characterize(ch_drivers, ch_slews, ch_dirs, ch_vdd, ch_cmax, ch_grid, ch_dt,
                              ch_window, ch_out, out);
    if (rs->parsed())
      return cmd_respond(respond_o, out, err);
    if (vf->parsed())
      return cmd_verify(verify_o, vf_baseline, vf_max_err, out, err);
    if (sw->parsed()) {
      if (sw_n.empty())
        throw ParseError("--n-values is empty");
      return cmd_sweep(sweep_o, sw_n, out, err);
    }
    if (su->parsed())
      return cmd_suite(suite_o, su_seed, su_sizes, su_slews, su_baseline, su_max_err, out, err);
    if (rd->parsed())
      return cmd_reduce(reduce_o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "internal failure: " << e.what() << '\n';
    return exit_numerical;
  }
  return exit_usage;
}

} // namespace rcdcm::cli
