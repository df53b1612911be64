#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rcdcm/dcm.hpp"
#include "rcdcm/error.hpp"
#include "rcdcm/metrics.hpp"
#include "rcdcm/suite.hpp"

using namespace rcdcm;

namespace {

constexpr double vdd = 1.1;

DriverCharTable make_table(const DriverModel& d, double slew, double c_max,
                           Direction dir = Direction::rising)
{
  const auto grid = default_cap_grid(c_max);
  return characterize(d, vdd, slew, dir, grid, 200e-12, 0.1e-12);
}

const DriverCharTable& thev_table()
{
  static const DriverCharTable t = make_table(make_thevenin("th", 400.0), 30e-12, 50e-15);
  return t;
}

const DriverCharTable& mos_table()
{
  static const DriverCharTable t = make_table(make_mos_like("mos"), 10e-12, 50e-15);
  return t;
}

ReducedAdmittance cap_load(double c)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "C1 o 0 %.17g", c);
  return reduce(assemble_mna(parse_netlist(buf, "o")), 2);
}

RcNetwork shielded_ladder()
{
  std::mt19937_64 rng(12);
  return make_ladder(100, 1300.0, 48e-15, rng);
}

ReducedAdmittance ladder_load() { return reduce(assemble_mna(shielded_ladder()), 4); }

} // namespace

TEST_SUITE("dcm")
{
  TEST_CASE("config validation")
  {
    DcmConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_steps = 9;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.tolerance = 0.2;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.v_start = 0.5;
    c.v_end = 0.4;
    CHECK_THROWS_AS(c.validate(), DomainError);
  }

  TEST_CASE("pure capacitor on the grid is a fixed point")
  {
    for (const DriverCharTable* t : {&thev_table(), &mos_table()})
      for (std::size_t ci : {1u, 6u, 13u, 21u}) {
        const double c = t->cap_grid[ci];
        const double spacing = t->cap_grid[ci] - t->cap_grid[ci - 1];
        const DcmTrace tr = run_dcm(*t, cap_load(c));
        for (const auto& s : tr.steps)
          CHECK(std::abs(s.c_step - c) <= 0.01 * spacing);
        for (int k = 0; k <= 1500; ++k) {
          const double time = k * 0.1e-12;
          CHECK(std::abs(tr.voltage(time) - t->voltage_of(c, time)) <= 0.01 * vdd);
        }
      }
  }

  TEST_CASE("trace invariants on a shielded ladder")
  {
    const DriverCharTable& t = thev_table();
    const DcmTrace tr = run_dcm(t, ladder_load());
    REQUIRE(tr.steps.size() == 99);
    for (std::size_t k = 1; k < tr.steps.size(); ++k) {
      CHECK(tr.steps[k].t > tr.steps[k - 1].t);
      CHECK(tr.steps[k].v > tr.steps[k - 1].v);
    }
    for (const auto& s : tr.steps) {
      CHECK(s.c_step >= t.c_min());
      CHECK(s.c_step <= t.c_max());
      // The output waveform passes through every matched record.
      CHECK(tr.waveform.eval(s.t) == doctest::Approx(s.v).epsilon(1e-12));
    }
    CHECK(tr.steps.front().v == doctest::Approx(0.01 * vdd));
    CHECK(tr.steps.back().v == doctest::Approx(0.99 * vdd));
    CHECK(tr.c_eff_first == tr.steps.front().c_step);
    CHECK(tr.c_eff_last == tr.steps.back().c_step);

    const auto pts = tr.waveform.points();
    for (std::size_t k = 1; k < pts.size(); ++k)
      CHECK(pts[k].t > pts[k - 1].t);
    CHECK(tr.head_stitched);
    CHECK(tr.tail_stitched);
  }

  TEST_CASE("resistive shielding: C_step grows toward C_total")
  {
    const DcmTrace tr = run_dcm(thev_table(), ladder_load());
    const double c_total = shielded_ladder().total_capacitance();
    CHECK(tr.steps.front().c_step < 0.5 * c_total);
    for (std::size_t k = 1; k < tr.steps.size(); ++k)
      CHECK(tr.steps[k].c_step >= tr.steps[k - 1].c_step * (1.0 - 1e-9));
    CHECK(tr.steps.back().c_step == doctest::Approx(c_total).epsilon(0.1));
  }

  TEST_CASE("tail settles and its current decays")
  {
    const DcmTrace tr = run_dcm(thev_table(), ladder_load());
    const double t_end = tr.end_time();
    CHECK(tr.voltage(t_end) == doctest::Approx(vdd).epsilon(1e-3));
    double peak = 0.0;
    for (int k = 0; k <= 2000; ++k)
      peak = std::max(peak, std::abs(tr.current(t_end * k / 2000.0)));
    CHECK(std::abs(tr.current(t_end)) <= 0.01 * peak);
    REQUIRE(tr.tail_current.size() > 2);
    for (std::size_t k = 1; k < tr.tail_current.size(); ++k)
      CHECK(std::abs(tr.tail_current[k]) <= std::abs(tr.tail_current[k - 1]) * (1 + 1e-9));
  }

  TEST_CASE("head: thevenin is monotone, mos-like undershoots")
  {
    const DcmTrace th = run_dcm(thev_table(), ladder_load());
    for (const auto& p : th.waveform.points())
      CHECK(p.v >= -1e-12);

    const DcmTrace mos = run_dcm(mos_table(), ladder_load());
    CHECK(mos.head_extreme.t > 0.0);
    CHECK(mos.head_extreme.v < 0.0);
    bool negative_before_first = false;
    for (const auto& p : mos.waveform.points())
      if (p.t < mos.steps.front().t && p.v < 0.0)
        negative_before_first = true;
    CHECK(negative_before_first);
    CHECK(mos.current(0.5 * mos.head_extreme.t) < 0.0);
    // Voltage stays continuous across the stitch.
    const double t1 = mos.steps.front().t;
    CHECK(std::abs(mos.voltage(t1 * (1 - 1e-9)) - mos.voltage(t1)) <= 1e-3);
  }

  TEST_CASE("tight tolerance still completes and reports residuals")
  {
    DcmConfig cfg;
    cfg.tolerance = 1e-9;
    cfg.max_iterations = 2;
    cfg.refine_iterations = 0;
    const DcmTrace tr = run_dcm(mos_table(), ladder_load(), cfg);
    CHECK(tr.steps.size() == 99);
    CHECK(tr.unconverged_steps > 0);
    CHECK(tr.residual_max > 0.0);
  }

  TEST_CASE("table must cover the net")
  {
    const DriverCharTable& t = thev_table();
    CHECK_THROWS_AS(run_dcm(t, cap_load(2.0 * t.c_max())), DomainError);
  }

  TEST_CASE("deterministic")
  {
    const DcmTrace a = run_dcm(mos_table(), ladder_load());
    const DcmTrace b = run_dcm(mos_table(), ladder_load());
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
      CHECK(a.steps[k].t == b.steps[k].t);
      CHECK(a.steps[k].c_step == b.steps[k].c_step);
    }
    std::ostringstream sa, sb;
    write_trace_csv(sa, a);
    write_trace_csv(sb, b);
    CHECK(sa.str() == sb.str());
  }

  TEST_CASE("incremental crossing stays monotone")
  {
    DcmConfig cfg;
    cfg.crossing = CrossingMode::incremental;
    const DcmTrace tr = run_dcm(thev_table(), ladder_load(), cfg);
    for (std::size_t k = 1; k < tr.steps.size(); ++k)
      CHECK(tr.steps[k].t > tr.steps[k - 1].t);
  }

  TEST_CASE("baseline on a pure capacitor agrees with DCM")
  {
    const DriverCharTable& t = thev_table();
    const double c = t.cap_grid[12];
    const DcmTrace tr = run_dcm(t, cap_load(c));
    const BaselineWaveform base = baseline_ctotal(t, c);
    const double window = tr.steps.back().t;
    const CurrentMetrics md = compute_metrics(tr, window);
    const CurrentMetrics mb = compute_metrics(base.t, base.i, window);
    const MetricErrors e = relative_errors(md, mb);
    CHECK(e.worst() < 0.01);
  }

  TEST_CASE("shielded ladder: DCM average beats the C_total baseline")
  {
    const DriverCharTable& t = thev_table();
    Benchmark b;
    b.net = shielded_ladder();
    b.driver = t.model;
    b.slew = t.slew;
    b.c_total = b.net.total_capacitance();
    b.r_wire = max_path_resistance(b.net);
    REQUIRE(b.shielding_dominant(vdd));
    ComparisonConfig cfg;
    const OracleRun orun = simulate_benchmark(b, cfg);
    const CurrentMetrics ref = compute_metrics(orun.result.t, orun.result.i_port, orun.window);
    const CurrentMetrics dcm = compute_metrics(run_dcm(t, ladder_load()), orun.window);
    const BaselineWaveform base = baseline_ctotal(t, b.c_total);
    const CurrentMetrics bl = compute_metrics(base.t, base.i, orun.window);
    const MetricErrors ed = relative_errors(dcm, ref), eb = relative_errors(bl, ref);
    CHECK(ed.avg < eb.avg);
    CHECK(ed.rms < eb.rms);
    CHECK(ed.worst() < 0.05);
  }

  TEST_CASE("falling transition mirrors the rising one")
  {
    const DriverCharTable fall =
      make_table(make_thevenin("th", 400.0), 30e-12, 50e-15, Direction::falling);
    const DcmTrace rise = run_dcm(thev_table(), ladder_load());
    const DcmTrace down = run_dcm(fall, ladder_load());
    CHECK(down.direction == Direction::falling);
    for (double time : {5e-12, 20e-12, 60e-12}) {
      CHECK(down.voltage(time) == doctest::Approx(vdd - rise.voltage(time)).epsilon(1e-6));
      CHECK(down.current(time) == doctest::Approx(-rise.current(time)).epsilon(1e-6).scale(1e-3));
    }
  }

  TEST_CASE("trace CSV mirrors the step records")
  {
    const DcmTrace tr = run_dcm(thev_table(), ladder_load());
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "step,t_ps,v_V,i_mA,C_step_fF");
    int steps = 0;
    while (std::getline(is, line))
      if (line.rfind("0,", 0) != 0)
        ++steps;
    CHECK(steps == static_cast<int>(tr.steps.size()));
  }
}
