#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rcdcm/driverlib.hpp"
#include "rcdcm/error.hpp"

using namespace rcdcm;
namespace fs = std::filesystem;

namespace {

constexpr double vdd = 1.1;

const DriverCharTable& thevenin_table()
{
  static const DriverCharTable t = [] {
    const auto grid = default_cap_grid(40e-15);
    return characterize(make_thevenin("th", 400.0), vdd, 20e-12, Direction::rising, grid, 100e-12,
                        0.05e-12);
  }();
  return t;
}

const DriverCharTable& mos_table()
{
  static const DriverCharTable t = [] {
    const auto grid = default_cap_grid(40e-15);
    return characterize(make_mos_like("mos"), vdd, 10e-12, Direction::rising, grid, 100e-12,
                        0.1e-12);
  }();
  return t;
}

fs::path scratch_dir(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("rcdcm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST_SUITE("driverlib")
{
  TEST_CASE("default grid")
  {
    const auto g = default_cap_grid(60e-15);
    REQUIRE(g.size() == 22);
    CHECK(g[0] == doctest::Approx(0.6e-15));
    CHECK(g[1] == doctest::Approx(1.5e-15));
    CHECK(g[2] == doctest::Approx(3e-15));
    CHECK(g.back() == doctest::Approx(60e-15));
    for (std::size_t i = 1; i < g.size(); ++i)
      CHECK(g[i] > g[i - 1]);
  }

  TEST_CASE("thevenin table matches the analytic RC ramp")
  {
    const DriverCharTable& t = thevenin_table();
    const double rise = 20e-12 / 0.8;
    for (std::size_t ci : {0u, 5u, 12u, 21u}) {
      const double c = t.cap_grid[ci];
      const double i_peak = c * vdd / rise;
      for (int k = 1; k < 100; ++k) {
        const double time = k * 1e-12;
        const double i_ref = testsupport::ramp_rc_current(400.0, c, vdd, rise, time);
        const double v_ref = testsupport::ramp_rc_voltage(400.0, c, vdd, rise, time);
        CHECK(std::abs(t.current_of(c, time) - i_ref) <= 5e-3 * i_peak);
        CHECK(std::abs(t.voltage_of(c, time) - v_ref) <= 5e-3 * vdd);
      }
      CHECK(t.stored_charge(ci) == doctest::Approx(c * vdd).epsilon(2e-3));
    }
  }

  TEST_CASE("time_of_voltage inverts voltage_of")
  {
    for (const DriverCharTable* t : {&thevenin_table(), &mos_table()})
      for (double c : {t->cap_grid[3], 0.5 * (t->cap_grid[7] + t->cap_grid[8]), t->c_max()})
        for (double frac : {0.01, 0.1, 0.37, 0.5, 0.9, 0.99}) {
          const double v = frac * vdd;
          const double tv = t->time_of_voltage(c, v);
          CHECK(t->voltage_of(c, tv) == doctest::Approx(v).epsilon(1e-9));
          // The crossing is the first after the initial excursion.
          const PwlPoint ex = t->initial_extreme(c);
          CHECK(tv >= ex.t);
        }
  }

  TEST_CASE("interpolation between curves is linear in C")
  {
    const DriverCharTable& t = thevenin_table();
    const double a = t.cap_grid[9], b = t.cap_grid[10], mid = 0.5 * (a + b);
    for (double time : {5e-12, 20e-12, 40e-12})
      CHECK(t.current_of(mid, time) ==
            doctest::Approx(0.5 * (t.current_of(a, time) + t.current_of(b, time))));
  }

  TEST_CASE("coverage and reachability errors")
  {
    const DriverCharTable& t = thevenin_table();
    CHECK_THROWS_AS(t.current_of(2.0 * t.c_max(), 1e-12), DomainError);
    CHECK_THROWS_AS(t.voltage_of(0.5 * t.c_min(), 1e-12), DomainError);
    CHECK_THROWS_AS(t.time_of_voltage(t.c_max(), 1.2 * vdd), DomainError);
    bool clamped = false;
    CHECK(t.current_of(t.c_max(), 10.0 * t.window, &clamped) == 0.0);
    CHECK(clamped);
  }

  TEST_CASE("characterization input checks")
  {
    const DriverModel m = make_thevenin("th", 400.0);
    const std::vector<double> descending{2e-15, 1e-15};
    CHECK_THROWS_AS(characterize(m, vdd, 10e-12, Direction::rising, descending, 50e-12, 0.05e-12),
                    DomainError);
    const std::vector<double> ok{1e-15, 2e-15};
    CHECK_THROWS_AS(characterize(m, vdd, 10e-12, Direction::rising, ok, 50e-12, 1e-12),
                    DomainError);
    CHECK_THROWS_AS(characterize(m, -1.0, 10e-12, Direction::rising, ok, 50e-12, 0.05e-12),
                    DomainError);
  }

  TEST_CASE("mos-like rising output undershoots first")
  {
    const DriverCharTable& t = mos_table();
    for (std::size_t ci = 0; ci < t.cap_grid.size(); ++ci) {
      const PwlPoint ex = t.initial_extreme(t.cap_grid[ci]);
      CHECK(ex.t > 0.0);
      CHECK(ex.v < 0.0);
    }
    // Small loads feel the coupling more.
    CHECK(t.initial_extreme(t.c_min()).v < t.initial_extreme(t.c_max()).v);
    // Every curve settles at the rail.
    for (std::size_t ci = 0; ci < t.cap_grid.size(); ++ci)
      CHECK(t.voltage.at(ci).back() == doctest::Approx(vdd).epsilon(2e-3));
  }

  TEST_CASE("thevenin curves have no excursion")
  {
    const DriverCharTable& t = thevenin_table();
    const PwlPoint ex = t.initial_extreme(t.cap_grid[4]);
    CHECK(ex.t == 0.0);
    CHECK(ex.v == 0.0);
  }

  TEST_CASE("falling tables and the rising view")
  {
    const auto grid = default_cap_grid(20e-15);
    const DriverCharTable f = characterize(make_thevenin("th", 400.0), vdd, 20e-12,
                                           Direction::falling, grid, 100e-12, 0.05e-12);
    CHECK(f.voltage[0].front() == doctest::Approx(vdd));
    CHECK(f.voltage[0].back() == doctest::Approx(0.0).epsilon(1e-3).scale(vdd));
    const DriverCharTable r = rising_view(f);
    CHECK(r.direction == Direction::rising);
    for (std::size_t ci : {0u, 10u, 21u})
      for (double time : {3e-12, 17e-12, 60e-12}) {
        CHECK(r.voltage_of(grid[ci], time) ==
              doctest::Approx(vdd - f.voltage_of(grid[ci], time)).epsilon(1e-12));
        CHECK(r.current_of(grid[ci], time) ==
              doctest::Approx(-f.current_of(grid[ci], time)).epsilon(1e-12));
      }
  }

  TEST_CASE("select_table")
  {
    const std::vector<double> grid{5e-15, 10e-15, 20e-15};
    const DriverModel m = make_thevenin("th", 400.0);
    std::vector<DriverCharTable> lib;
    for (double s : {10e-12, 30e-12})
      lib.push_back(characterize(m, vdd, s, Direction::rising, grid, 60e-12, 0.05e-12));

    const TableSelection exact = select_table(lib, "th", 30e-12, Direction::rising);
    CHECK_FALSE(exact.blended);
    CHECK_FALSE(exact.out_of_range);
    CHECK(exact.table.slew == 30e-12);

    const TableSelection mid = select_table(lib, "th", 20e-12, Direction::rising);
    CHECK(mid.blended);
    CHECK(mid.table.slew == doctest::Approx(20e-12));
    for (std::size_t ci = 0; ci < grid.size(); ++ci)
      for (std::size_t k = 0; k < lib[0].time_grid.size(); k += 37)
        CHECK(mid.table.current[ci][k] ==
              doctest::Approx(0.5 * (lib[0].current[ci][k] + lib[1].current[ci][k])));

    const TableSelection out = select_table(lib, "th", 80e-12, Direction::rising);
    CHECK(out.out_of_range);
    CHECK(out.table.slew == 30e-12);

    CHECK_THROWS_AS(select_table(lib, "other", 20e-12, Direction::rising), DomainError);
    CHECK_THROWS_AS(select_table(lib, "th", 20e-12, Direction::falling), DomainError);
    CHECK_THROWS_AS(select_table({}, "th", 20e-12, Direction::rising), DomainError);
  }

  TEST_CASE("JSON and directory round trip")
  {
    const DriverCharTable& t = mos_table();
    const DriverCharTable back = table_from_json(table_to_json(t));
    CHECK(back.driver == t.driver);
    CHECK(back.cap_grid == t.cap_grid);
    CHECK(back.time_grid == t.time_grid);
    CHECK(back.current == t.current);
    CHECK(back.voltage == t.voltage);
    CHECK(back.model.kind() == "mos-like");
    CHECK(table_to_json(back) == table_to_json(t));

    const fs::path dir = scratch_dir("tables");
    save_table(t, (dir / "a.json").string());
    save_table(thevenin_table(), (dir / "b.json").string());
    { std::ofstream(dir / "notes.txt") << "ignored"; }
    const auto lib = load_table_dir(dir.string());
    CHECK(lib.size() == 2);
    CHECK(load_table((dir / "a.json").string()).current == t.current);

    { std::ofstream(dir / "bad.json") << "{\"driver\": 3}"; }
    CHECK_THROWS_AS(load_table((dir / "bad.json").string()), ParseError);
    CHECK_THROWS_AS(load_table((dir / "missing.json").string()), ParseError);
    fs::remove_all(dir);
  }

  TEST_CASE("characterization is deterministic")
  {
    const auto grid = default_cap_grid(10e-15);
    const DriverModel m = make_mos_like("mos");
    const auto a = characterize(m, vdd, 30e-12, Direction::rising, grid, 100e-12, 0.1e-12);
    const auto b = characterize(m, vdd, 30e-12, Direction::rising, grid, 100e-12, 0.1e-12);
    CHECK(table_to_json(a) == table_to_json(b));
  }
}
