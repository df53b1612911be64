#include <doctest.h>

#include <nlohmann/json.hpp>

#include <random>
#include <set>
#include <sstream>

#include "rcdcm/error.hpp"
#include "rcdcm/suite.hpp"

using namespace rcdcm;

namespace {

SuiteOptions small_suite()
{
  SuiteOptions o;
  o.ladder_sizes = {20};
  o.trees = o.bus = o.wordline = false;
  o.slews = {50e-12};
  return o;
}

} // namespace

TEST_SUITE("suite")
{
  TEST_CASE("generators hit the requested sizes")
  {
    std::mt19937_64 rng(1);
    const RcNetwork lad = make_ladder(2000, 1200.0, 50e-15, rng);
    CHECK(lad.resistor_count() == 2000);
    CHECK(lad.capacitor_count() == 2000);
    CHECK(lad.total_capacitance() == doctest::Approx(50e-15).epsilon(0.05));
    CHECK(lad.total_resistance() == doctest::Approx(1200.0).epsilon(0.05));

    const RcNetwork tree = make_tree(2, 8, 10.0, 1e-15, rng);
    CHECK(tree.resistor_count() == 255);
    CHECK(tree.capacitor_count() == 255);
    CHECK(tree.port == "root");

    const RcNetwork bus = make_bus(10, 4, 10, 30.0, 1e-15, 2e-15, rng);
    CHECK(bus.resistor_count() == 50);
    CHECK(bus.capacitor_count() == 54);

    const RcNetwork wl = make_wordline(64, 20.0, 0.5e-15, 50.0, 0.3e-15, rng);
    CHECK(wl.resistor_count() == 128);
    CHECK(wl.capacitor_count() == 128);

    CHECK_THROWS_AS(make_ladder(0, 1.0, 1e-15, rng), DomainError);
    CHECK_THROWS_AS(make_tree(2, 0, 1.0, 1e-15, rng), DomainError);
  }

  TEST_CASE("uniform draws are reproducible and in range")
  {
    std::mt19937_64 a(9), b(9);
    for (int k = 0; k < 1000; ++k) {
      const double x = uniform(a, 2.0, 3.0);
      CHECK(x == uniform(b, 2.0, 3.0));
      CHECK(x >= 2.0);
      CHECK(x < 3.0);
    }
  }

  TEST_CASE("max path resistance")
  {
    const RcNetwork net = parse_netlist("R1 a b 100\nR2 b c 200\nR3 b d 50\nR4 a d 400\nC1 c 0 1f\nC2 d 0 1f", "a");
    // a -> b -> d is 150, shorter than the direct 400; c sits at 300.
    CHECK(max_path_resistance(net) == doctest::Approx(300.0));
  }

  TEST_CASE("default suite composition")
  {
    const auto s = generate_suite();
    // 4 ladders + 3 trees + bus + wordline, 2 drivers, 3 slews.
    CHECK(s.size() == 9 * 2 * 3);
    std::set<std::string> names;
    for (const auto& b : s) {
      names.insert(b.name);
      CHECK(b.c_total >= 40e-15 * 0.999);
      CHECK(b.c_total <= 60e-15 * 1.001);
      CHECK(b.element_count == b.net.elements.size());
      CHECK(b.r_wire == doctest::Approx(max_path_resistance(b.net)));
    }
    CHECK(names.size() == s.size());
    CHECK(names.count("ladder2000/mos1x/10ps") == 1);
    CHECK(names.count("tree_f2d5/thev400/150ps") == 1);
    CHECK(names.count("wordline64/thev400/50ps") == 1);
  }

  TEST_CASE("suite generation is deterministic per seed")
  {
    SuiteOptions o;
    const auto a = generate_suite(o), b = generate_suite(o);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k)
      CHECK(serialize_netlist(a[k].net) == serialize_netlist(b[k].net));
    o.seed = 7;
    const auto c = generate_suite(o);
    CHECK(serialize_netlist(c[0].net) != serialize_netlist(a[0].net));
  }

  TEST_CASE("shielding follows wire versus driver resistance")
  {
    const double vdd = 1.1;
    Benchmark b;
    b.driver = make_thevenin("th", 400.0);
    b.r_wire = 199.0;
    CHECK_FALSE(b.shielding_dominant(vdd));
    b.r_wire = 200.0;
    CHECK(b.shielding_dominant(vdd));
    for (const auto& s : generate_suite())
      if (s.topology == Topology::ladder)
        CHECK(s.shielding_dominant(vdd));
  }

  TEST_CASE("table cache reuses characterizations")
  {
    TableCache cache;
    const DriverModel d = make_thevenin("th", 400.0);
    const auto a = cache.get(d, 1.1, 20e-12, Direction::rising, 10e-15, 80e-12, 0.05e-12);
    const auto b = cache.get(d, 1.1, 20e-12, Direction::rising, 10e-15, 80e-12, 0.05e-12);
    CHECK(a == b);
    CHECK(cache.size() == 1);
    cache.get(d, 1.1, 30e-12, Direction::rising, 10e-15, 80e-12, 0.05e-12);
    CHECK(cache.size() == 2);
    CHECK(table_cmax(50e-15, 1.2) == doctest::Approx(60e-15));
  }

  TEST_CASE("small comparison run and its report")
  {
    const auto suite = generate_suite(small_suite());
    REQUIRE(suite.size() == 2);
    ComparisonConfig cfg;
    cfg.jobs = 2;
    ErrorReport rep = run_comparison(suite, cfg);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& r : rep.rows) {
      CHECK(r.dcm_error.worst() < 0.05);
      CHECK(r.oracle.avg > 0.0);
      CHECK(r.window > 0.0);
      CHECK(r.c_eff_first <= r.c_eff_last);
      CHECK(r.dcm_runtime_s > 0.0);
      CHECK(r.oracle_runtime_s > 0.0);
    }
    CHECK(rep.dcm_max.avg == doctest::Approx(std::max(rep.rows[0].dcm_error.avg,
                                                      rep.rows[1].dcm_error.avg)));
    CHECK(rep.dcm_mean.rms == doctest::Approx(0.5 * (rep.rows[0].dcm_error.rms +
                                                     rep.rows[1].dcm_error.rms)));

    const auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["benchmarks"].size() == 2);
    CHECK(j["summary"]["count"] == 2);
    for (const char* key : {"avg_A", "avg_abs_A", "rms_A", "peak_A"})
      CHECK(j["benchmarks"][0]["dcm"].contains(key));

    std::ostringstream os;
    rep.print_table(os);
    CHECK(os.str().find("ladder20/thev400/50ps") != std::string::npos);

    // Serial and parallel runs agree.
    cfg.jobs = 1;
    const ErrorReport serial = run_comparison(suite, cfg);
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(serial.rows[k].dcm.rms == rep.rows[k].dcm.rms);
  }

  TEST_CASE("N sweep")
  {
    auto o = small_suite();
    o.slews = {10e-12};
    o.drivers = {make_thevenin("th", 400.0)};
    const auto suite = generate_suite(o);
    TableCache cache;
    const auto rows = run_n_sweep(suite, {}, {25, 50, 100}, cache);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].n_steps == 25);
    CHECK(rows[2].n_steps == 100);
    for (const auto& r : rows)
      CHECK(r.mean_rms_error < 0.05);
    CHECK(rows[2].mean_rms_error <= rows[0].mean_rms_error * 1.05);
  }

  TEST_CASE("runtime report")
  {
    const auto suite = generate_suite(small_suite());
    TableCache cache;
    const RuntimeReport rep = runtime_benchmark(suite, {}, cache, 1);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& r : rep.rows) {
      CHECK(r.dcm_s > 0.0);
      CHECK(r.speedup == doctest::Approx(r.oracle_s / r.dcm_s));
    }
    const auto j = nlohmann::json::parse(rep.to_json());
    REQUIRE(j.size() == 2);
    CHECK(j[0]["name"] == rep.rows[0].name);
  }
}
