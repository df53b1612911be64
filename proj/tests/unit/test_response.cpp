#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rcdcm/error.hpp"
#include "rcdcm/response.hpp"

using namespace rcdcm;

namespace {

ReducedAdmittance single_pole()
{
  ReducedAdmittance ya;
  ya.terms.push_back({cplx(-1e9, 0), cplx(1e-3, 0)});
  return ya;
}

PwlWaveform unit_ramp() { return PwlWaveform({{0.0, 0.0}, {1e-9, 1.0}}); }

double peak_of(const std::vector<double>& xs)
{
  double p = 0.0;
  for (double x : xs)
    p = std::max(p, std::abs(x));
  return p;
}

} // namespace

TEST_SUITE("response")
{
  TEST_CASE("PWL evaluation holds the end values")
  {
    const PwlWaveform w({{1e-12, 0.2}, {3e-12, 0.6}, {4e-12, 0.6}});
    CHECK(w.eval(0.0) == 0.2);
    CHECK(w.eval(2e-12) == doctest::Approx(0.4));
    CHECK(w.eval(1e-9) == 0.6);
    CHECK(w.slope(0) == doctest::Approx(0.2e12));
    CHECK(w.segment_at(0.5e-12) == PwlWaveform::npos);
    CHECK(w.segment_at(3e-12) == 1);
    CHECK_THROWS(PwlWaveform({{1.0, 0.0}, {1.0, 1.0}}));
    PwlWaveform grow = w;
    CHECK_THROWS(grow.append(4e-12, 1.0));
  }

  TEST_CASE("laplace_of_pwl coefficients")
  {
    const PwlTransform one = laplace_of_pwl(PwlWaveform({{0.0, 0.0}, {2e-9, 1.5}}));
    REQUIRE(one.segments.size() == 1);
    CHECK(one.segments[0].k == doctest::Approx(1.5 / 2e-9));
    CHECK(one.segments[0].v_a == 0.0);
    CHECK(one.segments[0].v_b == 1.5);
    CHECK(one.hold_value == 1.5);

    // Constant waveform: no slope, and with the hold it is a plain step.
    const PwlTransform flat = laplace_of_pwl(PwlWaveform({{0.0, 0.7}, {1e-9, 0.7}}));
    CHECK(flat.segments[0].k == 0.0);
    const cplx s(3e8, 2e9);
    CHECK(std::abs(flat.eval(s) - 0.7 / s) < 1e-12 * std::abs(0.7 / s));

    // Ramp transform k (1 - e^{-sT}) / s^2.
    const cplx expect = (1.5 / 2e-9) * (1.0 - std::exp(-s * 2e-9)) / (s * s);
    CHECK(std::abs(one.eval(s) - expect) < 1e-12 * std::abs(expect));
  }

  TEST_CASE("telescoped transform equals the segment sum")
  {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const PwlWaveform w = testsupport::random_pwl(rng, 2 + trial % 7, 1e-9, 1.0);
      const PwlTransform tr = laplace_of_pwl(w);
      for (int k = 0; k < 5; ++k) {
        const cplx s(1e9 * (1.5 + u(rng)), 1e10 * u(rng));
        const cplx a = tr.eval(s), b = tr.eval_collapsed(s);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1e-300));
      }
    }
  }

  TEST_CASE("single pole ramp at t = 1 ns")
  {
    const double i = eval_current(single_pole(), unit_ramp(), 1e-9);
    CHECK(i == doctest::Approx(1e-3 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(eval_current_expanded(single_pole(), unit_ramp(), 1e-9) ==
          doctest::Approx(i).epsilon(1e-12));
    ClosedFormResponse r(single_pole(), unit_ramp());
    CHECK(r.current(1e-9) == doctest::Approx(i).epsilon(1e-12));
    CHECK(testsupport::rk4_current(single_pole(), unit_ramp(), 1e-9) ==
          doctest::Approx(i).epsilon(1e-8));
  }

  TEST_CASE("zero excitation gives zero current")
  {
    std::mt19937_64 rng(1);
    const ReducedAdmittance ya = testsupport::random_admittance(rng, 5, 1e9, 1e12);
    const PwlWaveform zero({{0.0, 0.0}, {1e-10, 0.0}, {3e-10, 0.0}});
    for (double t : {0.0, 5e-11, 2e-10, 1e-9}) {
      CHECK(eval_current(ya, zero, t) == 0.0);
      CHECK(inverse_laplace_reference(ya, zero, t) == 0.0);
    }
  }

  TEST_CASE("random five-term admittance against both references")
  {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
      const ReducedAdmittance ya = testsupport::random_admittance(rng, 5, 1e10, 1e12);
      const PwlWaveform w = testsupport::random_pwl(rng, 8, 200e-12, 1.0);
      std::vector<double> ts;
      std::uniform_real_distribution<double> u(0.0, 300e-12);
      for (int k = 0; k < 50; ++k)
        ts.push_back(u(rng));
      std::sort(ts.begin(), ts.end());
      const double dt = 0.05 / ya.fastest_pole_magnitude();
      const auto conv = convolution_reference(ya, w, ts, dt);
      std::vector<double> closed;
      for (double t : ts)
        closed.push_back(eval_current(ya, w, t));
      const double peak = peak_of(closed);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(std::abs(closed[k] - conv[k]) <= 1e-3 * peak);
        CHECK(std::abs(closed[k] - testsupport::rk4_current(ya, w, ts[k])) <= 1e-6 * peak);
      }
    }
  }

  TEST_CASE("convolution reference properties")
  {
    const ReducedAdmittance ya = single_pole();
    // Step input: final value res * V.
    const PwlWaveform step({{0.0, 0.0}, {1e-15, 0.8}});
    const std::vector<double> late{20e-9};
    CHECK(convolution_reference(ya, step, late, 1e-12)[0] == doctest::Approx(0.8e-3).epsilon(1e-6));

    // Second-order quadrature: halving dt quarters the disagreement.
    const PwlWaveform w({{0.0, 0.0}, {0.3e-9, 0.5}, {0.5e-9, 0.2}, {1.2e-9, 1.0}});
    const std::vector<double> ts{0.4e-9, 0.85e-9, 1.55e-9};
    auto err = [&](double dt) {
      const auto c = convolution_reference(ya, w, ts, dt);
      double e = 0.0;
      for (std::size_t k = 0; k < ts.size(); ++k)
        e = std::max(e, std::abs(c[k] - eval_current(ya, w, ts[k])));
      return e;
    };
    const double ratio = err(5e-11) / err(2.5e-11);
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);

    CHECK_THROWS_AS(convolution_reference(ya, w, ts, 2e-10), DomainError);
  }

  TEST_CASE("Talbot inversion agrees on the single-pole ramp")
  {
    const double peak = 1e-3 * (1.0 - std::exp(-1.0));
    for (double t : {0.2e-9, 0.7e-9, 1e-9, 1.6e-9, 3e-9}) {
      const double ref = eval_current(single_pole(), unit_ramp(), t);
      CHECK(std::abs(inverse_laplace_reference(single_pole(), unit_ramp(), t) - ref) <=
            5e-3 * peak);
    }
  }

  TEST_CASE("linearity, time shift and causality")
  {
    std::mt19937_64 rng(77);
    const ReducedAdmittance ya = testsupport::random_admittance(rng, 4, 1e10, 1e12);
    const PwlWaveform w = testsupport::random_pwl(rng, 10, 150e-12, 1.0);
    const double shift = 37e-12;
    const PwlWaveform ws = w.shifted(shift), w2 = w.scaled(-2.5);
    double peak = 0.0;
    for (int k = 0; k <= 40; ++k)
      peak = std::max(peak, std::abs(eval_current(ya, w, k * 5e-12)));
    for (int k = 0; k <= 40; ++k) {
      const double t = k * 5e-12;
      const double i = eval_current(ya, w, t);
      CHECK(eval_current(ya, w2, t) == doctest::Approx(-2.5 * i).epsilon(1e-12).scale(peak));
      CHECK(std::abs(eval_current(ya, ws, t + shift) - i) <= 1e-12 * peak);
      CHECK(std::abs(eval_current_expanded(ya, w, t) - i) <= 1e-12 * peak);
    }
    CHECK(eval_current(ya, ws, 0.5 * shift) == 0.0);

    // Additivity over shared breakpoints.
    std::vector<PwlPoint> pa, pb, pc;
    for (const auto& p : w.points()) {
      const double x = std::sin(1e11 * p.t);
      pa.push_back(p);
      pb.push_back({p.t, x});
      pc.push_back({p.t, p.v + x});
    }
    for (double t : {20e-12, 90e-12, 400e-12}) {
      const double sum = eval_current(ya, PwlWaveform(pa), t) + eval_current(ya, PwlWaveform(pb), t);
      CHECK(std::abs(eval_current(ya, PwlWaveform(pc), t) - sum) <= 1e-12 * peak * 4);
    }
  }

  TEST_CASE("closed-form response appends, probes and integrates")
  {
    std::mt19937_64 rng(5);
    const ReducedAdmittance ya = testsupport::random_admittance(rng, 4, 1e10, 5e11);
    const PwlWaveform w = testsupport::random_pwl(rng, 12, 100e-12, 1.0);
    ClosedFormResponse r(ya, PwlWaveform({w[0], w[1]}));
    for (std::size_t k = 2; k < w.size(); ++k) {
      const auto pr = r.probe(w[k].t, w[k].v);
      r.append(w[k].t, w[k].v);
      const auto end = r.at_end();
      CHECK(pr.current == doctest::Approx(end.current).epsilon(1e-12));
      CHECK(pr.charge == doctest::Approx(end.charge).epsilon(1e-12));
    }
    double peak = 0.0;
    for (int k = 0; k <= 100; ++k)
      peak = std::max(peak, std::abs(eval_current(ya, w, k * 2e-12)));
    for (int k = 0; k <= 100; ++k) {
      const double t = k * 2e-12;
      CHECK(std::abs(r.current(t) - eval_current(ya, w, t)) <= 1e-12 * peak);
    }
    // Charge against a fine trapezoid of the current.
    const double t_end = 180e-12;
    const int n = 200000;
    double q = 0.0;
    for (int k = 0; k < n; ++k) {
      const double a = t_end * k / n, b = t_end * (k + 1) / n;
      q += 0.5 * (b - a) * (r.current(a) + r.current(b));
    }
    CHECK(r.charge(t_end) == doctest::Approx(q).epsilon(1e-6));
  }

  TEST_CASE("deep exponentials underflow cleanly")
  {
    ReducedAdmittance ya;
    ya.terms.push_back({cplx(-1e15, 0), cplx(-1e-3, 0)});
    const PwlWaveform w({{0.0, 0.0}, {1e-12, 1.0}});
    // Long after the ramp only the DC value res * V remains.
    const double i = eval_current(ya, w, 1e-6);
    CHECK(std::isfinite(i));
    CHECK(i == doctest::Approx(-1e-3).epsilon(1e-12));
  }

  TEST_CASE("waveform CSV")
  {
    std::ostringstream os;
    const std::vector<double> t{0.0, 1e-12}, v{0.0, 0.123456789012345678}, i{0.0, 1e-3};
    write_waveform_csv(os, t, v, i);
    std::istringstream is(os.str());
    std::string header, row1, row2;
    std::getline(is, header);
    std::getline(is, row1);
    std::getline(is, row2);
    CHECK(header == "t_s,v_V,i_A");
    const double v_back = std::stod(row2.substr(row2.find(',') + 1));
    CHECK(v_back == v[1]);
  }
}
