#include "rcdcm/dcm.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

namespace rcdcm {

void DcmConfig::validate() const
{
  if (n_steps < 10)
    throw DomainError("DCM needs at least 10 steps");
  if (!(tolerance > 0.0 && tolerance < 0.2))
    throw DomainError("DCM tolerance must lie in (0, 0.2)");
  if (max_iterations < 0 || refine_iterations < 0)
    throw DomainError("DCM iteration limits must be nonnegative");
  if (!(v_start > 0.0 && v_start < v_end && v_end < 1.0))
    throw DomainError("DCM voltage span must satisfy 0 < v_start < v_end < 1");
}

double DcmTrace::voltage(double t) const
{
  const double v = waveform.empty() ? 0.0 : waveform.eval(t);
  return direction == Direction::rising ? v : vdd - v;
}

double DcmTrace::current(double t) const
{
  const double i = response ? response->current(t) : 0.0;
  return direction == Direction::rising ? i : y0 * vdd - i;
}

double DcmTrace::charge(double t) const
{
  const double q = response ? response->charge(t) : 0.0;
  return direction == Direction::rising ? q : y0 * vdd * t - q;
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Eval
{
  double f = inf; // > 0: the load looks larger than this capacitance
  double scale = 1.0;
  double t_end = 0.0;
  double i_rc = 0.0;
  double i_lib = 0.0;
  double charge = 0.0;
};

struct Choice
{
  double c = 0.0;
  Eval e;
  bool exhaustive = false;
  bool retimed = false;
};

using Objective = std::function<Eval(double)>;

double rel(const Eval& e)
{
  return std::isfinite(e.f) ? std::abs(e.f) / e.scale : inf;
}

// Sign bracket on the grid by bisection, checked for monotonicity, then
// Illinois regula falsi between the bracketing capacitances.
Choice search(const Objective& fn, const std::vector<double>& grid, int max_iter, int refine_iter,
              double prev_c)
{
  const std::size_t m = grid.size();
  std::vector<std::optional<Eval>> cache(m);
  auto at = [&](std::size_t k) -> const Eval& {
    if (!cache[k])
      cache[k] = fn(grid[k]);
    return *cache[k];
  };

  Choice out;
  if (at(0).f <= 0.0 || m == 1) {
    out.c = grid[0];
    out.e = at(0);
    return out;
  }
  if (at(m - 1).f > 0.0) {
    out.c = grid[m - 1];
    out.e = at(m - 1);
    return out;
  }

  std::size_t lo = 0, hi = m - 1;
  int iter = 0;
  while (hi - lo > 1) {
    if (++iter > max_iter) {
      out.exhaustive = true;
      break;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    if (at(mid).f > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // The bracket assumes f falls with C. Visited values that rise with C mean
  // the assumption failed at this step.
  if (!out.exhaustive) {
    double last = inf;
    for (std::size_t k = 0; k < m; ++k) {
      if (!cache[k])
        continue;
      if (cache[k]->f > last) {
        out.exhaustive = true;
        break;
      }
      last = cache[k]->f;
    }
  }
  if (out.exhaustive) {
    std::vector<std::size_t> changes;
    for (std::size_t k = 0; k + 1 < m; ++k)
      if (at(k).f > 0.0 && at(k + 1).f <= 0.0)
        changes.push_back(k);
    if (changes.empty()) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < m; ++k)
        if (rel(at(k)) < rel(at(best)))
          best = k;
      out.c = grid[best];
      out.e = at(best);
      return out;
    }
    std::size_t pick = changes.front();
    if (prev_c > 0.0)
      for (std::size_t k : changes)
        if (std::abs(grid[k] - prev_c) < std::abs(grid[pick] - prev_c))
          pick = k;
    lo = pick;
    hi = pick + 1;
  }

  double a = grid[lo], b = grid[hi];
  Eval ea = at(lo), eb = at(hi);
  out.c = rel(ea) < rel(eb) ? a : b;
  out.e = rel(ea) < rel(eb) ? ea : eb;
  int side = 0;
  const double width_tol = 1e-12 * grid.back();
  for (int r = 0; r < refine_iter && rel(out.e) > 1e-12 && (b - a) > width_tol; ++r) {
    double c;
    if (std::isfinite(ea.f) && std::isfinite(eb.f) && ea.f != eb.f)
      c = b - eb.f * (b - a) / (eb.f - ea.f);
    else
      c = 0.5 * (a + b);
    if (!(c > a && c < b))
      c = 0.5 * (a + b);
    const Eval ec = fn(c);
    if (rel(ec) < rel(out.e)) {
      out.c = c;
      out.e = ec;
    }
    if (ec.f > 0.0) {
      a = c;
      ea = ec;
      if (side == -1)
        eb.f *= 0.5;
      side = -1;
    } else {
      b = c;
      eb = ec;
      if (side == 1)
        ea.f *= 0.5;
      side = 1;
    }
  }
  return out;
}

// Step end time at which the network's charge gain from the last point
// equals the trapezoid of i_start and the curve's current at level v.
std::optional<Eval> retime(const ClosedFormResponse& work, double c, double v, double i_start,
                           const DriverCharTable& tab)
{
  const double i_lib = tab.current_of(c, tab.time_of_voltage(c, v));
  const double i_mean = 0.5 * (i_start + i_lib);
  if (!(i_mean > 0.0))
    return std::nullopt;
  const double t_prev = work.waveform().back().t;
  const double q_prev = work.at_end().charge;
  auto g = [&](double dt) {
    return work.probe(t_prev + dt, v).charge - q_prev - i_mean * dt;
  };
  double hi = std::max(tab.time_of_voltage(c, v) - t_prev, 1e-3 * (tab.time_grid[1] - tab.time_grid[0]));
  double lo = hi;
  int guard = 0;
  while (g(hi) > 0.0) {
    if (++guard > 80)
      return std::nullopt;
    hi *= 2.0;
  }
  while (g(lo) <= 0.0) {
    lo *= 0.5;
    if (++guard > 160 || !(t_prev + lo > t_prev))
      return std::nullopt;
  }
  for (int k = 0; k < 100 && hi - lo > 1e-12 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  Eval e;
  e.t_end = t_prev + hi;
  const auto pr = work.probe(e.t_end, v);
  e.i_rc = pr.current;
  e.i_lib = i_lib;
  e.charge = pr.charge;
  e.f = pr.charge - q_prev - i_mean * hi;
  e.scale = std::max(i_mean * hi, 1e-300);
  return e;
}

PwlWaveform head_curve(const DriverCharTable& tab, double c, double t_end, double v_end)
{
  PwlWaveform w;
  const double guard = 1e-6 * (tab.time_grid[1] - tab.time_grid[0]);
  for (double t : tab.time_grid) {
    if (t >= t_end - guard)
      break;
    w.append(t, tab.voltage_of(c, t));
  }
  w.append(t_end, v_end);
  return w;
}

} // namespace

DcmTrace dcm_match(const DriverCharTable& table, const ReducedAdmittance& ya, const DcmConfig& cfg)
{
  cfg.validate();
  const DriverCharTable tab = rising_view(table);
  const double vdd = tab.vdd;
  const auto& grid = tab.cap_grid;

  const double c_load = reduced_moments(ya, 2)[1];
  if (c_load > tab.c_max() * (1.0 + 1e-3))
    throw DomainError("net capacitance " + std::to_string(c_load * 1e15) +
                      " fF exceeds the table's C_max " + std::to_string(tab.c_max() * 1e15) +
                      " fF");

  const int levels = cfg.n_steps - 1;
  std::vector<double> lvl(levels);
  for (int i = 0; i < levels; ++i)
    lvl[i] = vdd * (cfg.v_start + (cfg.v_end - cfg.v_start) * i / (levels - 1));

  const int max_iter = cfg.max_iterations > 0
                         ? cfg.max_iterations
                         : static_cast<int>(std::ceil(std::log2(static_cast<double>(grid.size())))) + 2;

  DcmTrace trace;
  trace.vdd = vdd;
  trace.direction = table.direction;
  trace.y0 = ya.dc_value();

  double peak = 0.0;
  auto commit = [&](int step, double v, const Choice& c) {
    DcmStep s;
    s.step = step;
    s.t = c.e.t_end;
    s.v = v;
    s.i_rc = c.e.i_rc;
    s.i_lib = c.e.i_lib;
    s.c_step = c.c;
    s.residual = rel(c.e);
    s.exhaustive = c.exhaustive;
    s.retimed = c.retimed;
    trace.steps.push_back(s);
    trace.residual_max = std::max(trace.residual_max, s.residual);
    if (s.residual > cfg.tolerance)
      ++trace.unconverged_steps;
    if (s.exhaustive)
      ++trace.exhaustive_steps;
    if (s.retimed)
      ++trace.retimed_steps;
    peak = std::max(peak, std::abs(s.i_lib));
  };

  // Head. With an initial undershoot the charge balance at the first level
  // has no root, so the head capacitance is matched on the undershoot and
  // the first level becomes an ordinary step from the extreme. Without one,
  // the first level is anchored on the candidate curve's own samples from
  // t = 0.
  const double v0 = lvl[0];
  const bool charge_match = cfg.match != MatchQuantity::endpoint_current;
  const PwlPoint ex_small = tab.initial_extreme(grid.front());
  const bool undershoot = charge_match && ex_small.t > 0.0 && ex_small.v < -1e-6 * vdd;

  std::optional<ClosedFormResponse> work;
  double v_prev = 0.0, i_start = 0.0;
  int first_level = 0;
  if (undershoot) {
    auto head = [&](double c) {
      Eval e;
      const PwlPoint ex = tab.initial_extreme(c);
      if (!(ex.t > 0.0 && ex.v < 0.0)) {
        // no excursion on this curve: far larger than the load's
        e.f = -1.0;
        return e;
      }
      // Past its extreme the pure capacitor's charge recovers at once,
      // while the net keeps drawing charge back until its current changes
      // sign; match the two charge minima.
      const double t_v0 = tab.time_of_voltage(c, v0);
      const ClosedFormResponse r(ya, head_curve(tab, c, t_v0, v0));
      double q_min = 0.0;
      for (double t : tab.time_grid) {
        if (t > t_v0)
          break;
        q_min = std::min(q_min, r.charge(t));
      }
      e.t_end = ex.t;
      e.i_lib = tab.current_of(c, ex.t);
      e.i_rc = r.current(ex.t);
      e.charge = q_min;
      e.f = c * ex.v - q_min;
      e.scale = std::max(-c * ex.v, std::abs(q_min));
      return e;
    };
    const Choice ch = search(head, grid, max_iter, cfg.refine_iterations, 0.0);
    const PwlPoint ex = tab.initial_extreme(ch.c);
    trace.c_head = ch.c;
    trace.head_extreme = ex;
    work.emplace(ya, head_curve(tab, ch.c, ex.t, ex.v));
    v_prev = ex.v;
    i_start = tab.current_of(ch.c, ex.t);
  } else {
    auto first = [&](double c) {
      Eval e;
      e.t_end = tab.time_of_voltage(c, v0);
      const ClosedFormResponse r(ya, head_curve(tab, c, e.t_end, v0));
      const auto end = r.at_end();
      e.i_rc = end.current;
      e.i_lib = tab.current_of(c, e.t_end);
      e.charge = end.charge;
      if (charge_match) {
        e.f = end.charge - c * v0;
        e.scale = std::max(c * v0, std::abs(end.charge));
      } else {
        e.f = e.i_rc - e.i_lib;
        e.scale = std::max(std::abs(e.i_lib), 1e-30);
      }
      return e;
    };
    const Choice ch = search(first, grid, max_iter, cfg.refine_iterations, 0.0);
    work.emplace(ya, head_curve(tab, ch.c, ch.e.t_end, v0));
    commit(1, v0, ch);
    trace.c_head = ch.c;
    v_prev = v0;
    i_start = ch.e.i_lib;
    first_level = 1;
  }

  for (int i = first_level; i < levels; ++i) {
    const double v = lvl[i];
    const double t_prev = work->waveform().back().t;
    const double q_prev = work->at_end().charge;

    auto objective = [&](double c, CrossingMode mode) {
      Eval e;
      const double t_c = tab.time_of_voltage(c, v);
      if (mode == CrossingMode::incremental) {
        const double dt = t_c - tab.time_of_voltage(c, v_prev);
        if (!(dt > 0.0))
          return e;
        e.t_end = t_prev + dt;
      } else {
        if (!(t_c > t_prev * (1.0 + 1e-12)))
          return e;
        e.t_end = t_c;
      }
      const auto pr = work->probe(e.t_end, v);
      const double dq = pr.charge - q_prev;
      e.i_rc = pr.current;
      e.i_lib = tab.current_of(c, t_c);
      e.charge = pr.charge;
      if (cfg.match == MatchQuantity::total_charge) {
        e.f = pr.charge - c * v;
        e.scale = std::max({c * std::abs(v), std::abs(pr.charge), 1e-300});
      } else if (cfg.match == MatchQuantity::charge) {
        const double lib = mode == CrossingMode::incremental
                             ? c * (v - v_prev)
                             : c * (v - tab.voltage_of(c, t_prev));
        e.f = dq - lib;
        e.scale = std::max({std::abs(lib), std::abs(dq), 1e-300});
      } else {
        e.f = e.i_rc - e.i_lib;
        e.scale = std::max({std::abs(e.i_lib), peak, 1e-300});
      }
      return e;
    };
    const double prev_c = trace.steps.empty() ? trace.c_head : trace.steps.back().c_step;
    Choice c = search([&](double x) { return objective(x, cfg.crossing); }, grid, max_iter,
                      cfg.refine_iterations, prev_c);
    // Clamped at the grid edge with a charge mismatch: the load needs a
    // curve outside the table. Keep the edge curve's current at this level
    // and let the network's charge fix when the level is reached.
    const bool at_edge = c.c == grid.front() || c.c == grid.back();
    if (at_edge && cfg.crossing == CrossingMode::absolute && cfg.match == MatchQuantity::charge &&
        rel(c.e) > cfg.tolerance) {
      if (const auto e = retime(*work, c.c, v, i_start, tab)) {
        c.e = *e;
        c.retimed = true;
      }
    }
    if (!std::isfinite(c.e.f)) {
      // No candidate crosses after t_prev on its own time axis; take the
      // step with incremental timing at the chosen capacitance.
      const Eval e = objective(c.c, CrossingMode::incremental);
      if (!std::isfinite(e.f))
        throw DomainError("voltage level " + std::to_string(v) + " V cannot be reached");
      c.e = e;
    }
    work->append(c.e.t_end, v);
    commit(i + 1, v, c);
    v_prev = v;
    i_start = c.e.i_lib;
  }

  trace.c_eff_first = trace.steps.front().c_step;
  trace.c_eff_last = trace.steps.back().c_step;
  trace.waveform.append(0.0, 0.0);
  if (undershoot)
    trace.waveform.append(trace.head_extreme.t, trace.head_extreme.v);
  for (const auto& s : trace.steps)
    trace.waveform.append(s.t, s.v);
  trace.response.emplace(ya, trace.waveform);
  return trace;
}

void stitch_head(DcmTrace& trace, const DriverCharTable& table)
{
  if (trace.head_stitched || trace.steps.empty())
    return;
  const DriverCharTable tab = rising_view(table);
  const double c = trace.c_head;
  const bool at_extreme = trace.head_extreme.t > 0.0;
  const double t0 = at_extreme ? trace.head_extreme.t : trace.steps.front().t;
  const double shift =
    at_extreme ? 0.0 : t0 - tab.time_of_voltage(c, trace.steps.front().v);

  PwlWaveform w;
  trace.head.clear();
  trace.head_current.clear();
  const double guard = 1e-6 * (tab.time_grid[1] - tab.time_grid[0]);
  for (double t : tab.time_grid) {
    const double ts = t + shift;
    if (ts >= t0 - guard)
      break;
    if (ts < 0.0)
      continue;
    const double v = tab.voltage_of(c, t);
    w.append(ts, v);
    trace.head.push_back({ts, v});
    trace.head_current.push_back(tab.current_of(c, t));
  }
  for (const auto& p : trace.waveform.points())
    if (p.t >= t0)
      w.append(p.t, p.v);
  trace.waveform = std::move(w);
  ReducedAdmittance ya = trace.response->admittance(); // emplace destroys the old response first
  trace.response.emplace(std::move(ya), trace.waveform);
  trace.head_stitched = true;
}

void stitch_tail(DcmTrace& trace, const DriverCharTable& table)
{
  if (trace.tail_stitched || trace.steps.empty())
    return;
  const DriverCharTable tab = rising_view(table);
  const double c = trace.c_eff_last;
  const double t_last = trace.steps.back().t;
  const double v_last = trace.steps.back().v;
  const double t_c = tab.time_of_voltage(c, v_last);
  const double shift = t_last - t_c;

  PwlWaveform w;
  for (const auto& p : trace.waveform.points())
    if (p.t <= t_last)
      w.append(p.t, p.v);
  trace.tail.clear();
  trace.tail_current.clear();
  const double guard = 1e-6 * (tab.time_grid[1] - tab.time_grid[0]);
  for (double t : tab.time_grid) {
    if (t <= t_c + guard)
      continue;
    const double v = tab.voltage_of(c, t);
    w.append(t + shift, v);
    trace.tail.push_back({t + shift, v});
    trace.tail_current.push_back(tab.current_of(c, t));
  }
  trace.waveform = std::move(w);
  ReducedAdmittance ya = trace.response->admittance();
  trace.response.emplace(std::move(ya), trace.waveform);
  trace.tail_stitched = true;
}

DcmTrace run_dcm(const DriverCharTable& table, const ReducedAdmittance& ya, const DcmConfig& cfg)
{
  DcmTrace trace = dcm_match(table, ya, cfg);
  stitch_head(trace, table);
  stitch_tail(trace, table);
  return trace;
}

BaselineWaveform baseline_ctotal(const DriverCharTable& table, double c_total)
{
  if (c_total > table.c_max() * (1.0 + 1e-12))
    throw DomainError("C_total exceeds the table's C_max");
  BaselineWaveform b;
  b.t = table.time_grid;
  b.v.reserve(b.t.size());
  b.i.reserve(b.t.size());
  for (double t : b.t) {
    b.v.push_back(table.voltage_of(c_total, t));
    b.i.push_back(table.current_of(c_total, t));
  }
  return b;
}

void write_trace_csv(std::ostream& os, const DcmTrace& trace)
{
  const bool rising = trace.direction == Direction::rising;
  auto map_v = [&](double v) { return rising ? v : trace.vdd - v; };
  auto map_i = [&](double i) { return rising ? i : trace.y0 * trace.vdd - i; };
  char buf[160];
  auto row = [&](int step, double t, double v, double i, double c) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g\n", step, t * 1e12, map_v(v),
                  map_i(i) * 1e3, c * 1e15);
    os << buf;
  };
  os << "step,t_ps,v_V,i_mA,C_step_fF\n";
  if (!trace.head.empty()) {
    std::size_t extreme = 0;
    for (std::size_t k = 1; k < trace.head.size(); ++k)
      if (trace.head[k].v < trace.head[extreme].v)
        extreme = k;
    const auto& r = *trace.response;
    row(0, trace.head.front().t, trace.head.front().v, r.current(trace.head.front().t),
        trace.c_head);
    if (extreme != 0 && trace.head[extreme].v < 0.0)
      row(0, trace.head[extreme].t, trace.head[extreme].v, r.current(trace.head[extreme].t),
          trace.c_head);
  }
  for (const auto& s : trace.steps)
    row(s.step, s.t, s.v, trace.response ? trace.response->current(s.t) : s.i_rc, s.c_step);
}

} // namespace rcdcm
