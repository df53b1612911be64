#include "rcdcm/driverlib.hpp"
#include "rcdcm/error.hpp"
#include "rcdcm/netlist.hpp"
#include "rcdcm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rcdcm {

namespace {

struct Bracket
{
  std::size_t a, b;
  double w; // weight of curve b
};

Bracket bracket_of(const std::vector<double>& grid, double c)
{
  const double lo = grid.front(), hi = grid.back();
  if (!(c >= lo * (1.0 - 1e-12)) || !(c <= hi * (1.0 + 1e-12)))
    throw DomainError("capacitance " + std::to_string(c * 1e15) + " fF outside table range [" +
                      std::to_string(lo * 1e15) + ", " + std::to_string(hi * 1e15) + "] fF");
  if (c <= lo)
    return {0, 0, 0.0};
  if (c >= hi)
    return {grid.size() - 1, grid.size() - 1, 0.0};
  const auto it = std::upper_bound(grid.begin(), grid.end(), c);
  const std::size_t b = static_cast<std::size_t>(it - grid.begin());
  const std::size_t a = b - 1;
  const double w = (c - grid[a]) / (grid[b] - grid[a]);
  if (w == 0.0)
    return {a, a, 0.0};
  return {a, b, w};
}

double curve_at(const std::vector<double>& tg, const std::vector<double>& y, double t,
                bool hold_last, bool* clamped)
{
  if (t <= tg.front())
    return y.front();
  if (t > tg.back()) {
    if (clamped)
      *clamped = true;
    return hold_last ? y.back() : 0.0;
  }
  const auto it = std::upper_bound(tg.begin(), tg.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - tg.begin());
  if (k >= tg.size())
    return y.back();
  const double f = (t - tg[k - 1]) / (tg[k] - tg[k - 1]);
  return y[k - 1] + f * (y[k] - y[k - 1]);
}

nlohmann::json model_to_json(const DriverModel& m)
{
  nlohmann::json j;
  j["kind"] = m.kind();
  j["id"] = m.id;
  if (const auto* t = std::get_if<TheveninRamp>(&m.params)) {
    j["params"] = {{"r_drv", t->r_drv}};
  } else {
    const auto& p = std::get<MosLike>(m.params);
    j["params"] = {{"i_sat_up", p.i_sat_up}, {"i_sat_down", p.i_sat_down},
                   {"v_knee", p.v_knee},     {"vth", p.vth},
                   {"alpha", p.alpha},       {"c_couple", p.c_couple},
                   {"c_int", p.c_int},       {"tau_gate", p.tau_gate}};
  }
  return j;
}

DriverModel model_from_json(const nlohmann::json& j)
{
  DriverModel m;
  m.id = j.value("id", std::string());
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  if (kind == "thevenin-ramp") {
    m.params = TheveninRamp{p.at("r_drv").get<double>()};
  } else if (kind == "mos-like") {
    MosLike ml;
    ml.i_sat_up = p.at("i_sat_up").get<double>();
    ml.i_sat_down = p.at("i_sat_down").get<double>();
    ml.v_knee = p.at("v_knee").get<double>();
    ml.vth = p.at("vth").get<double>();
    ml.alpha = p.at("alpha").get<double>();
    ml.c_couple = p.at("c_couple").get<double>();
    ml.c_int = p.at("c_int").get<double>();
    ml.tau_gate = p.at("tau_gate").get<double>();
    m.params = ml;
  } else {
    throw ParseError("unknown driver kind '" + kind + "' in table");
  }
  return m;
}

} // namespace

void DriverCharTable::finalize()
{
  const std::size_t m = cap_grid.size();
  if (m == 0)
    throw DomainError("table has an empty capacitance grid");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(cap_grid[i] > 0.0) || !std::isfinite(cap_grid[i]))
      throw DomainError("table capacitances must be positive");
    if (i > 0 && !(cap_grid[i] > cap_grid[i - 1]))
      throw DomainError("table capacitance grid must be strictly ascending");
  }
  const std::size_t n = time_grid.size();
  if (n < 2 || time_grid.front() != 0.0)
    throw DomainError("table time grid must start at 0 and have at least 2 samples");
  for (std::size_t k = 1; k < n; ++k)
    if (!(time_grid[k] > time_grid[k - 1]))
      throw DomainError("table time grid must be strictly increasing");
  if (current.size() != m)
    throw DomainError("table current rows do not match the capacitance grid");
  for (const auto& row : current)
    if (row.size() != n)
      throw DomainError("table current row length does not match the time grid");
  if (!(vdd > 0.0))
    throw DomainError("table vdd must be positive");

  const bool rising = direction == Direction::rising;
  voltage.assign(m, std::vector<double>(n));
  monotone_start.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    auto& v = voltage[i];
    const auto& cur = current[i];
    v[0] = rising ? 0.0 : vdd;
    for (std::size_t k = 1; k < n; ++k)
      v[k] = v[k - 1] + 0.5 * (cur[k - 1] + cur[k]) * (time_grid[k] - time_grid[k - 1]) / cap_grid[i];
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (rising ? v[k] < v[best] : v[k] > v[best])
        best = k;
    monotone_start[i] = best;
  }
}

double DriverCharTable::voltage_of(double c, double t, bool* clamped) const
{
  const Bracket br = bracket_of(cap_grid, c);
  const double va = curve_at(time_grid, voltage[br.a], t, true, clamped);
  if (br.w == 0.0)
    return va;
  const double vb = curve_at(time_grid, voltage[br.b], t, true, clamped);
  return (1.0 - br.w) * va + br.w * vb;
}

double DriverCharTable::current_of(double c, double t, bool* clamped) const
{
  const Bracket br = bracket_of(cap_grid, c);
  const double ia = curve_at(time_grid, current[br.a], t, false, clamped);
  if (br.w == 0.0)
    return ia;
  const double ib = curve_at(time_grid, current[br.b], t, false, clamped);
  return (1.0 - br.w) * ia + br.w * ib;
}

PwlPoint DriverCharTable::initial_extreme(double c) const
{
  const Bracket br = bracket_of(cap_grid, c);
  const double s = direction == Direction::rising ? 1.0 : -1.0;
  auto blend = [&](std::size_t k) {
    return br.w == 0.0 ? voltage[br.a][k]
                       : (1.0 - br.w) * voltage[br.a][k] + br.w * voltage[br.b][k];
  };
  const std::size_t mono = std::max(monotone_start[br.a], monotone_start[br.b]);
  std::size_t start = 0;
  for (std::size_t k = 1; k <= mono; ++k)
    if (s * blend(k) < s * blend(start))
      start = k;
  return {time_grid[start], blend(start)};
}

double DriverCharTable::time_of_voltage(double c, double v) const
{
  const Bracket br = bracket_of(cap_grid, c);
  const double s = direction == Direction::rising ? 1.0 : -1.0;
  const auto& va = voltage[br.a];
  const auto& vb = voltage[br.b];
  auto blend = [&](std::size_t k) {
    return br.w == 0.0 ? s * va[k] : s * ((1.0 - br.w) * va[k] + br.w * vb[k]);
  };
  const double target = s * v;
  const std::size_t n = time_grid.size();
  const std::size_t mono = std::max(monotone_start[br.a], monotone_start[br.b]);

  std::size_t start = 0;
  for (std::size_t k = 1; k <= mono; ++k)
    if (blend(k) < blend(start))
      start = k;
  if (target <= blend(start))
    return time_grid[start];

  auto crossing = [&](std::size_t k) {
    const double b0 = blend(k - 1), b1 = blend(k);
    return time_grid[k - 1] + (target - b0) / (b1 - b0) * (time_grid[k] - time_grid[k - 1]);
  };
  for (std::size_t k = start + 1; k <= mono; ++k)
    if (blend(k) >= target)
      return crossing(k);

  if (blend(n - 1) < target)
    throw DomainError("voltage level " + std::to_string(v) + " V never reached on the " +
                      std::to_string(c * 1e15) + " fF curve");
  std::size_t lo = std::max(mono, start), hi = n - 1; // blend(lo) < target <= blend(hi)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (blend(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return crossing(hi);
}

double DriverCharTable::stored_charge(std::size_t curve) const
{
  const auto& cur = current.at(curve);
  double q = 0.0;
  for (std::size_t k = 1; k < time_grid.size(); ++k)
    q += 0.5 * (cur[k - 1] + cur[k]) * (time_grid[k] - time_grid[k - 1]);
  return q;
}

std::vector<double> default_cap_grid(double c_max)
{
  if (!(c_max > 0.0))
    throw DomainError("C_max must be positive");
  std::vector<double> g{0.01 * c_max, 0.025 * c_max};
  for (int k = 1; k <= 20; ++k)
    g.push_back(0.05 * k * c_max);
  g.back() = c_max;
  return g;
}

DriverCharTable characterize(const DriverModel& model, double vdd, double slew, Direction dir,
                             std::span<const double> cap_grid, double window, double dt)
{
  model.validate();
  if (!(vdd > 0.0))
    throw DomainError("vdd must be positive");
  if (cap_grid.empty())
    throw DomainError("empty capacitance grid");
  for (std::size_t i = 0; i < cap_grid.size(); ++i)
    if (!(cap_grid[i] > 0.0) || (i > 0 && !(cap_grid[i] > cap_grid[i - 1])))
      throw DomainError("capacitance grid must be positive and strictly ascending");
  if (!(window > 0.0) || !(dt > 0.0) || dt > window / 1000.0 * (1.0 + 1e-12))
    throw DomainError("characterization needs dt <= window/1000");

  const PwlWaveform input = model.input_ramp(vdd, slew, dir);
  auto run = [&](double c, double win) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", c);
    const MnaSystem sys = assemble_mna(parse_netlist(std::string("Cload out 0 ") + buf, "out"));
    return simulate_driver(sys, model, vdd, input, dt, win);
  };
  auto settled = [&](const TransientResult& r) {
    const double v = r.v_port.back();
    return dir == Direction::rising ? v >= 0.999 * vdd : v <= 0.001 * vdd;
  };

  double win = window;
  TransientResult largest = run(cap_grid.back(), win);
  while (!settled(largest)) {
    win *= 2.0;
    if (win > 100.0 * window * (1.0 + 1e-12))
      throw DomainError("driver '" + model.id + "' does not settle within 100x the window");
    largest = run(cap_grid.back(), win);
  }

  DriverCharTable table;
  table.driver = model.id;
  table.vdd = vdd;
  table.slew = slew;
  table.direction = dir;
  table.cap_grid.assign(cap_grid.begin(), cap_grid.end());
  table.time_grid = largest.t;
  table.model = model;
  table.dt = dt;
  table.window = win;
  for (std::size_t i = 0; i + 1 < cap_grid.size(); ++i)
    table.current.push_back(run(cap_grid[i], win).i_port);
  table.current.push_back(std::move(largest.i_port));
  table.finalize();
  return table;
}

std::string table_to_json(const DriverCharTable& table)
{
  nlohmann::json j;
  j["driver"] = table.driver;
  j["vdd"] = table.vdd;
  j["slew"] = table.slew;
  j["direction"] = to_string(table.direction);
  j["cap_grid"] = table.cap_grid;
  j["time_grid"] = table.time_grid;
  j["current"] = table.current;
  j["meta"] = {{"model", model_to_json(table.model)}, {"dt", table.dt}, {"window", table.window}};
  return j.dump();
}

DriverCharTable table_from_json(const std::string& text)
{
  DriverCharTable t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.driver = j.at("driver").get<std::string>();
    t.vdd = j.at("vdd").get<double>();
    t.slew = j.at("slew").get<double>();
    t.direction = direction_from_string(j.at("direction").get<std::string>());
    t.cap_grid = j.at("cap_grid").get<std::vector<double>>();
    t.time_grid = j.at("time_grid").get<std::vector<double>>();
    t.current = j.at("current").get<std::vector<std::vector<double>>>();
    const auto& meta = j.at("meta");
    t.model = model_from_json(meta.at("model"));
    t.dt = meta.at("dt").get<double>();
    t.window = meta.at("window").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("table JSON: ") + e.what());
  }
  t.finalize();
  return t;
}

void save_table(const DriverCharTable& table, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write table '" + path + "'");
  out << table_to_json(table) << '\n';
}

DriverCharTable load_table(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return table_from_json(ss.str());
}

std::vector<DriverCharTable> load_table_dir(const std::string& dir)
{
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw ParseError("table directory '" + dir + "' does not exist");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<DriverCharTable> out;
  for (const auto& f : files)
    out.push_back(load_table(f));
  return out;
}

TableSelection select_table(std::span<const DriverCharTable> libset, const std::string& driver,
                            double slew, Direction dir)
{
  std::vector<const DriverCharTable*> cands;
  for (const auto& t : libset)
    if (t.driver == driver && t.direction == dir)
      cands.push_back(&t);
  if (cands.empty())
    throw DomainError("no " + to_string(dir) + " table for driver '" + driver + "'");
  std::sort(cands.begin(), cands.end(),
            [](const DriverCharTable* a, const DriverCharTable* b) { return a->slew < b->slew; });

  TableSelection sel;
  for (const auto* t : cands)
    if (std::abs(t->slew - slew) <= 1e-9 * slew) {
      sel.table = *t;
      return sel;
    }
  if (slew < cands.front()->slew || slew > cands.back()->slew) {
    sel.table = slew < cands.front()->slew ? *cands.front() : *cands.back();
    sel.out_of_range = true;
    return sel;
  }
  std::size_t hi = 1;
  while (cands[hi]->slew < slew)
    ++hi;
  const DriverCharTable& a = *cands[hi - 1];
  const DriverCharTable& b = *cands[hi];
  if (a.cap_grid != b.cap_grid)
    throw DomainError("cannot blend tables with different capacitance grids");
  if (a.vdd != b.vdd)
    throw DomainError("cannot blend tables with different vdd");
  const double w = (slew - a.slew) / (b.slew - a.slew);

  DriverCharTable out = a;
  out.slew = slew;
  if (a.time_grid != b.time_grid) {
    out.dt = std::min(a.dt, b.dt);
    out.window = std::max(a.time_grid.back(), b.time_grid.back());
    const std::size_t n = static_cast<std::size_t>(std::ceil(out.window / out.dt - 1e-9));
    out.time_grid.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
      out.time_grid[k] = static_cast<double>(k) * out.dt;
  }
  for (std::size_t i = 0; i < out.cap_grid.size(); ++i) {
    std::vector<double> row(out.time_grid.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double t = out.time_grid[k];
      const double ia = a.time_grid == out.time_grid ? a.current[i][k]
                                                     : curve_at(a.time_grid, a.current[i], t, false, nullptr);
      const double ib = b.time_grid == out.time_grid ? b.current[i][k]
                                                     : curve_at(b.time_grid, b.current[i], t, false, nullptr);
      row[k] = (1.0 - w) * ia + w * ib;
    }
    out.current[i] = std::move(row);
  }
  out.finalize();
  sel.table = std::move(out);
  sel.blended = true;
  return sel;
}

DriverCharTable rising_view(const DriverCharTable& table)
{
  DriverCharTable out = table;
  if (table.direction == Direction::rising)
    return out;
  out.direction = Direction::rising;
  for (auto& row : out.current)
    for (auto& x : row)
      x = -x;
  out.finalize();
  return out;
}

} // namespace rcdcm
