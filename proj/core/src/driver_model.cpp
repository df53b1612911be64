#include "rcdcm/driver_model.hpp"
#include "rcdcm/error.hpp"
#include "rcdcm/netlist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rcdcm {

std::string to_string(Direction d)
{
  return d == Direction::rising ? "rising" : "falling";
}

Direction direction_from_string(const std::string& s)
{
  if (s == "rising" || s == "rise")
    return Direction::rising;
  if (s == "falling" || s == "fall")
    return Direction::falling;
  throw ParseError("unknown transition direction '" + s + "'");
}

std::string DriverModel::kind() const
{
  return std::holds_alternative<TheveninRamp>(params) ? "thevenin-ramp" : "mos-like";
}

void DriverModel::validate() const
{
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw DomainError(std::string("driver parameter ") + what + " must be positive");
  };
  if (const auto* t = std::get_if<TheveninRamp>(&params)) {
    positive(t->r_drv, "r_drv");
    return;
  }
  const auto& m = std::get<MosLike>(params);
  positive(m.i_sat_up, "i_sat_up");
  positive(m.i_sat_down, "i_sat_down");
  positive(m.v_knee, "v_knee");
  positive(m.vth, "vth");
  positive(m.alpha, "alpha");
  positive(m.c_couple, "c_couple");
  positive(m.c_int, "c_int");
  positive(m.tau_gate, "tau_gate");
}

namespace {

// clamp(x, lo, hi) with the derivative of the clamped value
double clamp_d(double x, double lo, double hi, double& d)
{
  if (x <= lo) {
    d = 0.0;
    return lo;
  }
  if (x >= hi) {
    d = 0.0;
    return hi;
  }
  d = 1.0;
  return x;
}

double gate_factor(const MosLike& m, double overdrive, double vdd)
{
  double d;
  double x = clamp_d(overdrive / (vdd - m.vth), 0.0, 1.0, d);
  return x > 0.0 ? std::pow(x, m.alpha) : 0.0;
}

} // namespace

double DriverModel::output_current(double vg, double v, double vdd, double* di_dv) const
{
  if (const auto* t = std::get_if<TheveninRamp>(&params)) {
    if (di_dv)
      *di_dv = -1.0 / t->r_drv;
    return (vg - v) / t->r_drv;
  }
  const auto& m = std::get<MosLike>(params);
  const double gp = gate_factor(m, vdd - vg - m.vth, vdd);
  const double gn = gate_factor(m, vg - m.vth, vdd);
  double du, dd;
  const double su = clamp_d((vdd - v) / m.v_knee, -1.0, 1.0, du);
  const double sd = clamp_d(v / m.v_knee, -1.0, 1.0, dd);
  if (di_dv)
    *di_dv = -m.i_sat_up * gp * du / m.v_knee - m.i_sat_down * gn * dd / m.v_knee;
  return m.i_sat_up * su * gp - m.i_sat_down * sd * gn;
}

double DriverModel::coupling_capacitance() const
{
  const auto* m = std::get_if<MosLike>(&params);
  return m ? m->c_couple : 0.0;
}

double DriverModel::internal_capacitance() const
{
  const auto* m = std::get_if<MosLike>(&params);
  return m ? m->c_int : 0.0;
}

double DriverModel::gate_time_constant() const
{
  const auto* m = std::get_if<MosLike>(&params);
  return m ? m->tau_gate : 0.0;
}

double DriverModel::effective_resistance(double vdd) const
{
  (void)vdd;
  if (const auto* t = std::get_if<TheveninRamp>(&params))
    return t->r_drv;
  const auto& m = std::get<MosLike>(params);
  return m.v_knee / std::min(m.i_sat_up, m.i_sat_down);
}

PwlWaveform DriverModel::input_ramp(double vdd, double slew, Direction out) const
{
  if (!(slew > 0.0))
    throw DomainError("input slew must be positive");
  const double dur = slew / 0.8;
  bool input_rises = out == Direction::rising;
  if (std::holds_alternative<MosLike>(params))
    input_rises = !input_rises; // inverting stage
  PwlWaveform w;
  w.append(0.0, input_rises ? 0.0 : vdd);
  w.append(dur, input_rises ? vdd : 0.0);
  return w;
}

DriverModel make_thevenin(const std::string& id, double r_drv)
{
  DriverModel m{id, TheveninRamp{r_drv}};
  m.validate();
  return m;
}

DriverModel make_mos_like(const std::string& id, const MosLike& p)
{
  DriverModel m{id, p};
  m.validate();
  return m;
}

DriverModel parse_driver_spec(const std::string& spec, const std::string& id)
{
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  DriverModel model;
  model.id = id.empty() ? kind : id;
  if (kind == "thevenin-ramp" || kind == "thevenin")
    model.params = TheveninRamp{};
  else if (kind == "mos-like" || kind == "mos")
    model.params = MosLike{};
  else
    throw ParseError("unknown driver kind '" + kind + "'");

  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ParseError("driver parameter '" + item + "' is not key=value");
      const std::string key = item.substr(0, eq);
      const double val = parse_si_value(item.substr(eq + 1));
      if (auto* t = std::get_if<TheveninRamp>(&model.params)) {
        if (key == "r_drv")
          t->r_drv = val;
        else
          throw ParseError("unknown thevenin-ramp parameter '" + key + "'");
        continue;
      }
      auto& m = std::get<MosLike>(model.params);
      if (key == "i_sat_up")
        m.i_sat_up = val;
      else if (key == "i_sat_down")
        m.i_sat_down = val;
      else if (key == "v_knee")
        m.v_knee = val;
      else if (key == "vth")
        m.vth = val;
      else if (key == "alpha")
        m.alpha = val;
      else if (key == "c_couple")
        m.c_couple = val;
      else if (key == "c_int")
        m.c_int = val;
      else if (key == "tau_gate")
        m.tau_gate = val;
      else
        throw ParseError("unknown mos-like parameter '" + key + "'");
    }
  }
  model.validate();
  return model;
}

} // namespace rcdcm
