#pragma once

#include <string>
#include <variant>

#include "rcdcm/pwl.hpp"

namespace rcdcm {

enum class Direction { rising, falling };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

// Ideal ramp source (output polarity) behind a series resistance.
struct TheveninRamp
{
  double r_drv = 400.0;
};

// Inverting output stage with saturating pull-up/pull-down currents.
// The gate node follows the input through a first-order lag tau_gate and
// couples to the output through c_couple; c_int loads the output inside
// the cell. For overdrive o, g = clamp(o / (vdd - vth), 0, 1)^alpha and
//   I_up = i_sat_up   * clamp((vdd - v)/v_knee, -1, 1) * g(vdd - v_gate - vth)
//   I_dn = i_sat_down * clamp(v/v_knee, -1, 1)          * g(v_gate - vth)
struct MosLike
{
  double i_sat_up = 1.4e-3;
  double i_sat_down = 1.4e-3;
  double v_knee = 0.5;
  double vth = 0.35;
  double alpha = 1.3;
  double c_couple = 0.6e-15;
  double c_int = 1.0e-15;
  double tau_gate = 2e-12;
};

struct DriverModel
{
  std::string id;
  std::variant<TheveninRamp, MosLike> params;

  std::string kind() const; // "thevenin-ramp" or "mos-like"
  void validate() const;    // throws DomainError

  // Current delivered into the output node for gate (or source) voltage
  // vg and output voltage v; dI/dv through the optional pointer.
  double output_current(double vg, double v, double vdd, double* di_dv = nullptr) const;

  double coupling_capacitance() const;
  double internal_capacitance() const;
  double gate_time_constant() const;
  // Rough large-signal output resistance, used to classify nets.
  double effective_resistance(double vdd) const;

  // Input waveform that produces the requested output transition; the
  // ramp starts at t = 0 and lasts slew/0.8 (slew is 10-90%).
  PwlWaveform input_ramp(double vdd, double slew, Direction out) const;
};

DriverModel make_thevenin(const std::string& id, double r_drv);
DriverModel make_mos_like(const std::string& id, const MosLike& p = {});

// "thevenin-ramp[:r_drv=400]" or "mos-like[:i_sat_up=1.4e-3,c_couple=6e-16,...]".
DriverModel parse_driver_spec(const std::string& spec, const std::string& id = {});

} // namespace rcdcm
