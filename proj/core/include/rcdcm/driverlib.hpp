#pragma once

#include <span>
#include <string>
#include <vector>

#include "rcdcm/driver_model.hpp"

namespace rcdcm {

// Current into a fixed capacitor versus time, for a grid of capacitors, at
// one driver / supply / input slew / output direction. Voltage curves are
// derived by integrating the stored current (trapezoid) and dividing by C.
struct DriverCharTable
{
  std::string driver;
  double vdd = 0.0;
  double slew = 0.0;
  Direction direction = Direction::rising;
  std::vector<double> cap_grid;  // ascending, F
  std::vector<double> time_grid; // shared, starts at 0, s
  std::vector<std::vector<double>> current; // [cap][time], A into the load
  DriverModel model;
  double dt = 0.0;
  double window = 0.0;

  // Derived by finalize().
  std::vector<std::vector<double>> voltage;
  std::vector<std::size_t> monotone_start; // per curve: first index of the extreme excursion

  // Validates shapes and builds the derived voltage curves. Throws.
  void finalize();

  double c_min() const { return cap_grid.front(); }
  double c_max() const { return cap_grid.back(); }

  // Linear in t on each curve, linear in C between bracketing curves.
  // Beyond the window voltage holds its final value and current is 0; the
  // optional flag reports that clamp. C outside the grid throws DomainError.
  double voltage_of(double c, double t, bool* clamped = nullptr) const;
  double current_of(double c, double t, bool* clamped = nullptr) const;

  // First time after the initial over/undershoot at which the (interpolated)
  // curve reaches v. Levels below that excursion return its time; levels
  // never reached throw DomainError.
  double time_of_voltage(double c, double v) const;

  // Time and voltage of the initial over/undershoot extreme of the
  // interpolated curve (t = 0 and the start level when there is none).
  PwlPoint initial_extreme(double c) const;

  // Trapezoid integral of the stored current over the whole window.
  double stored_charge(std::size_t curve) const;
};

// 1%, 2.5%, then 5%..100% of c_max in 5% steps (22 points).
std::vector<double> default_cap_grid(double c_max);

// Simulates the driver into each capacitor of the grid. The window doubles
// (up to 100x) until the largest load settles to 99.9% of the swing.
DriverCharTable characterize(const DriverModel& model, double vdd, double slew, Direction dir,
                             std::span<const double> cap_grid, double window, double dt);

std::string table_to_json(const DriverCharTable& table);
DriverCharTable table_from_json(const std::string& text);
void save_table(const DriverCharTable& table, const std::string& path);
DriverCharTable load_table(const std::string& path);
// Loads every *.json table in a directory.
std::vector<DriverCharTable> load_table_dir(const std::string& dir);

struct TableSelection
{
  DriverCharTable table;
  bool out_of_range = false; // slew outside the characterized span
  bool blended = false;
};

// Exact slew match, else per-sample linear blend of the bracketing tables,
// else the nearest table with out_of_range set.
TableSelection select_table(std::span<const DriverCharTable> libset, const std::string& driver,
                            double slew, Direction dir);

// A falling table re-expressed as rising: v' = vdd - v, i' = -i.
DriverCharTable rising_view(const DriverCharTable& table);

} // namespace rcdcm
