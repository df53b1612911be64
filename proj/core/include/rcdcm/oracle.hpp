#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rcdcm/driver_model.hpp"
#include "rcdcm/netlist.hpp"
#include "rcdcm/pwl.hpp"

namespace rcdcm {

struct TransientResult
{
  std::vector<double> t; // uniform, t[0] = 0
  std::vector<double> v_port;
  std::vector<double> i_port; // into the network
  std::vector<double> energy; // 1/2 v^T C v of the network
  // Filled only when requested; indexed by merged node (see node_class).
  std::vector<Eigen::VectorXd> node_v;
  std::vector<int> node_class; // original MnaSystem node -> merged index
  double dt = 0.0;
  std::size_t steps = 0;
  double max_residual = 0.0; // worst driver Newton residual, amps
};

struct OracleOptions
{
  bool record_nodes = false;
  // Enforce dt <= min(R) * min(C) / 10 literally. Off by default: on
  // finely segmented lines that product sits near 1e-17 s, while the
  // A-stable trapezoidal rule only needs to resolve the driving-point
  // dynamics (checked by step-halving in the tests).
  bool strict_step_bound = false;
};

// Fixed-step trapezoidal simulation with the port held at source(t).
// Epsilon repair resistors are contracted (their nodes merged) so the
// integrator never sees the sub-femtosecond time constants they add.
TransientResult simulate_pwl(const MnaSystem& sys, const PwlWaveform& source, double dt,
                             double window, const OracleOptions& opts = {});

// Same network driven by a behavioral driver through its input waveform.
// The port voltage is free; each step solves one scalar nonlinear
// equation in the port current to <= 1e-12 A.
TransientResult simulate_driver(const MnaSystem& sys, const DriverModel& model, double vdd,
                                const PwlWaveform& input, double dt, double window,
                                const OracleOptions& opts = {});

// min(R_i) * min(C_j) over the physical elements.
double min_time_constant(const MnaSystem& sys);
// Largest dt accepted under the given options.
double max_oracle_step(const MnaSystem& sys, const OracleOptions& opts = {});

} // namespace rcdcm
