#pragma once

// Reference computations used only by the tests. Each works from the raw
// element list or from textbook closed forms, never through the engine's
// own assembly, reduction or response code.

#include <complex>
#include <random>
#include <string>
#include <vector>

#include "rcdcm/mor.hpp"
#include "rcdcm/netlist.hpp"
#include "rcdcm/pwl.hpp"

namespace testsupport {

using cplx = std::complex<double>;

// Driving-point admittance by a dense complex solve of the stamped network
// with the port held at 1 V. Needs every node resistively connected.
cplx dense_admittance(const rcdcm::RcNetwork& net, cplx s);

// Taylor coefficients of the same admittance about s = 0, by the
// recursion G x_k = -C x_{k-1} on the port-driven interior.
std::vector<double> dense_moments(const rcdcm::RcNetwork& net, int k);

// Port current of a pole-residue admittance driven by w, by classical RK4
// on the per-pole states x' = p x + v with steps aligned to breakpoints.
double rk4_current(const rcdcm::ReducedAdmittance& ya, const rcdcm::PwlWaveform& w, double t,
                   int steps_per_tau = 200);

// Ideal ramp 0 -> v_final over [0, t_rise] through R into C: capacitor
// voltage and the current into the capacitor.
double ramp_rc_voltage(double r, double c, double v_final, double t_rise, double t);
double ramp_rc_current(double r, double c, double v_final, double t_rise, double t);

// Uniform RC ladder with `segments` sections of r and c, port "n0".
rcdcm::RcNetwork uniform_ladder(int segments, double r, double c);

// Random single-port admittance with real poles in [p_lo, p_hi] (1/s,
// negative) and residues of either sign.
rcdcm::ReducedAdmittance random_admittance(std::mt19937_64& rng, int q, double p_lo, double p_hi);

// Random PWL starting at (0, 0) with `segments` segments inside [0, t_end].
rcdcm::PwlWaveform random_pwl(std::mt19937_64& rng, int segments, double t_end, double v_scale);

} // namespace testsupport
