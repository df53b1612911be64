#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "rcdcm/mor.hpp"
#include "rcdcm/pwl.hpp"

namespace rcdcm {

// Network current for a PWL port voltage, evaluated from the pole-residue
// admittance without time stepping. The network is at rest before the
// first breakpoint and the waveform holds its last value afterwards.
//
// Each term keeps x_j(t) = int e^{p_j (t - tau)} v(tau) dtau, so that
//   i(t) = direct v(t) - sum res_j p_j x_j(t)
//   Q(t) = (direct + sum res_j) int v - sum res_j x_j(t).
// States are stored at every breakpoint, making append O(q) and any
// evaluation O(q + log N).
class ClosedFormResponse
{
public:
  ClosedFormResponse(ReducedAdmittance ya, PwlWaveform w);

  void append(double t, double v);

  double current(double t) const;
  double charge(double t) const; // int_0^t i
  double voltage(double t) const { return wave_.eval(t); }

  struct Probe
  {
    double current;
    double charge;
  };
  // Current and charge at t_end if (t_end, v_end) were appended; no mutation.
  Probe probe(double t_end, double v_end) const;
  Probe at_end() const;

  const PwlWaveform& waveform() const { return wave_; }
  const ReducedAdmittance& admittance() const { return ya_; }

private:
  struct Propagated
  {
    double current;
    double charge;
  };
  Propagated propagate(std::size_t b, double h, double k) const;

  ReducedAdmittance ya_;
  PwlWaveform wave_;
  double dc_ = 0.0;
  std::vector<cplx> state_; // q values per breakpoint
  std::vector<double> vint_; // int v up to each breakpoint
};

// The same response as a double sum over (term, segment), telescoped form:
// only the first value and the slope changes contribute.
double eval_current(const ReducedAdmittance& ya, const PwlWaveform& w, double t);
// Non-telescoped form: every segment contributes its own step and ramp
// pairs, plus the final hold.
double eval_current_expanded(const ReducedAdmittance& ya, const PwlWaveform& w, double t);

// Trapezoidal quadrature of i = direct v - sum res p int e^{p(t-tau)} v dtau
// on a uniform grid of step dt anchored at the first breakpoint.
// t_grid must be nondecreasing. Throws DomainError if dt > 0.1/|p|max.
std::vector<double> convolution_reference(const ReducedAdmittance& ya, const PwlWaveform& w,
                                          std::span<const double> t_grid, double dt);

// Fixed-Talbot numerical inversion of Y(s) V(s), one contour per breakpoint.
double inverse_laplace_reference(const ReducedAdmittance& ya, const PwlWaveform& w, double t,
                                 int contour_points = 16);

// Header t_s,v_V,i_A; full double precision.
void write_waveform_csv(std::ostream& os, std::span<const double> t, std::span<const double> v,
                        std::span<const double> i);

} // namespace rcdcm
