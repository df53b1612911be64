#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "rcdcm/driverlib.hpp"
#include "rcdcm/mor.hpp"
#include "rcdcm/response.hpp"

namespace rcdcm {

// Where a step ends on the candidate curve.
enum class CrossingMode {
  incremental, // t_prev + (t_C(v_next) - t_C(v_prev))
  absolute     // t_C(v_next)
};

// What the candidate curve and the RC load must agree on over a step.
enum class MatchQuantity {
  charge,           // charge delivered over the step
  total_charge,     // charge delivered since t = 0, against C * v
  endpoint_current  // instantaneous current at the step end
};

struct DcmConfig
{
  int n_steps = 100;
  double tolerance = 0.01; // residual above this flags the step as unconverged
  int max_iterations = 0;  // bracketing probes per step; 0 = ceil(log2(grid)) + 2
  double v_start = 0.01;   // fraction of vdd
  double v_end = 0.99;
  CrossingMode crossing = CrossingMode::absolute;
  MatchQuantity match = MatchQuantity::charge;
  int refine_iterations = 40;

  void validate() const; // throws DomainError
};

struct DcmStep
{
  int step = 0;
  double t = 0.0;
  double v = 0.0;     // rising-view level
  double i_rc = 0.0;  // network current at t (rising view)
  double i_lib = 0.0; // library current of the matched curve at its crossing
  double c_step = 0.0;
  double residual = 0.0;
  bool exhaustive = false; // fell back to a full grid scan
  bool retimed = false;    // grid-edge curve, end time set by the network's charge
};

// Result of the stepped match. Levels, currents and the waveform are kept
// in the rising view; voltage()/current()/charge() map back when the table
// describes a falling transition.
struct DcmTrace
{
  double vdd = 0.0;
  Direction direction = Direction::rising;
  double y0 = 0.0; // Y(0) of the load, needed to map falling currents

  std::vector<DcmStep> steps;
  std::vector<PwlPoint> head; // library samples before the first level
  std::vector<double> head_current;
  std::vector<PwlPoint> tail; // library samples after the last level
  std::vector<double> tail_current;
  PwlWaveform waveform; // output voltage (rising view)
  std::optional<ClosedFormResponse> response;

  double c_head = 0.0; // capacitance of the stitched head curve
  PwlPoint head_extreme{0.0, 0.0}; // undershoot extreme the head ends on, if any
  double c_eff_first = 0.0;
  double c_eff_last = 0.0;
  double residual_max = 0.0;
  int unconverged_steps = 0;
  int exhaustive_steps = 0;
  int retimed_steps = 0;
  bool head_stitched = false;
  bool tail_stitched = false;

  double voltage(double t) const;
  double current(double t) const;
  double charge(double t) const;
  double end_time() const { return waveform.back().t; }
};

// Steps the output through n_steps-1 equally spaced levels from v_start to
// v_end, choosing per step the table capacitance whose curve agrees with the
// closed-form RC response. Under absolute crossing with charge matching the
// candidate's charge over a step is C times its own voltage gain since the
// previous step time. The head is either the candidate curve from t = 0 to
// the first level or, when the curves undershoot, the curve up to its
// extreme.
DcmTrace dcm_match(const DriverCharTable& table, const ReducedAdmittance& ya,
                   const DcmConfig& cfg = {});

// Replace the initial straight segment with the c_head library curve: up to
// the undershoot extreme when there is one, else shifted onto the first
// level.
void stitch_head(DcmTrace& trace, const DriverCharTable& table);
// Append the C_eff_last library curve from its last-level crossing on,
// shifted so the crossing lands on the final matched point.
void stitch_tail(DcmTrace& trace, const DriverCharTable& table);

// dcm_match followed by both stitches.
DcmTrace run_dcm(const DriverCharTable& table, const ReducedAdmittance& ya,
                 const DcmConfig& cfg = {});

// The single-capacitance comparator: the library curve at C_total.
struct BaselineWaveform
{
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> i;
};
BaselineWaveform baseline_ctotal(const DriverCharTable& table, double c_total);

// step,t_ps,v_V,i_mA,C_step_fF; head rows carry step 0 and c_head.
void write_trace_csv(std::ostream& os, const DcmTrace& trace);

} // namespace rcdcm
