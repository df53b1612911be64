#pragma once

#include <functional>
#include <span>

#include "rcdcm/dcm.hpp"

namespace rcdcm {

struct CurrentMetrics
{
  double avg = 0.0;     // (1/T) int i
  double avg_abs = 0.0; // (1/T) int |i|
  double rms = 0.0;
  double peak = 0.0; // max |i|
};

// Over [0, window]. avg comes from the exact charge; |i| and i^2 are
// integrated by adaptive trapezoid with at least 8 panels per breakpoint
// interval.
CurrentMetrics compute_metrics(const std::function<double(double)>& current,
                               const std::function<double(double)>& charge,
                               std::span<const double> breakpoints, double window);

CurrentMetrics compute_metrics(const DcmTrace& trace, double window);

// Sampled waveform, trapezoid between samples; the last panel is cut at
// the window by linear interpolation.
CurrentMetrics compute_metrics(std::span<const double> t, std::span<const double> i,
                               double window);

struct MetricErrors
{
  double avg = 0.0;
  double rms = 0.0;
  double peak = 0.0;

  double worst() const;
};

// |m - ref| / |ref| per metric.
MetricErrors relative_errors(const CurrentMetrics& m, const CurrentMetrics& ref);

} // namespace rcdcm
