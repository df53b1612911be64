#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rcdcm {

struct PwlPoint
{
  double t; // s
  double v; // V
};

// Piecewise-linear voltage. eval() holds the first value before the first
// breakpoint and the last value after the last one.
class PwlWaveform
{
public:
  PwlWaveform() = default;
  explicit PwlWaveform(std::vector<PwlPoint> points);

  // Appends a breakpoint; t must exceed the current end time.
  void append(double t, double v);

  std::span<const PwlPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const PwlPoint& operator[](std::size_t i) const { return points_[i]; }
  const PwlPoint& front() const { return points_.front(); }
  const PwlPoint& back() const { return points_.back(); }

  double eval(double t) const;
  // Slope of segment i (between points i and i+1).
  double slope(std::size_t i) const;
  // Index of the last breakpoint with time <= t, or npos when t precedes all.
  std::size_t segment_at(double t) const;

  PwlWaveform scaled(double a) const;
  PwlWaveform shifted(double dt) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  std::vector<PwlPoint> points_;
};

// One segment's contribution to V(s):
//   (k/s^2 + v_a/s) e^{-s t_a} - (k/s^2 + v_b/s) e^{-s t_b}
struct PwlSegmentTransform
{
  double t_a, t_b;
  double v_a, v_b;
  double k;
};

// V(s) of a waveform that is zero before its first breakpoint and holds its
// last value afterwards; the hold adds v_N e^{-s t_N} / s.
struct PwlTransform
{
  std::vector<PwlSegmentTransform> segments;
  double hold_time = 0.0;
  double hold_value = 0.0;

  // Sum over segments as written, without cancelling interior steps.
  std::complex<double> eval(std::complex<double> s) const;
  // Telescoped: v_1 step at t_1 plus slope changes only.
  std::complex<double> eval_collapsed(std::complex<double> s) const;
};

PwlTransform laplace_of_pwl(const PwlWaveform& w);

} // namespace rcdcm
