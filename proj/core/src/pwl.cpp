#include "rcdcm/pwl.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rcdcm {

PwlWaveform::PwlWaveform(std::vector<PwlPoint> points)
{
  points_.reserve(points.size());
  for (const auto& p : points)
    append(p.t, p.v);
}

void PwlWaveform::append(double t, double v)
{
  if (!std::isfinite(t) || !std::isfinite(v))
    throw DomainError("PWL breakpoint must be finite");
  if (points_.empty() && t < 0.0)
    throw DomainError("PWL must start at t >= 0");
  if (!points_.empty() && !(t > points_.back().t))
    throw DomainError("PWL times must be strictly increasing (t=" + std::to_string(t) + ")");
  points_.push_back({t, v});
}

std::size_t PwlWaveform::segment_at(double t) const
{
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double x, const PwlPoint& p) { return x < p.t; });
  if (it == points_.begin())
    return npos;
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

double PwlWaveform::eval(double t) const
{
  if (points_.empty())
    return 0.0;
  std::size_t i = segment_at(t);
  if (i == npos)
    return points_.front().v;
  if (i + 1 >= points_.size())
    return points_.back().v;
  return points_[i].v + slope(i) * (t - points_[i].t);
}

double PwlWaveform::slope(std::size_t i) const
{
  return (points_[i + 1].v - points_[i].v) / (points_[i + 1].t - points_[i].t);
}

PwlWaveform PwlWaveform::scaled(double a) const
{
  PwlWaveform out;
  out.points_ = points_;
  for (auto& p : out.points_)
    p.v *= a;
  return out;
}

PwlWaveform PwlWaveform::shifted(double dt) const
{
  PwlWaveform out;
  for (const auto& p : points_)
    out.append(p.t + dt, p.v);
  return out;
}

PwlTransform laplace_of_pwl(const PwlWaveform& w)
{
  PwlTransform tr;
  if (w.empty())
    return tr;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    tr.segments.push_back({w[i].t, w[i + 1].t, w[i].v, w[i + 1].v, w.slope(i)});
  tr.hold_time = w.back().t;
  tr.hold_value = w.back().v;
  return tr;
}

std::complex<double> PwlTransform::eval(std::complex<double> s) const
{
  const std::complex<double> s2 = s * s;
  std::complex<double> sum = hold_value * std::exp(-s * hold_time) / s;
  for (const auto& seg : segments) {
    sum += (seg.k / s2 + seg.v_a / s) * std::exp(-s * seg.t_a);
    sum -= (seg.k / s2 + seg.v_b / s) * std::exp(-s * seg.t_b);
  }
  return sum;
}

std::complex<double> PwlTransform::eval_collapsed(std::complex<double> s) const
{
  const std::complex<double> s2 = s * s;
  if (segments.empty())
    return hold_value * std::exp(-s * hold_time) / s;
  std::complex<double> sum = segments.front().v_a * std::exp(-s * segments.front().t_a) / s;
  for (const auto& seg : segments)
    sum += seg.k / s2 * (std::exp(-s * seg.t_a) - std::exp(-s * seg.t_b));
  return sum;
}

} // namespace rcdcm
