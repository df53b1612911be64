#include "rcdcm/metrics.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rcdcm {

namespace {

struct Sums
{
  double abs = 0.0;
  double sq = 0.0;
  double peak = 0.0;
};

// Trapezoid on [a, b] for |i| and i^2, bisected until both panel sums agree
// with their halves to a tolerance relative to the current scale.
void adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
              double scale, int depth, Sums& s)
{
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  s.peak = std::max(s.peak, std::abs(fm));
  const double h = b - a;
  const double abs1 = 0.5 * h * (std::abs(fa) + std::abs(fb));
  const double abs2 = 0.25 * h * (std::abs(fa) + 2.0 * std::abs(fm) + std::abs(fb));
  const double sq1 = 0.5 * h * (fa * fa + fb * fb);
  const double sq2 = 0.25 * h * (fa * fa + 2.0 * fm * fm + fb * fb);
  const bool ok = std::abs(abs2 - abs1) <= 1e-9 * scale * h &&
                  std::abs(sq2 - sq1) <= 1e-9 * scale * scale * h;
  if (ok || depth >= 12) {
    s.abs += abs2;
    s.sq += sq2;
    return;
  }
  adaptive(f, a, fa, m, fm, scale, depth + 1, s);
  adaptive(f, m, fm, b, fb, scale, depth + 1, s);
}

} // namespace

CurrentMetrics compute_metrics(const std::function<double(double)>& current,
                               const std::function<double(double)>& charge,
                               std::span<const double> breakpoints, double window)
{
  if (!(window > 0.0))
    throw DomainError("metrics window must be positive");
  std::vector<double> knots{0.0};
  for (double t : breakpoints)
    if (t > 0.0 && t < window)
      knots.push_back(t);
  knots.push_back(window);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // Panels of at least 8 per knot interval; a first pass fixes the scale.
  constexpr int panels = 8;
  std::vector<double> ts, fs;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k)
    for (int j = 0; j < panels; ++j) {
      const double t = knots[k] + (knots[k + 1] - knots[k]) * j / panels;
      ts.push_back(t);
      fs.push_back(current(t));
    }
  ts.push_back(window);
  fs.push_back(current(window));

  Sums s;
  for (double f : fs)
    s.peak = std::max(s.peak, std::abs(f));
  const double scale = std::max(s.peak, 1e-300);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k)
    adaptive(current, ts[k], fs[k], ts[k + 1], fs[k + 1], scale, 0, s);

  CurrentMetrics m;
  m.avg = charge(window) / window;
  m.avg_abs = s.abs / window;
  m.rms = std::sqrt(s.sq / window);
  m.peak = s.peak;
  return m;
}

CurrentMetrics compute_metrics(const DcmTrace& trace, double window)
{
  std::vector<double> bp;
  bp.reserve(trace.waveform.size());
  for (const auto& p : trace.waveform.points())
    bp.push_back(p.t);
  return compute_metrics([&](double t) { return trace.current(t); },
                         [&](double t) { return trace.charge(t); }, bp, window);
}

CurrentMetrics compute_metrics(std::span<const double> t, std::span<const double> i, double window)
{
  if (!(window > 0.0))
    throw DomainError("metrics window must be positive");
  if (t.size() != i.size() || t.size() < 2)
    throw DomainError("sampled metrics need matching arrays of length >= 2");
  CurrentMetrics m;
  double q = 0.0, qa = 0.0, q2 = 0.0;
  for (std::size_t k = 0; k + 1 < t.size() && t[k] < window; ++k) {
    double t1 = t[k + 1], i1 = i[k + 1];
    if (t1 > window) {
      i1 = i[k] + (i1 - i[k]) * (window - t[k]) / (t1 - t[k]);
      t1 = window;
    }
    const double h = t1 - t[k];
    q += 0.5 * h * (i[k] + i1);
    qa += 0.5 * h * (std::abs(i[k]) + std::abs(i1));
    q2 += 0.5 * h * (i[k] * i[k] + i1 * i1);
    m.peak = std::max({m.peak, std::abs(i[k]), std::abs(i1)});
  }
  m.avg = q / window;
  m.avg_abs = qa / window;
  m.rms = std::sqrt(q2 / window);
  return m;
}

double MetricErrors::worst() const
{
  return std::max({avg, rms, peak});
}

MetricErrors relative_errors(const CurrentMetrics& m, const CurrentMetrics& ref)
{
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  return {rel(m.avg, ref.avg), rel(m.rms, ref.rms), rel(m.peak, ref.peak)};
}

} // namespace rcdcm
