#include "rcdcm/response.hpp"
#include "rcdcm/error.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace rcdcm {

namespace {

// e^z, phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, accurate for
// small |z| and clamped for strongly decaying z.
struct Phi
{
  cplx e, p1, p2;
};

Phi phi(cplx z)
{
  Phi f;
  if (z.real() < -700.0) {
    f.e = 0.0;
    f.p1 = -1.0 / z;
    f.p2 = (-1.0 - z) / (z * z);
    return f;
  }
  if (std::abs(z) < 0.5) {
    // Horner on sum z^n/(n+1)! and sum z^n/(n+2)!
    cplx a = 0.0, b = 0.0;
    for (int n = 16; n >= 0; --n) {
      a = a * z / static_cast<double>(n + 2) + 1.0;
      b = b * z / static_cast<double>(n + 3) + 1.0;
    }
    f.p1 = a;       // 1 + z/2 + z^2/6 + ...
    f.p2 = b / 2.0; // 1/2 + z/6 + z^2/24 + ...
    f.e = 1.0 + z * f.p1;
    return f;
  }
  f.e = std::exp(z);
  f.p1 = (f.e - 1.0) / z;
  f.p2 = (f.e - 1.0 - z) / (z * z);
  return f;
}

// res (1 - e^{p tau}) for tau > 0
cplx step_term(const PoleResidue& t, double tau)
{
  if (!(tau > 0.0))
    return 0.0;
  const cplx z = t.pole * tau;
  return -t.residue * z * phi(z).p1;
}

// (res/p)(p tau - e^{p tau} + 1) for tau > 0
cplx ramp_term(const PoleResidue& t, double tau)
{
  if (!(tau > 0.0))
    return 0.0;
  const cplx z = t.pole * tau;
  return -t.residue * t.pole * tau * tau * phi(z).p2;
}

} // namespace

ClosedFormResponse::ClosedFormResponse(ReducedAdmittance ya, PwlWaveform w)
  : ya_(std::move(ya)), dc_(ya_.dc_value())
{
  const std::size_t q = ya_.terms.size();
  state_.reserve(w.size() * q);
  vint_.reserve(w.size());
  for (const auto& p : w.points())
    append(p.t, p.v);
}

void ClosedFormResponse::append(double t, double v)
{
  const std::size_t q = ya_.terms.size();
  if (wave_.empty()) {
    wave_.append(t, v);
    state_.assign(q, cplx(0.0));
    vint_.push_back(0.0);
    return;
  }
  const PwlPoint last = wave_.back();
  wave_.append(t, v);
  const double h = t - last.t;
  const double k = (v - last.v) / h;
  const std::size_t base = (wave_.size() - 2) * q;
  for (std::size_t j = 0; j < q; ++j) {
    const Phi f = phi(ya_.terms[j].pole * h);
    state_.push_back(f.e * state_[base + j] + last.v * h * f.p1 + k * h * h * f.p2);
  }
  vint_.push_back(vint_.back() + last.v * h + 0.5 * k * h * h);
}

ClosedFormResponse::Propagated ClosedFormResponse::propagate(std::size_t b, double h,
                                                             double k) const
{
  const std::size_t q = ya_.terms.size();
  const double vb = wave_[b].v;
  cplx isum = 0.0, qsum = 0.0;
  for (std::size_t j = 0; j < q; ++j) {
    const auto& term = ya_.terms[j];
    cplx x = state_[b * q + j];
    if (h > 0.0) {
      const Phi f = phi(term.pole * h);
      x = f.e * x + vb * h * f.p1 + k * h * h * f.p2;
    }
    isum -= term.residue * term.pole * x;
    qsum -= term.residue * x;
  }
  const double v = vb + k * h;
  const double vint = vint_[b] + vb * h + 0.5 * k * h * h;
  return {ya_.direct * v + isum.real(), dc_ * vint + qsum.real()};
}

double ClosedFormResponse::current(double t) const
{
  const std::size_t b = wave_.segment_at(t);
  if (b == PwlWaveform::npos)
    return 0.0;
  const double k = b + 1 < wave_.size() ? wave_.slope(b) : 0.0;
  return propagate(b, t - wave_[b].t, k).current;
}

double ClosedFormResponse::charge(double t) const
{
  const std::size_t b = wave_.segment_at(t);
  if (b == PwlWaveform::npos)
    return 0.0;
  const double k = b + 1 < wave_.size() ? wave_.slope(b) : 0.0;
  return propagate(b, t - wave_[b].t, k).charge;
}

ClosedFormResponse::Probe ClosedFormResponse::probe(double t_end, double v_end) const
{
  if (wave_.empty())
    throw DomainError("probe on an empty response");
  const PwlPoint last = wave_.back();
  if (!(t_end > last.t))
    throw DomainError("probe time must follow the last breakpoint");
  const double h = t_end - last.t;
  auto p = propagate(wave_.size() - 1, h, (v_end - last.v) / h);
  return {p.current, p.charge};
}

ClosedFormResponse::Probe ClosedFormResponse::at_end() const
{
  if (wave_.empty())
    return {0.0, 0.0};
  auto p = propagate(wave_.size() - 1, 0.0, 0.0);
  return {p.current, p.charge};
}

double eval_current(const ReducedAdmittance& ya, const PwlWaveform& w, double t)
{
  if (w.empty() || t < w.front().t)
    return 0.0;
  double i = ya.direct * w.eval(t);
  const double v1 = w.front().v;
  const double t1 = w.front().t;
  for (const auto& term : ya.terms) {
    cplx acc = v1 * step_term(term, t - t1);
    for (std::size_t s = 0; s + 1 < w.size() && w[s].t < t; ++s)
      acc += w.slope(s) * (ramp_term(term, t - w[s].t) - ramp_term(term, t - w[s + 1].t));
    i += acc.real();
  }
  return i;
}

double eval_current_expanded(const ReducedAdmittance& ya, const PwlWaveform& w, double t)
{
  if (w.empty() || t < w.front().t)
    return 0.0;
  double i = ya.direct * w.eval(t);
  for (const auto& term : ya.terms) {
    cplx acc = 0.0;
    for (std::size_t s = 0; s + 1 < w.size() && w[s].t < t; ++s) {
      const double ta = t - w[s].t;
      const double tb = t - w[s + 1].t;
      acc += w.slope(s) * (ramp_term(term, ta) - ramp_term(term, tb));
      acc += w[s].v * step_term(term, ta) - w[s + 1].v * step_term(term, tb);
    }
    acc += w.back().v * step_term(term, t - w.back().t);
    i += acc.real();
  }
  return i;
}

std::vector<double> convolution_reference(const ReducedAdmittance& ya, const PwlWaveform& w,
                                          std::span<const double> t_grid, double dt)
{
  if (!(dt > 0.0))
    throw DomainError("convolution step must be positive");
  const double pmax = ya.fastest_pole_magnitude();
  if (pmax > 0.0 && dt > 0.1 / pmax)
    throw DomainError("convolution step does not resolve the fastest pole (dt > 0.1/|p|)");
  std::vector<double> out(t_grid.size(), 0.0);
  if (w.empty())
    return out;

  const std::size_t q = ya.terms.size();
  const double t1 = w.front().t;
  std::vector<cplx> x(q, 0.0), step_exp(q);
  for (std::size_t j = 0; j < q; ++j)
    step_exp[j] = std::exp(ya.terms[j].pole * dt);

  long n = 0;
  double v_n = w.front().v;
  double prev_t = -INFINITY;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const double t = t_grid[g];
    if (t < prev_t)
      throw DomainError("convolution time grid must be nondecreasing");
    prev_t = t;
    if (t < t1)
      continue;
    while (t1 + static_cast<double>(n + 1) * dt <= t) {
      const double v_next = w.eval(t1 + static_cast<double>(n + 1) * dt);
      for (std::size_t j = 0; j < q; ++j)
        x[j] = step_exp[j] * x[j] + 0.5 * dt * (step_exp[j] * v_n + v_next);
      v_n = v_next;
      ++n;
    }
    const double hp = t - (t1 + static_cast<double>(n) * dt);
    const double vt = w.eval(t);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      cplx xt = x[j];
      if (hp > 0.0) {
        const cplx e = std::exp(ya.terms[j].pole * hp);
        xt = e * x[j] + 0.5 * hp * (e * v_n + vt);
      }
      acc -= ya.terms[j].residue * ya.terms[j].pole * xt;
    }
    out[g] = ya.direct * vt + acc.real();
  }
  return out;
}

double inverse_laplace_reference(const ReducedAdmittance& ya, const PwlWaveform& w, double t,
                                 int contour_points)
{
  if (contour_points < 2)
    throw DomainError("Talbot contour needs at least 2 points");
  if (w.empty() || t < w.front().t)
    return 0.0;

  // v(t) = v_1 u(t - t_1) + sum_b dk_b (t - t_b)_+
  const std::size_t n = w.size();
  auto slope_before = [&](std::size_t b) { return b == 0 ? 0.0 : w.slope(b - 1); };
  auto slope_after = [&](std::size_t b) { return b + 1 < n ? w.slope(b) : 0.0; };

  const int M = contour_points;
  double total = 0.0;
  if (t == w.front().t)
    return ya.direct * w.front().v;
  for (std::size_t b = 0; b < n; ++b) {
    const double tau = t - w[b].t;
    if (!(tau > 0.0))
      break;
    const double dk = slope_after(b) - slope_before(b);
    const double dv = b == 0 ? w.front().v : 0.0;
    if (dk == 0.0 && dv == 0.0)
      continue;
    auto F = [&](cplx s) { return eval_admittance(ya, s) * (dk / (s * s) + dv / s); };
    const double r = 2.0 * M / (5.0 * tau);
    double sum = 0.5 * (F(cplx(r, 0.0)) * std::exp(r * tau)).real();
    for (int k = 1; k < M; ++k) {
      const double theta = k * std::numbers::pi / M;
      const double cot = std::cos(theta) / std::sin(theta);
      const cplx s(r * theta * cot, r * theta);
      const double sigma = theta + (theta * cot - 1.0) * cot;
      sum += (std::exp(tau * s) * F(s) * cplx(1.0, sigma)).real();
    }
    total += r / M * sum;
  }
  if (!std::isfinite(total))
    throw NumericalError("Talbot inversion produced a non-finite value");
  return total;
}

void write_waveform_csv(std::ostream& os, std::span<const double> t, std::span<const double> v,
                        std::span<const double> i)
{
  if (t.size() != v.size() || t.size() != i.size())
    throw DomainError("waveform columns differ in length");
  os << "t_s,v_V,i_A\n";
  char buf[96];
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t[k], v[k], i[k]);
    os << buf;
  }
}

} // namespace rcdcm
