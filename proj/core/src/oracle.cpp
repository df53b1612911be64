#include "rcdcm/oracle.hpp"
#include "rcdcm/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SparseCholesky>

namespace rcdcm {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Ldlt = Eigen::SimplicialLDLT<SpMat>;

// Physical network with every epsilon-repair pair contracted to one node.
struct MergedNetwork
{
  SpMat G;
  SpMat C;
  int port = 0;
  std::vector<int> node_class;
};

MergedNetwork merge_repairs(const MnaSystem& sys)
{
  const int n = sys.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& r : sys.repairs)
    parent[find(r.node_a)] = find(r.node_b);

  MergedNetwork m;
  m.node_class.assign(n, -1);
  std::vector<int> root_class(n, -1);
  int count = 0;
  for (int v = 0; v < n; ++v) {
    int r = find(v);
    if (root_class[r] < 0)
      root_class[r] = count++;
    m.node_class[v] = root_class[r];
  }
  m.port = m.node_class[sys.port];

  auto contract = [&](const SpMat& a) {
    std::vector<Eigen::Triplet<double>> t;
    for (int col = 0; col < a.outerSize(); ++col)
      for (SpMat::InnerIterator it(a, col); it; ++it)
        t.emplace_back(m.node_class[it.row()], m.node_class[it.col()], it.value());
    SpMat out(count, count);
    out.setFromTriplets(t.begin(), t.end());
    out.prune(0.0);
    out.makeCompressed();
    return out;
  };
  m.G = contract(sys.physical_G());
  m.C = contract(sys.C);
  return m;
}

struct Split
{
  SpMat G_ii, C_ii;
  Eigen::VectorXd g, c; // port column restricted to interior rows
  double g_pp = 0.0, c_pp = 0.0;
  std::vector<int> interior;
};

Split split_port(const MergedNetwork& m)
{
  const int n = static_cast<int>(m.G.rows());
  Split s;
  std::vector<int> map(n, -1);
  for (int v = 0; v < n; ++v)
    if (v != m.port) {
      map[v] = static_cast<int>(s.interior.size());
      s.interior.push_back(v);
    }
  const int k = static_cast<int>(s.interior.size());
  auto restrict = [&](const SpMat& a, Eigen::VectorXd& col, double& diag) {
    std::vector<Eigen::Triplet<double>> t;
    col = Eigen::VectorXd::Zero(k);
    for (int c = 0; c < a.outerSize(); ++c)
      for (SpMat::InnerIterator it(a, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int cc = static_cast<int>(it.col());
        if (map[r] >= 0 && map[cc] >= 0)
          t.emplace_back(map[r], map[cc], it.value());
        else if (r == m.port && cc == m.port)
          diag = it.value();
        else if (cc == m.port)
          col(map[r]) = it.value();
      }
    SpMat out(k, k);
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
  };
  s.G_ii = restrict(m.G, s.g, s.g_pp);
  s.C_ii = restrict(m.C, s.c, s.c_pp);
  return s;
}

void check_step(const MnaSystem& sys, double dt, double window, const OracleOptions& opts)
{
  if (!(dt > 0.0) || !(window > 0.0))
    throw DomainError("oracle dt and window must be positive");
  if (dt > window)
    throw DomainError("oracle dt exceeds the window");
  const double bound = max_oracle_step(sys, opts);
  if (dt > bound * (1.0 + 1e-12))
    throw DomainError("oracle dt " + std::to_string(dt) + " s exceeds the stability/accuracy bound " +
                      std::to_string(bound) + " s");
}

std::size_t step_count(double dt, double window)
{
  return static_cast<std::size_t>(std::ceil(window / dt - 1e-9));
}

void reserve(TransientResult& r, std::size_t steps)
{
  r.t.reserve(steps + 1);
  r.v_port.reserve(steps + 1);
  r.i_port.reserve(steps + 1);
  r.energy.reserve(steps + 1);
}

} // namespace

double min_time_constant(const MnaSystem& sys)
{
  return sys.min_resistance * sys.min_capacitance;
}

double max_oracle_step(const MnaSystem& sys, const OracleOptions& opts)
{
  if (opts.strict_step_bound) {
    const double tau = min_time_constant(sys);
    return tau > 0.0 ? tau / 10.0 : INFINITY;
  }
  const double tau = sys.total_resistance * sys.total_capacitance;
  return tau > 0.0 ? tau / 10.0 : INFINITY;
}

TransientResult simulate_pwl(const MnaSystem& sys, const PwlWaveform& source, double dt,
                             double window, const OracleOptions& opts)
{
  check_step(sys, dt, window, opts);
  if (source.empty())
    throw DomainError("source waveform is empty");
  const MergedNetwork m = merge_repairs(sys);
  const Split s = split_port(m);
  const int k = static_cast<int>(s.interior.size());
  const double a = 2.0 / dt;

  TransientResult res;
  res.dt = dt;
  res.steps = step_count(dt, window);
  res.node_class = m.node_class;
  reserve(res, res.steps);

  Ldlt kfac, gfac;
  SpMat mstep;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  double u = source.eval(0.0);
  if (k > 0) {
    gfac.compute(s.G_ii);
    if (gfac.info() != Eigen::Success)
      throw NumericalError("interior conductance matrix is singular");
    v = -gfac.solve(s.g * u);
    SpMat kmat = a * s.C_ii + s.G_ii;
    kfac.compute(kmat);
    if (kfac.info() != Eigen::Success)
      throw NumericalError("trapezoidal system matrix is singular");
    mstep = a * s.C_ii - s.G_ii;
  }
  double i = s.g_pp * u + s.g.dot(v);

  auto energy = [&](double up, const Eigen::VectorXd& vi) {
    double e = s.c_pp * up * up + 2.0 * up * s.c.dot(vi);
    if (k > 0)
      e += vi.dot(s.C_ii * vi);
    return 0.5 * e;
  };
  auto record = [&](double t, double up, double ip, const Eigen::VectorXd& vi) {
    res.t.push_back(t);
    res.v_port.push_back(up);
    res.i_port.push_back(ip);
    res.energy.push_back(energy(up, vi));
    if (opts.record_nodes) {
      Eigen::VectorXd full(k + 1);
      for (int j = 0; j < k; ++j)
        full(s.interior[j]) = vi(j);
      full(m.port) = up;
      res.node_v.push_back(std::move(full));
    }
  };
  record(0.0, u, i, v);

  Eigen::VectorXd v1(k), rhs(k);
  for (std::size_t n = 1; n <= res.steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double u1 = source.eval(t);
    if (k > 0) {
      rhs = mstep * v - s.g * (u1 + u) - a * s.c * (u1 - u);
      v1 = kfac.solve(rhs);
    }
    const double i1 = -i + s.g_pp * (u1 + u) + (k > 0 ? s.g.dot(v1 + v) : 0.0) +
                      a * (s.c_pp * (u1 - u) + (k > 0 ? s.c.dot(v1 - v) : 0.0));
    if (!std::isfinite(i1) || (k > 0 && !v1.allFinite()))
      throw NumericalError("non-finite state at step " + std::to_string(n));
    if (k > 0)
      v.swap(v1);
    u = u1;
    i = i1;
    record(t, u, i, v);
  }
  return res;
}

TransientResult simulate_driver(const MnaSystem& sys, const DriverModel& model, double vdd,
                                const PwlWaveform& input, double dt, double window,
                                const OracleOptions& opts)
{
  check_step(sys, dt, window, opts);
  model.validate();
  if (input.empty())
    throw DomainError("driver input waveform is empty");
  const MergedNetwork m = merge_repairs(sys);
  const int n = static_cast<int>(m.G.rows());
  const int p = m.port;
  const double a = 2.0 / dt;
  const double c_cc = model.coupling_capacitance();
  const double c_int = model.internal_capacitance();
  const double tau_g = model.gate_time_constant();

  // DC operating point: the network sits at the port-driven DC shape scaled
  // by the port voltage, and the driver's current balances Y(0) v_p.
  const Split s = split_port(m);
  Eigen::VectorXd shape = Eigen::VectorXd::Ones(n);
  double y0 = s.g_pp;
  if (!s.interior.empty()) {
    Ldlt gfac(s.G_ii);
    if (gfac.info() != Eigen::Success)
      throw NumericalError("interior conductance matrix is singular");
    const Eigen::VectorXd u = -gfac.solve(s.g);
    for (std::size_t j = 0; j < s.interior.size(); ++j)
      shape(s.interior[j]) = u(static_cast<Eigen::Index>(j));
    y0 += s.g.dot(u);
  }
  double vg = input.eval(0.0);
  double lo = -10.0 * vdd - 1.0, hi = 10.0 * vdd + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (model.output_current(vg, mid, vdd) - y0 * mid > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double vp0 = 0.5 * (lo + hi);

  SpMat kmat = a * m.C + m.G;
  Ldlt kfac(kmat);
  if (kfac.info() != Eigen::Success)
    throw NumericalError("network has no capacitive or resistive reference; cannot integrate");
  const SpMat mstep = a * m.C - m.G;
  Eigen::VectorXd ep = Eigen::VectorXd::Zero(n);
  ep(p) = 1.0;
  const Eigen::VectorXd z = kfac.solve(ep);
  const double zp = z(p);

  TransientResult res;
  res.dt = dt;
  res.steps = step_count(dt, window);
  res.node_class = m.node_class;
  reserve(res, res.steps);

  Eigen::VectorXd v = shape * vp0;
  double x = y0 * vp0; // current into the network
  double i_cc = 0.0, i_int = 0.0;
  double u_in = vg;
  auto record = [&](double t) {
    res.t.push_back(t);
    res.v_port.push_back(v(p));
    res.i_port.push_back(x);
    res.energy.push_back(0.5 * v.dot(m.C * v));
    if (opts.record_nodes)
      res.node_v.push_back(v);
  };
  record(0.0);

  Eigen::VectorXd rhs(n), w(n);
  for (std::size_t step = 1; step <= res.steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    const double u1 = input.eval(t);
    double vg1 = u1;
    if (tau_g > 0.0) {
      const double r = dt / (2.0 * tau_g);
      vg1 = ((1.0 - r) * vg + r * (u_in + u1)) / (1.0 + r);
    }
    rhs = mstep * v;
    rhs(p) += x;
    w = kfac.solve(rhs);
    const double wp = w(p);
    const double vp_old = v(p);

    // F(x) = x - I(vg1, vp(x)) - i_cc(vp) + i_int(vp), vp = wp + zp x.
    // dF/dx >= 1 since dI/dv <= 0, so [x0 - F(x0), x0] brackets the root.
    auto eval_f = [&](double xx, double& dfdx) {
      const double vp = wp + zp * xx;
      double didv = 0.0;
      const double idrv = model.output_current(vg1, vp, vdd, &didv);
      const double icc = a * c_cc * ((vg1 - vp) - (vg - vp_old)) - i_cc;
      const double iint = a * c_int * (vp - vp_old) - i_int;
      dfdx = 1.0 - zp * (didv - a * c_cc - a * c_int);
      return xx - idrv - icc + iint;
    };
    double xn = x, df = 1.0;
    double f = eval_f(xn, df);
    double blo = f > 0.0 ? xn - f : xn;
    double bhi = f > 0.0 ? xn : xn - f;
    int iter = 0;
    while (std::abs(f) > 1e-12) {
      if (++iter > 200)
        throw NumericalError("driver Newton iteration failed to converge at t=" +
                             std::to_string(t) + " s");
      double next = xn - f / df;
      if (!(next > blo && next < bhi))
        next = 0.5 * (blo + bhi);
      xn = next;
      f = eval_f(xn, df);
      if (f > 0.0)
        bhi = xn;
      else
        blo = xn;
      if (bhi - blo <= 1e-15 * std::max(1.0, std::abs(xn)))
        break;
    }
    res.max_residual = std::max(res.max_residual, std::abs(f));

    const double vp = wp + zp * xn;
    i_cc = a * c_cc * ((vg1 - vp) - (vg - vp_old)) - i_cc;
    i_int = a * c_int * (vp - vp_old) - i_int;
    v = w + z * xn;
    x = xn;
    vg = vg1;
    u_in = u1;
    if (!std::isfinite(x) || !v.allFinite())
      throw NumericalError("non-finite state at t=" + std::to_string(t) + " s");
    record(t);
  }
  return res;
}

} // namespace rcdcm
