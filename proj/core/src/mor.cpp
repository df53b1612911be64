#include "rcdcm/mor.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <json.hpp>

namespace rcdcm {

namespace {

// Eigenvalues of the normalized A below this are poles beyond any
// bandwidth we care about; they are folded into the direct term.
constexpr double infinite_pole_cutoff = 1e-14;
constexpr double deflation_tol = 1e-12;
constexpr double symmetrize_tol = 1e-9;

using Ldlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

Eigen::SparseMatrix<double> extract(const Eigen::SparseMatrix<double>& m,
                                    const std::vector<int>& map, int n)
{
  std::vector<Eigen::Triplet<double>> t;
  for (int col = 0; col < m.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0)
        t.emplace_back(map[it.row()], map[it.col()], it.value());
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

void factor(Ldlt& ldlt, const Eigen::SparseMatrix<double>& g)
{
  ldlt.compute(g);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("interior conductance matrix is singular");
}

} // namespace

double ReducedAdmittance::dc_value() const
{
  double y0 = direct;
  for (const auto& t : terms)
    y0 += t.residue.real();
  return y0;
}

double ReducedAdmittance::fastest_pole_magnitude() const
{
  double m = 0.0;
  for (const auto& t : terms)
    m = std::max(m, std::abs(t.pole));
  return m;
}

double ReducedAdmittance::slowest_pole_magnitude() const
{
  double m = 0.0;
  for (const auto& t : terms)
    m = (m == 0.0) ? std::abs(t.pole) : std::min(m, std::abs(t.pole));
  return m;
}

PortPartition partition_port(const MnaSystem& sys)
{
  const int n = sys.size();
  PortPartition part;
  std::vector<int> map(n, -1);
  for (int v = 0; v < n; ++v) {
    if (v == sys.port)
      continue;
    map[v] = static_cast<int>(part.interior.size());
    part.interior.push_back(v);
  }
  const int m = static_cast<int>(part.interior.size());
  part.G_ii = extract(sys.G, map, m);
  part.C_ii = extract(sys.C, map, m);
  part.b = Eigen::VectorXd::Zero(m);
  for (Eigen::SparseMatrix<double>::InnerIterator it(sys.G, sys.port); it; ++it) {
    if (it.row() == sys.port)
      part.g_pp = it.value();
    else
      part.b(map[it.row()]) = it.value();
  }
  for (Eigen::SparseMatrix<double>::InnerIterator it(sys.C, sys.port); it; ++it)
    if (it.value() != 0.0)
      throw DomainError("capacitor attached directly to the port; run assemble_mna repair");

  const double tau0 = sys.total_capacitance * sys.total_resistance;
  part.time_scale = tau0 > 0.0 ? tau0 : 1.0;
  return part;
}

ArnoldiBasis arnoldi_basis(const PortPartition& part, int q)
{
  if (q < 1)
    throw DomainError("reduction order must be >= 1");
  const int m = static_cast<int>(part.b.size());
  ArnoldiBasis basis;
  basis.time_scale = part.time_scale;
  if (m == 0) {
    basis.X.resize(0, 0);
    basis.H.resize(0, 0);
    basis.deflated = true;
    return basis;
  }

  Ldlt ldlt;
  factor(ldlt, part.G_ii);
  auto apply_a = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd y = part.C_ii * x;
    return -ldlt.solve(y) / part.time_scale;
  };

  const int qmax = std::min(q, m);
  basis.deflated = qmax < q;
  std::vector<Eigen::VectorXd> cols;
  Eigen::VectorXd r = ldlt.solve(part.b);
  double rn = r.norm();
  if (!(rn > 0.0) || !std::isfinite(rn))
    throw NumericalError("port is not resistively coupled to the interior");
  cols.push_back(r / rn);

  while (static_cast<int>(cols.size()) < qmax) {
    Eigen::VectorXd w = apply_a(cols.back());
    const double w0 = w.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& x : cols)
        w -= x.dot(w) * x;
    const double h = w.norm();
    if (!(h > deflation_tol * w0)) {
      basis.deflated = true;
      break;
    }
    cols.push_back(w / h);
  }

  const int k = static_cast<int>(cols.size());
  basis.X.resize(m, k);
  for (int j = 0; j < k; ++j)
    basis.X.col(j) = cols[j];
  Eigen::MatrixXd ax(m, k);
  for (int j = 0; j < k; ++j)
    ax.col(j) = apply_a(cols[j]);
  basis.H = basis.X.transpose() * ax;
  return basis;
}

namespace {

cplx clean(cplx z)
{
  if (std::abs(z.imag()) < symmetrize_tol * std::abs(z.real()))
    return {z.real(), 0.0};
  return z;
}

void reduce_congruence(const PortPartition& part, const ArnoldiBasis& basis,
                       ReducedAdmittance& ya)
{
  const Eigen::MatrixXd& X = basis.X;
  Eigen::MatrixXd gr = X.transpose() * (part.G_ii * X);
  Eigen::MatrixXd cr = X.transpose() * (part.C_ii * X) / part.time_scale;
  gr = 0.5 * (gr + gr.transpose());
  cr = 0.5 * (cr + cr.transpose());
  Eigen::VectorXd br = X.transpose() * part.b;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(cr, gr);
  if (es.info() != Eigen::Success)
    throw NumericalError("reduced generalized eigenproblem failed");
  const Eigen::VectorXd mu = es.eigenvalues();
  const Eigen::VectorXd w = es.eigenvectors().transpose() * br;
  const double mu_max = mu.cwiseAbs().maxCoeff();

  // Y = g_pp - sum w_j^2 / (1 + s tau0 mu_j)
  for (int j = static_cast<int>(mu.size()) - 1; j >= 0; --j) {
    const double wj2 = w(j) * w(j);
    if (mu(j) <= infinite_pole_cutoff * mu_max) {
      ya.direct -= wj2;
      continue;
    }
    ya.terms.push_back({cplx(-1.0 / (mu(j) * part.time_scale), 0.0), cplx(-wj2, 0.0)});
  }
}

void reduce_projection(const PortPartition& part, const ArnoldiBasis& basis,
                       ReducedAdmittance& ya)
{
  const Eigen::MatrixXd& X = basis.X;
  Ldlt ldlt;
  factor(ldlt, part.G_ii);
  const Eigen::VectorXd r = ldlt.solve(part.b);
  const Eigen::RowVectorXd left = part.b.transpose() * X;
  const Eigen::VectorXd right = X.transpose() * r;

  Eigen::EigenSolver<Eigen::MatrixXd> es(basis.H);
  if (es.info() != Eigen::Success)
    throw NumericalError("Hessenberg eigendecomposition failed");
  const Eigen::VectorXcd lam = es.eigenvalues();
  const Eigen::MatrixXcd W = es.eigenvectors();
  const Eigen::RowVectorXcd lw = left.cast<cplx>() * W;
  const Eigen::VectorXcd wr = W.partialPivLu().solve(right.cast<cplx>());
  const double lam_max = lam.cwiseAbs().maxCoeff();

  // Y = g_pp - sum lw_j wr_j / (1 - s tau0 lambda_j)
  for (int j = 0; j < lam.size(); ++j) {
    const cplx weight = lw(j) * wr(j);
    if (std::abs(lam(j)) <= infinite_pole_cutoff * lam_max) {
      ya.direct -= weight.real();
      continue;
    }
    ya.terms.push_back({clean(1.0 / (lam(j) * part.time_scale)), clean(-weight)});
  }
  std::sort(ya.terms.begin(), ya.terms.end(), [](const PoleResidue& a, const PoleResidue& b) {
    if (a.pole.real() != b.pole.real())
      return a.pole.real() > b.pole.real();
    return a.pole.imag() > b.pole.imag();
  });
  for (const auto& t : ya.terms)
    if (!(t.pole.real() < 0.0))
      throw NumericalError("projection produced a non-decaying pole");
}

} // namespace

ReducedAdmittance reduce(const MnaSystem& sys, int q, ReductionMethod method,
                         const std::string& net_id)
{
  PortPartition part = partition_port(sys);
  ReducedAdmittance ya;
  ya.order_requested = q;
  ya.net_id = net_id;
  ya.direct = part.g_pp;
  if (part.b.size() == 0) {
    if (q < 1)
      throw DomainError("reduction order must be >= 1");
    ya.notice = "network has no interior nodes; admittance is purely resistive";
    return ya;
  }
  ArnoldiBasis basis = arnoldi_basis(part, q);
  if (method == ReductionMethod::congruence)
    reduce_congruence(part, basis, ya);
  else
    reduce_projection(part, basis, ya);
  if (basis.deflated)
    ya.notice = "Krylov space deflated at order " + std::to_string(basis.X.cols()) +
                " (requested " + std::to_string(q) + ")";
  return ya;
}

cplx eval_admittance(const ReducedAdmittance& ya, cplx s)
{
  cplx y = ya.direct;
  for (const auto& t : ya.terms) {
    const cplx den = 1.0 - s / t.pole;
    if (std::abs(den) < 1e-15)
      throw DomainError("admittance evaluated at a pole");
    y += t.residue / den;
  }
  return y;
}

cplx full_admittance(const MnaSystem& sys, cplx s)
{
  PortPartition part = partition_port(sys);
  if (part.b.size() == 0)
    return part.g_pp;
  Eigen::SparseMatrix<cplx> k = part.G_ii.cast<cplx>() + s * part.C_ii.cast<cplx>();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu(k);
  if (lu.info() != Eigen::Success)
    throw NumericalError("singular system in admittance sweep");
  const Eigen::VectorXcd bc = part.b.cast<cplx>();
  const Eigen::VectorXcd x = lu.solve(bc);
  return part.g_pp - bc.dot(x);
}

std::vector<double> full_moments(const MnaSystem& sys, int k)
{
  PortPartition part = partition_port(sys);
  std::vector<double> m(k, 0.0);
  if (k == 0)
    return m;
  if (part.b.size() == 0) {
    m[0] = part.g_pp;
    return m;
  }
  Ldlt ldlt;
  factor(ldlt, part.G_ii);
  Eigen::VectorXd v = ldlt.solve(part.b);
  m[0] = part.g_pp - part.b.dot(v);
  for (int i = 1; i < k; ++i) {
    Eigen::VectorXd cv = part.C_ii * v;
    v = -ldlt.solve(cv);
    m[i] = -part.b.dot(v);
  }
  return m;
}

std::vector<double> reduced_moments(const ReducedAdmittance& ya, int k)
{
  std::vector<double> m(k, 0.0);
  if (k == 0)
    return m;
  m[0] = ya.dc_value();
  for (const auto& t : ya.terms) {
    cplx r = t.residue;
    for (int i = 1; i < k; ++i) {
      r /= t.pole;
      m[i] += r.real();
    }
  }
  return m;
}

std::string admittance_to_json(const ReducedAdmittance& ya)
{
  nlohmann::json j;
  j["net"] = ya.net_id;
  j["q"] = ya.order();
  j["q_requested"] = ya.order_requested;
  j["direct_S"] = ya.direct;
  j["terms"] = nlohmann::json::array();
  for (const auto& t : ya.terms)
    j["terms"].push_back({{"pole_re", t.pole.real()},
                          {"pole_im", t.pole.imag()},
                          {"res_re", t.residue.real()},
                          {"res_im", t.residue.imag()}});
  if (!ya.notice.empty())
    j["notice"] = ya.notice;
  return j.dump(2);
}

ReducedAdmittance admittance_from_json(const std::string& text)
{
  ReducedAdmittance ya;
  try {
    auto j = nlohmann::json::parse(text);
    ya.net_id = j.value("net", std::string());
    ya.order_requested = j.value("q_requested", 0);
    ya.direct = j.value("direct_S", 0.0);
    ya.notice = j.value("notice", std::string());
    for (const auto& t : j.at("terms"))
      ya.terms.push_back({cplx(t.at("pole_re").get<double>(), t.at("pole_im").get<double>()),
                          cplx(t.at("res_re").get<double>(), t.at("res_im").get<double>())});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("pole/residue JSON: ") + e.what());
  }
  return ya;
}

} // namespace rcdcm
