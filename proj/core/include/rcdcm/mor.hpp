#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rcdcm/netlist.hpp"

namespace rcdcm {

using cplx = std::complex<double>;

struct PoleResidue
{
  cplx pole;    // 1/s, Re < 0
  cplx residue; // S
};

// Driving-point admittance in pole-residue form,
//   Y(s) = direct + sum_j res_j / (1 - s/pole_j).
// `direct` carries Y(inf): a port that sees a resistor first has a
// frequency-independent part that no finite pole can represent.
// Current from the driver into the network is positive.
struct ReducedAdmittance
{
  double direct = 0.0;
  std::vector<PoleResidue> terms;
  int order_requested = 0;
  std::string net_id;
  std::string notice; // set when the Krylov space deflated below the request

  int order() const { return static_cast<int>(terms.size()); }
  double dc_value() const; // Y(0) = direct + sum res
  double fastest_pole_magnitude() const;
  double slowest_pole_magnitude() const;
};

// Port-eliminated view of an MnaSystem:
//   Y(s) = g_pp - b^T (G_ii + s C_ii)^{-1} b,  b = G_ip.
// Requires that no capacitor touches the port (assemble_mna guarantees it).
struct PortPartition
{
  Eigen::SparseMatrix<double> G_ii;
  Eigen::SparseMatrix<double> C_ii;
  Eigen::VectorXd b;
  double g_pp = 0.0;
  std::vector<int> interior; // original node index of each interior row
  double time_scale = 1.0;   // tau0 = C_total * R_total (falls back to 1)
};

PortPartition partition_port(const MnaSystem& sys);

// Orthonormal basis of Kr(A, R, q) with A = -G_ii^{-1} C_ii / tau0 and
// R = G_ii^{-1} b, built by modified Gram-Schmidt with one
// reorthogonalization pass. H = X^T A X in the same normalized time.
struct ArnoldiBasis
{
  Eigen::MatrixXd X;
  Eigen::MatrixXd H;
  double time_scale = 1.0;
  bool deflated = false;
};

ArnoldiBasis arnoldi_basis(const PortPartition& part, int q);

enum class ReductionMethod {
  congruence, // G_r = X^T G X, C_r = X^T C X; real negative poles by construction
  projection  // eigen-decomposition of H_q; poles may come out complex
};

ReducedAdmittance reduce(const MnaSystem& sys, int q,
                         ReductionMethod method = ReductionMethod::congruence,
                         const std::string& net_id = {});

// Throws DomainError when s sits on a pole.
cplx eval_admittance(const ReducedAdmittance& ya, cplx s);

// Exact Y(s) of the unreduced network by one sparse complex solve.
cplx full_admittance(const MnaSystem& sys, cplx s);

// Taylor coefficients of Y(s) about 0 in SI units:
//   m_0 = g_pp - b^T R,  m_i = -b^T A^i R  (A = -G_ii^{-1} C_ii).
// For a pure RC net m_0 = 0 and m_1 = C_total.
std::vector<double> full_moments(const MnaSystem& sys, int k);

// Same coefficients from the pole-residue form: direct + sum res, sum res/p^i.
std::vector<double> reduced_moments(const ReducedAdmittance& ya, int k);

std::string admittance_to_json(const ReducedAdmittance& ya);
ReducedAdmittance admittance_from_json(const std::string& text);

} // namespace rcdcm
