#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

namespace rcdcm {

enum class ElementKind { resistor, capacitor };

struct Element
{
  std::string name;
  ElementKind kind;
  std::string node_a;
  std::string node_b;
  double value; // ohms or farads

  bool operator==(const Element&) const = default;
};

// Parsed resistor/capacitor topology with a designated driver port.
// Node "0" is ground and never appears in `nodes`.
struct RcNetwork
{
  std::vector<std::string> nodes; // first-appearance order
  std::vector<Element> elements;  // file order
  std::string port;

  double total_capacitance() const;
  double total_resistance() const;
  std::size_t resistor_count() const;
  std::size_t capacitor_count() const;

  bool operator==(const RcNetwork&) const = default;
};

inline constexpr std::string_view ground_node = "0";
inline constexpr double epsilon_resistance = 1e-3;

// Parses the one-element-per-line R/C format. Throws ParseError.
RcNetwork parse_netlist(std::string_view text, const std::string& port_name);
RcNetwork read_netlist(const std::string& path, const std::string& port_name);

// Full-precision text form; parse_netlist(serialize_netlist(n)) == n.
std::string serialize_netlist(const RcNetwork& net);

// Parses "10f", "1k", "2.2meg", "5" into SI. Throws ParseError.
double parse_si_value(std::string_view token);

struct EpsilonRepair
{
  int node_a;
  int node_b;
};

// Nodal MNA stamp of the network, ground eliminated, with the port as the
// single current-in / voltage-out terminal (B == L == e_port).
struct MnaSystem
{
  Eigen::SparseMatrix<double> G;     // includes repair conductances
  Eigen::SparseMatrix<double> C;
  Eigen::SparseMatrix<double> G_repair; // the epsilon conductances alone
  Eigen::VectorXd B;
  Eigen::VectorXd L;
  std::vector<std::string> node_names;
  std::unordered_map<std::string, int> node_index;
  std::vector<EpsilonRepair> repairs;
  int port = 0;
  double total_capacitance = 0.0;
  double total_resistance = 0.0; // physical resistors only
  double min_resistance = 0.0;
  double min_capacitance = 0.0;

  int size() const { return static_cast<int>(node_names.size()); }
  Eigen::SparseMatrix<double> physical_G() const { return G - G_repair; }
};

// Stamps G and C, inserts epsilon resistors so every node has a resistive
// path to the port and no capacitor touches the port directly, then checks
// that G with the port grounded is nonsingular. Throws NumericalError with
// the offending node set otherwise.
MnaSystem assemble_mna(const RcNetwork& net);

} // namespace rcdcm
