#include "rcdcm/netlist.hpp"
#include "rcdcm/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <Eigen/SparseCholesky>

namespace rcdcm {

double RcNetwork::total_capacitance() const
{
  double sum = 0.0;
  for (const auto& e : elements)
    if (e.kind == ElementKind::capacitor)
      sum += e.value;
  return sum;
}

double RcNetwork::total_resistance() const
{
  double sum = 0.0;
  for (const auto& e : elements)
    if (e.kind == ElementKind::resistor)
      sum += e.value;
  return sum;
}

std::size_t RcNetwork::resistor_count() const
{
  return std::count_if(elements.begin(), elements.end(),
                       [](const Element& e) { return e.kind == ElementKind::resistor; });
}

std::size_t RcNetwork::capacitor_count() const
{
  return elements.size() - resistor_count();
}

double parse_si_value(std::string_view token)
{
  double mantissa = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, mantissa);
  if (ec != std::errc() || ptr == first)
    throw ParseError("bad numeric value '" + std::string(token) + "'");

  std::string suffix(ptr, last);
  std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  double scale = 1.0;
  if (suffix.empty())
    scale = 1.0;
  else if (suffix == "f")
    scale = 1e-15;
  else if (suffix == "p")
    scale = 1e-12;
  else if (suffix == "n")
    scale = 1e-9;
  else if (suffix == "u")
    scale = 1e-6;
  else if (suffix == "m")
    scale = 1e-3;
  else if (suffix == "k")
    scale = 1e3;
  else if (suffix == "meg")
    scale = 1e6;
  else if (suffix == "g")
    scale = 1e9;
  else
    throw ParseError("unknown unit suffix '" + suffix + "' in '" + std::string(token) + "'");
  return mantissa * scale;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i)
      out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

} // namespace

RcNetwork parse_netlist(std::string_view text, const std::string& port_name)
{
  RcNetwork net;
  net.port = port_name;
  std::unordered_set<std::string> seen_nodes;
  std::unordered_set<std::string> seen_names;

  auto note_node = [&](const std::string& n) {
    if (n != ground_node && seen_nodes.insert(n).second)
      net.nodes.push_back(n);
  };

  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;

    std::size_t cut = line.find_first_of("*;");
    if (cut != std::string_view::npos)
      line = line.substr(0, cut);
    auto fields = split_ws(line);
    if (fields.empty())
      continue;
    if (fields.size() != 4)
      throw ParseError("expected 'name nodeA nodeB value', got " +
                         std::to_string(fields.size()) + " fields",
                       lineno);

    Element e;
    e.name = std::string(fields[0]);
    char lead = static_cast<char>(std::toupper(static_cast<unsigned char>(e.name[0])));
    if (lead == 'R')
      e.kind = ElementKind::resistor;
    else if (lead == 'C')
      e.kind = ElementKind::capacitor;
    else
      throw ParseError("unsupported element '" + e.name + "' (only R and C)", lineno);
    if (!seen_names.insert(e.name).second)
      throw ParseError("duplicate element name '" + e.name + "'", lineno);

    e.node_a = std::string(fields[1]);
    e.node_b = std::string(fields[2]);
    if (e.node_a == e.node_b)
      throw ParseError("element '" + e.name + "' connects node '" + e.node_a + "' to itself",
                       lineno);
    try {
      e.value = parse_si_value(fields[3]);
    } catch (const ParseError& err) {
      throw ParseError(err.what(), lineno);
    }
    if (!(e.value > 0.0) || !std::isfinite(e.value))
      throw ParseError("element '" + e.name + "' value must be positive and finite", lineno);

    note_node(e.node_a);
    note_node(e.node_b);
    net.elements.push_back(std::move(e));
  }

  if (net.elements.empty())
    throw ParseError("netlist has no elements");
  if (port_name == ground_node)
    throw ParseError("port cannot be the ground node");
  if (!seen_nodes.count(port_name))
    throw ParseError("port node '" + port_name + "' does not appear in the netlist");
  return net;
}

RcNetwork read_netlist(const std::string& path, const std::string& port_name)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open netlist '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str(), port_name);
}

std::string serialize_netlist(const RcNetwork& net)
{
  std::string out = "* port " + net.port + "\n";
  char buf[64];
  for (const auto& e : net.elements) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out += e.name + ' ' + e.node_a + ' ' + e.node_b + ' ' + buf + '\n';
  }
  return out;
}

namespace {

struct Triplets
{
  std::vector<Eigen::Triplet<double>> t;

  void stamp(int a, int b, double g)
  {
    if (a >= 0)
      t.emplace_back(a, a, g);
    if (b >= 0)
      t.emplace_back(b, b, g);
    if (a >= 0 && b >= 0) {
      t.emplace_back(a, b, -g);
      t.emplace_back(b, a, -g);
    }
  }

  Eigen::SparseMatrix<double> build(int n) const
  {
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
  }
};

// Union-find over node indices, used for resistive connectivity.
struct Components
{
  std::vector<int> parent;
  explicit Components(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x)
  {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

MnaSystem assemble_mna(const RcNetwork& net)
{
  MnaSystem sys;
  for (const auto& n : net.nodes) {
    sys.node_index.emplace(n, static_cast<int>(sys.node_names.size()));
    sys.node_names.push_back(n);
  }
  auto it = sys.node_index.find(net.port);
  if (it == sys.node_index.end())
    throw DomainError("port node '" + net.port + "' not in network");
  sys.port = it->second;

  auto idx = [&](const std::string& n) -> int {
    return n == ground_node ? -1 : sys.node_index.at(n);
  };

  // A capacitor touching the port would put a pole at infinity in the
  // driving-point admittance; hang those capacitors off a private node
  // joined to the port by an epsilon resistor.
  int port_shadow = -1;
  for (const auto& e : net.elements) {
    if (e.kind == ElementKind::capacitor && (e.node_a == net.port || e.node_b == net.port)) {
      std::string name = net.port + "#eps";
      port_shadow = static_cast<int>(sys.node_names.size());
      sys.node_index.emplace(name, port_shadow);
      sys.node_names.push_back(name);
      sys.repairs.push_back({sys.port, port_shadow});
      break;
    }
  }
  const int n = sys.size();

  Triplets g, c, g_eps;
  std::vector<std::vector<int>> cap_neighbors(n);
  Components comp(n);
  for (const auto& e : net.elements) {
    int a = idx(e.node_a);
    int b = idx(e.node_b);
    if (e.kind == ElementKind::resistor) {
      g.stamp(a, b, 1.0 / e.value);
      sys.total_resistance += e.value;
      sys.min_resistance =
        sys.min_resistance == 0.0 ? e.value : std::min(sys.min_resistance, e.value);
      if (a >= 0 && b >= 0)
        comp.join(a, b);
    } else {
      if (port_shadow >= 0) {
        if (a == sys.port)
          a = port_shadow;
        if (b == sys.port)
          b = port_shadow;
      }
      c.stamp(a, b, e.value);
      sys.total_capacitance += e.value;
      sys.min_capacitance =
        sys.min_capacitance == 0.0 ? e.value : std::min(sys.min_capacitance, e.value);
      if (a >= 0 && b >= 0) {
        cap_neighbors[a].push_back(b);
        cap_neighbors[b].push_back(a);
      }
    }
  }
  if (port_shadow >= 0)
    comp.join(sys.port, port_shadow);

  // Nodes without a resistive path to the port: tie each such component to
  // a capacitively coupled node that is already connected, else to the port.
  for (bool progress = true; progress;) {
    progress = false;
    for (int v = 0; v < n; ++v) {
      if (comp.find(v) == comp.find(sys.port))
        continue;
      for (int u : cap_neighbors[v]) {
        if (comp.find(u) == comp.find(sys.port)) {
          sys.repairs.push_back({u, v});
          comp.join(v, u);
          progress = true;
          break;
        }
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (comp.find(v) != comp.find(sys.port)) {
      sys.repairs.push_back({sys.port, v});
      comp.join(v, sys.port);
    }
  }
  for (const auto& r : sys.repairs)
    g_eps.stamp(r.node_a, r.node_b, 1.0 / epsilon_resistance);

  sys.G_repair = g_eps.build(n);
  sys.G = g.build(n) + sys.G_repair;
  sys.C = c.build(n);
  sys.B = Eigen::VectorXd::Zero(n);
  sys.B(sys.port) = 1.0;
  sys.L = sys.B;

  // A pure RC net has no DC path to ground, so G itself is singular along
  // the all-ones vector; what must be invertible is G with the port row and
  // column removed (the port is driven).
  if (n > 1) {
    std::vector<int> keep;
    for (int v = 0; v < n; ++v)
      if (v != sys.port)
        keep.push_back(v);
    std::vector<int> map(n, -1);
    for (int k = 0; k < static_cast<int>(keep.size()); ++k)
      map[keep[k]] = k;
    std::vector<Eigen::Triplet<double>> t;
    for (int col = 0; col < sys.G.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator itg(sys.G, col); itg; ++itg)
        if (map[itg.row()] >= 0 && map[itg.col()] >= 0)
          t.emplace_back(map[itg.row()], map[itg.col()], itg.value());
    Eigen::SparseMatrix<double> gii(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
    gii.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gii);
    bool ok = ldlt.info() == Eigen::Success;
    std::string bad;
    if (ok) {
      const Eigen::VectorXd d = ldlt.vectorD();
      const double scale = d.cwiseAbs().maxCoeff();
      for (int k = 0; k < d.size(); ++k) {
        if (!(d(k) > 1e-14 * scale)) {
          ok = false;
          // The LDLT runs on a permuted matrix; report the permuted-back name.
          int orig = ldlt.permutationPinv().indices()(k);
          bad += (bad.empty() ? "" : ", ") + sys.node_names[keep[orig]];
        }
      }
    }
    if (!ok)
      throw NumericalError("conductance matrix singular after repair; isolated nodes: {" +
                           (bad.empty() ? std::string("?") : bad) + "}");
  }
  return sys;
}

} // namespace rcdcm
