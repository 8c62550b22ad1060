#include "clothsim/mesh.hpp"

#include "clothsim/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cloth {

namespace {

constexpr double kCornerAngleThreshold = 30.0 * M_PI / 180.0;

std::array<int, 2> sorted_edge(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

}  // namespace

Mesh build_mesh(std::vector<Eigen::Vector3d> nodes, std::vector<Element> elements) {
  Mesh mesh;
  mesh.rest_positions = std::move(nodes);
  mesh.elements = std::move(elements);

  const int n = mesh.node_count();
  if (n < 3) throw std::runtime_error("mesh: need at least 3 nodes, got " + std::to_string(n));
  if (mesh.elements.empty()) throw std::runtime_error("mesh: no elements");

  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const Element& el = mesh.elements[e];
    for (int c = 0; c < el.size(); ++c) {
      const int v = el.nodes[c];
      if (v < 0 || v >= n)
        throw std::runtime_error("mesh: element " + std::to_string(e) +
                                 " references node " + std::to_string(v) + " out of range");
      for (int d = 0; d < c; ++d)
        if (el.nodes[d] == v)
          throw std::runtime_error("mesh: element " + std::to_string(e) +
                                   " repeats node " + std::to_string(v));
    }
  }

  // Edge incidence: a manifold edge appears in one element (boundary) or two
  // (interior); coherent orientation means the two traversals run opposite.
  struct EdgeUse {
    int count = 0;
    int direction_sum = 0;  // +1 when traversed low->high, -1 otherwise
  };
  std::map<std::array<int, 2>, EdgeUse> edge_uses;
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const Element& el = mesh.elements[e];
    const int m = el.size();
    for (int c = 0; c < m; ++c) {
      const int a = el.nodes[c];
      const int b = el.nodes[(c + 1) % m];
      EdgeUse& use = edge_uses[sorted_edge(a, b)];
      use.count += 1;
      use.direction_sum += (a < b) ? 1 : -1;
    }
  }

  std::set<int> boundary;
  for (const auto& [edge, use] : edge_uses) {
    if (use.count > 2)
      throw std::runtime_error("mesh: non-manifold edge (" + std::to_string(edge[0]) + "," +
                               std::to_string(edge[1]) + ") shared by " +
                               std::to_string(use.count) + " elements");
    if (use.count == 2 && use.direction_sum != 0)
      throw std::runtime_error("mesh: inconsistent orientation across edge (" +
                               std::to_string(edge[0]) + "," + std::to_string(edge[1]) + ")");
    if (use.count == 1) {
      mesh.boundary_edges.push_back(edge);
      boundary.insert(edge[0]);
      boundary.insert(edge[1]);
    }
  }

  mesh.boundary_nodes.assign(boundary.begin(), boundary.end());
  for (int v = 0; v < n; ++v)
    if (!boundary.count(v)) mesh.interior_nodes.push_back(v);

  // Corner test on the rest geometry.
  std::map<int, std::vector<int>> boundary_neighbors;
  for (const auto& edge : mesh.boundary_edges) {
    boundary_neighbors[edge[0]].push_back(edge[1]);
    boundary_neighbors[edge[1]].push_back(edge[0]);
  }
  for (const auto& [v, nbrs] : boundary_neighbors) {
    if (nbrs.size() != 2) {
      mesh.corner_nodes.push_back(v);  // pinched boundary, treat as corner
      continue;
    }
    const Eigen::Vector3d u = mesh.rest_positions[nbrs[0]] - mesh.rest_positions[v];
    const Eigen::Vector3d w = mesh.rest_positions[nbrs[1]] - mesh.rest_positions[v];
    const double angle = std::atan2(u.cross(w).norm(), u.dot(w));
    if (std::abs(M_PI - angle) > kCornerAngleThreshold) mesh.corner_nodes.push_back(v);
  }

  // Degenerate elements: zero rest area.
  const Eigen::VectorXd phi0 = stack_positions(mesh.rest_positions);
  double scale = 0.0;
  for (const auto& p : mesh.rest_positions) scale = std::max(scale, p.norm());
  for (int e = 0; e < mesh.element_count(); ++e) {
    double area = 0.0;
    for (const QuadraturePoint& q : reference_quadrature(mesh.elements[e].kind)) {
      const SurfacePoint s = element_map(mesh, e, phi0, q.xi, q.eta);
      const double E = s.t_xi.squaredNorm();
      const double G = s.t_eta.squaredNorm();
      const double F = s.t_xi.dot(s.t_eta);
      area += std::sqrt(std::abs(E * G - F * F)) * q.w;
    }
    if (!(area > 1e-12 * std::max(1.0, scale * scale)))
      throw std::runtime_error("mesh: element " + std::to_string(e) + " has zero rest area");
  }

  return mesh;
}

Mesh load_mesh(std::istream& in, const std::string& origin) {
  std::vector<Eigen::Vector3d> nodes;
  std::vector<Element> elements;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;

    const auto fail = [&](const std::string& what) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + what);
    };

    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(ls >> p.x() >> p.y() >> p.z())) fail("malformed vertex line");
      nodes.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      long v;
      while (ls >> v) idx.push_back(v);
      if (!ls.eof()) fail("malformed face line");
      if (idx.size() != 3 && idx.size() != 4)
        fail("face with " + std::to_string(idx.size()) + " vertices (want 3 or 4)");
      Element el;
      el.kind = idx.size() == 4 ? ElementKind::Quad : ElementKind::Tri;
      for (size_t c = 0; c < idx.size(); ++c) {
        if (idx[c] < 1 || idx[c] > static_cast<long>(nodes.size()))
          fail("face index " + std::to_string(idx[c]) + " out of range");
        el.nodes[c] = static_cast<int>(idx[c]) - 1;
      }
      elements.push_back(el);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }

  try {
    return build_mesh(std::move(nodes), std::move(elements));
  } catch (const std::runtime_error& err) {
    throw std::runtime_error(origin + ": " + err.what());
  }
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path);
  return load_mesh(in, path);
}

void save_mesh(const Mesh& mesh, const std::string& path,
               const std::vector<std::pair<std::string, std::vector<int>>>& tags) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path);
  for (const auto& p : mesh.rest_positions)
    out << "v " << format_double(p.x()) << " " << format_double(p.y()) << " "
        << format_double(p.z()) << "\n";
  for (const Element& e : mesh.elements) {
    out << "f";
    for (int i = 0; i < e.size(); ++i) out << " " << e.nodes[i] + 1;
    out << "\n";
  }
  // Tags ride along as comments so the loader stays oblivious to them.
  for (const auto& [name, nodes] : tags) {
    out << "# tag " << name;
    for (int v : nodes) out << " " << v;
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void override_corners(Mesh& mesh, const std::vector<int>& corners) {
  std::set<int> unique(corners.begin(), corners.end());
  for (int v : unique)
    if (v < 0 || v >= mesh.node_count())
      throw std::runtime_error("corner override: node " + std::to_string(v) + " out of range");
  mesh.corner_nodes.assign(unique.begin(), unique.end());
}

void shape_values(ElementKind kind, double xi, double eta, double N[4]) {
  if (kind == ElementKind::Quad) {
    N[0] = 0.25 * (1 - xi) * (1 - eta);
    N[1] = 0.25 * (1 + xi) * (1 - eta);
    N[2] = 0.25 * (1 + xi) * (1 + eta);
    N[3] = 0.25 * (1 - xi) * (1 + eta);
  } else {
    N[0] = 1 - xi - eta;
    N[1] = xi;
    N[2] = eta;
    N[3] = 0;
  }
}

void shape_gradients(ElementKind kind, double xi, double eta, double dxi[4], double deta[4]) {
  if (kind == ElementKind::Quad) {
    dxi[0] = -0.25 * (1 - eta);
    dxi[1] = 0.25 * (1 - eta);
    dxi[2] = 0.25 * (1 + eta);
    dxi[3] = -0.25 * (1 + eta);
    deta[0] = -0.25 * (1 - xi);
    deta[1] = -0.25 * (1 + xi);
    deta[2] = 0.25 * (1 + xi);
    deta[3] = 0.25 * (1 - xi);
  } else {
    dxi[0] = -1;
    dxi[1] = 1;
    dxi[2] = 0;
    dxi[3] = 0;
    deta[0] = -1;
    deta[1] = 0;
    deta[2] = 1;
    deta[3] = 0;
  }
}

const std::vector<QuadraturePoint>& reference_quadrature(ElementKind kind) {
  static const std::vector<QuadraturePoint> quad_rule = [] {
    const double g = std::sqrt(3.0 / 5.0);
    const double p[3] = {-g, 0.0, g};
    const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    std::vector<QuadraturePoint> rule;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) rule.push_back({p[i], p[j], w[i] * w[j]});
    return rule;
  }();
  static const std::vector<QuadraturePoint> tri_rule = {
      {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0},
      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
  };
  return kind == ElementKind::Quad ? quad_rule : tri_rule;
}

Eigen::VectorXd stack_positions(const std::vector<Eigen::Vector3d>& nodes) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd phi(3 * n);
  for (int i = 0; i < n; ++i) {
    phi[i] = nodes[i].x();
    phi[n + i] = nodes[i].y();
    phi[2 * n + i] = nodes[i].z();
  }
  return phi;
}

SurfacePoint element_map(const Mesh& mesh, int element, const Eigen::VectorXd& phi,
                         double xi, double eta) {
  const Element& el = mesh.elements[element];
  const int n = mesh.node_count();
  double N[4], dxi[4], deta[4];
  shape_values(el.kind, xi, eta, N);
  shape_gradients(el.kind, xi, eta, dxi, deta);

  SurfacePoint s;
  s.position.setZero();
  s.t_xi.setZero();
  s.t_eta.setZero();
  for (int c = 0; c < el.size(); ++c) {
    const Eigen::Vector3d p = node_position(phi, n, el.nodes[c]);
    s.position += N[c] * p;
    s.t_xi += dxi[c] * p;
    s.t_eta += deta[c] * p;
  }
  return s;
}

}  // namespace cloth
