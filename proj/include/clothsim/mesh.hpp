#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cloth {

enum class ElementKind { Quad, Tri };

struct Element {
  ElementKind kind = ElementKind::Quad;
  std::array<int, 4> nodes{-1, -1, -1, -1};  // nodes[3] unused for triangles

  int size() const { return kind == ElementKind::Quad ? 4 : 3; }
};

// Surface mesh with rest geometry and the topology classification used by the
// constraint builder.  Nodes are classified once at construction:
//   interior  = not touching any boundary edge
//   boundary  = touching at least one boundary edge
//   corner    = boundary node whose two incident boundary edges meet at an
//               angle deviating from pi by more than 30 degrees
struct Mesh {
  std::vector<Eigen::Vector3d> rest_positions;
  std::vector<Element> elements;

  std::vector<std::array<int, 2>> boundary_edges;  // (a,b) with a < b, sorted
  std::vector<int> interior_nodes;                 // ascending
  std::vector<int> boundary_nodes;                 // ascending
  std::vector<int> corner_nodes;                   // ascending

  int node_count() const { return static_cast<int>(rest_positions.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
};

// Validates connectivity (index range, manifold edges, coherent orientation,
// non-degenerate rest area) and classifies nodes.  Throws std::runtime_error
// with the offending entity named.
Mesh build_mesh(std::vector<Eigen::Vector3d> nodes, std::vector<Element> elements);

// Text format: lines "v x y z" and "f i j k [l]" with 1-based indices,
// '#' starts a comment.
Mesh load_mesh(const std::string& path);
Mesh load_mesh(std::istream& in, const std::string& origin);
void save_mesh(const Mesh& mesh, const std::string& path,
               const std::vector<std::pair<std::string, std::vector<int>>>& tags = {});

// Replaces the detected corner set (scenario-level override).
void override_corners(Mesh& mesh, const std::vector<int>& corners);

// Reference elements: quad on [-1,1]^2 with corners CCW from (-1,-1),
// triangle on (0,0),(1,0),(0,1).  N[i] evaluates to 1 at corner i.
void shape_values(ElementKind kind, double xi, double eta, double N[4]);
void shape_gradients(ElementKind kind, double xi, double eta, double dxi[4], double deta[4]);

struct QuadraturePoint {
  double xi, eta, w;
};

// 3x3 Gauss-Legendre for quads (weights sum to 4), symmetric 3-point rule for
// triangles (weights sum to 1/2).
const std::vector<QuadraturePoint>& reference_quadrature(ElementKind kind);

// Stacked coordinate layout used everywhere: phi = (x_1..x_n | y_1..y_n | z_1..z_n).
Eigen::VectorXd stack_positions(const std::vector<Eigen::Vector3d>& nodes);

inline Eigen::Vector3d node_position(const Eigen::VectorXd& phi, int n, int i) {
  return {phi[i], phi[n + i], phi[2 * n + i]};
}

struct SurfacePoint {
  Eigen::Vector3d position;
  Eigen::Vector3d t_xi;   // d(position)/d(xi)
  Eigen::Vector3d t_eta;  // d(position)/d(eta)
};

SurfacePoint element_map(const Mesh& mesh, int element, const Eigen::VectorXd& phi,
                         double xi, double eta);

}  // namespace cloth
