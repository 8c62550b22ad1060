#include "clothsim/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace cloth {

LumpedMass assemble_lumped_mass(const Mesh& mesh) {
  const int n = mesh.node_count();
  const Eigen::VectorXd phi0 = stack_positions(mesh.rest_positions);

  LumpedMass mass;
  mass.m = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& el = mesh.elements[e];
    for (const QuadraturePoint& q : reference_quadrature(el.kind)) {
      const SurfacePoint s = element_map(mesh, e, phi0, q.xi, q.eta);
      const double E = s.t_xi.squaredNorm();
      const double G = s.t_eta.squaredNorm();
      const double F = s.t_xi.dot(s.t_eta);
      const double det = E * G - F * F;
      if (det <= 0.0)
        throw std::runtime_error("assembly: element " + std::to_string(e) +
                                 " has non-positive metric determinant");
      const double dA = std::sqrt(det) * q.w;
      double N[4];
      shape_values(el.kind, q.xi, q.eta, N);
      for (int c = 0; c < el.size(); ++c) mass.m[el.nodes[c]] += N[c] * dA;
    }
  }
  for (int k = 0; k < n; ++k)
    if (!(mass.m[k] > 0.0))
      throw std::runtime_error("assembly: node " + std::to_string(k) +
                               " has non-positive lumped mass");
  return mass;
}

double TensorRow::contract(const Eigen::VectorXd& phi, int n) const {
  double acc = 0.0;
  for (size_t s = 0; s < support.size(); ++s) {
    const int i = support[s];
    double dx = 0.0, dy = 0.0, dz = 0.0;
    for (int p = offsets[s]; p < offsets[s + 1]; ++p) {
      const auto& [j, c] = pairs[p];
      dx += c * phi[j];
      dy += c * phi[n + j];
      dz += c * phi[2 * n + j];
    }
    acc += dx * phi[i] + dy * phi[n + i] + dz * phi[2 * n + i];
  }
  return acc;
}

std::size_t MetricTensors::stored_entries() const {
  std::size_t total = 0;
  for (const TensorRow& row : rows) total += row.pairs.size();
  return total;
}

namespace {

using PairMap = std::map<std::pair<int, int>, double>;

TensorRow freeze_row(int node, MetricType type, const PairMap& acc, double inv_mass) {
  TensorRow row;
  row.node = node;
  row.type = type;
  row.offsets.push_back(0);
  int current = -1;
  for (const auto& [ij, value] : acc) {
    if (ij.first != current) {
      if (current >= 0) row.offsets.push_back(static_cast<int>(row.pairs.size()));
      row.support.push_back(ij.first);
      current = ij.first;
    }
    row.pairs.emplace_back(ij.second, value * inv_mass);
  }
  if (current >= 0) row.offsets.push_back(static_cast<int>(row.pairs.size()));
  return row;
}

}  // namespace

std::pair<MetricTensors, RestValues> assemble_metric_tensors(const Mesh& mesh,
                                                             const LumpedMass& mass) {
  const int n = mesh.node_count();
  const Eigen::VectorXd phi0 = stack_positions(mesh.rest_positions);

  // Accumulate rows for every node; the constrained subset is selected when
  // freezing, and the full set feeds the per-node rest metric averages.
  std::vector<PairMap> acc_E(n), acc_F(n), acc_G(n);

  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& el = mesh.elements[e];
    const int m = el.size();
    for (const QuadraturePoint& q : reference_quadrature(el.kind)) {
      const SurfacePoint s = element_map(mesh, e, phi0, q.xi, q.eta);
      const double E = s.t_xi.squaredNorm();
      const double G = s.t_eta.squaredNorm();
      const double F = s.t_xi.dot(s.t_eta);
      const double det = E * G - F * F;
      if (det <= 0.0)
        throw std::runtime_error("assembly: element " + std::to_string(e) +
                                 " has non-positive metric determinant at a quadrature point");
      const double dA = std::sqrt(det) * q.w;
      double N[4], dxi[4], deta[4];
      shape_values(el.kind, q.xi, q.eta, N);
      shape_gradients(el.kind, q.xi, q.eta, dxi, deta);
      for (int k = 0; k < m; ++k) {
        const double NkdA = N[k] * dA;
        if (NkdA == 0.0) continue;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            const std::pair<int, int> ij{el.nodes[i], el.nodes[j]};
            acc_E[el.nodes[k]][ij] += NkdA * dxi[i] * dxi[j];
            acc_F[el.nodes[k]][ij] += 0.5 * NkdA * (dxi[i] * deta[j] + deta[i] * dxi[j]);
            acc_G[el.nodes[k]][ij] += NkdA * deta[i] * deta[j];
          }
        }
      }
    }
  }

  MetricTensors tensors;
  tensors.node_count = n;
  tensors.rest_E.resize(n);
  tensors.rest_G.resize(n);
  for (int k = 0; k < n; ++k) {
    tensors.rest_E[k] = freeze_row(k, MetricType::E, acc_E[k], 1.0 / mass.m[k]).contract(phi0, n);
    tensors.rest_G[k] = freeze_row(k, MetricType::G, acc_G[k], 1.0 / mass.m[k]).contract(phi0, n);
  }

  std::vector<int> f_nodes = mesh.interior_nodes;
  f_nodes.insert(f_nodes.end(), mesh.corner_nodes.begin(), mesh.corner_nodes.end());
  std::sort(f_nodes.begin(), f_nodes.end());

  for (int k : mesh.interior_nodes)
    tensors.rows.push_back(freeze_row(k, MetricType::E, acc_E[k], 1.0 / mass.m[k]));
  for (int k : f_nodes)
    tensors.rows.push_back(freeze_row(k, MetricType::F, acc_F[k], 1.0 / mass.m[k]));
  for (int k : mesh.interior_nodes)
    tensors.rows.push_back(freeze_row(k, MetricType::G, acc_G[k], 1.0 / mass.m[k]));

  RestValues rest;
  rest.metric.resize(static_cast<int>(tensors.rows.size()));
  for (size_t r = 0; r < tensors.rows.size(); ++r)
    rest.metric[static_cast<int>(r)] = tensors.rows[r].contract(phi0, n);

  rest.edge_len2.resize(static_cast<int>(mesh.boundary_edges.size()));
  for (size_t b = 0; b < mesh.boundary_edges.size(); ++b) {
    const auto& edge = mesh.boundary_edges[b];
    rest.edge_len2[static_cast<int>(b)] =
        (mesh.rest_positions[edge[0]] - mesh.rest_positions[edge[1]]).squaredNorm();
  }

  return {std::move(tensors), std::move(rest)};
}

BendingOperator assemble_bending(const Mesh& mesh, const LumpedMass& mass) {
  const int n = mesh.node_count();

  // The cotangent row approximates the pointwise Laplacian only where the
  // one-ring is complete, so rows are kept for interior vertices and dropped
  // at the boundary (free-edge condition).  Keeping boundary rows makes the
  // energy diverge ~1/h for any field with a normal derivative at the edge.
  std::vector<char> interior(n, 0);
  for (int i : mesh.interior_nodes) interior[i] = 1;

  std::vector<Eigen::Triplet<double>> weights;
  const auto add_triangle = [&](int a, int b, int c) {
    const Eigen::Vector3d& pa = mesh.rest_positions[a];
    const Eigen::Vector3d& pb = mesh.rest_positions[b];
    const Eigen::Vector3d& pc = mesh.rest_positions[c];
    const double area2 = (pb - pa).cross(pc - pa).norm();
    if (area2 < 1e-14) return;
    const int tri[3] = {a, b, c};
    for (int v = 0; v < 3; ++v) {
      const int i = tri[(v + 1) % 3];
      const int j = tri[(v + 2) % 3];
      const Eigen::Vector3d u = mesh.rest_positions[i] - mesh.rest_positions[tri[v]];
      const Eigen::Vector3d w = mesh.rest_positions[j] - mesh.rest_positions[tri[v]];
      // half cotangent of the angle opposite edge (i,j)
      const double half_cot = 0.5 * u.dot(w) / u.cross(w).norm();
      if (interior[i]) {
        weights.emplace_back(i, j, half_cot);
        weights.emplace_back(i, i, -half_cot);
      }
      if (interior[j]) {
        weights.emplace_back(j, i, half_cot);
        weights.emplace_back(j, j, -half_cot);
      }
    }
  };

  for (const Element& el : mesh.elements) {
    if (el.kind == ElementKind::Tri) {
      add_triangle(el.nodes[0], el.nodes[1], el.nodes[2]);
      continue;
    }
    const double d02 =
        (mesh.rest_positions[el.nodes[0]] - mesh.rest_positions[el.nodes[2]]).norm();
    const double d13 =
        (mesh.rest_positions[el.nodes[1]] - mesh.rest_positions[el.nodes[3]]).norm();
    if (d13 < d02) {
      add_triangle(el.nodes[0], el.nodes[1], el.nodes[3]);
      add_triangle(el.nodes[1], el.nodes[2], el.nodes[3]);
    } else {
      add_triangle(el.nodes[0], el.nodes[1], el.nodes[2]);
      add_triangle(el.nodes[0], el.nodes[2], el.nodes[3]);
    }
  }

  Eigen::SparseMatrix<double> W(n, n);
  W.setFromTriplets(weights.begin(), weights.end());

  Eigen::VectorXd inv_m = mass.m.cwiseInverse();
  BendingOperator bending;
  bending.L = inv_m.asDiagonal() * W;
  // W is row-restricted (not symmetric), so the transpose is required here.
  bending.K = W.transpose() * (inv_m.asDiagonal() * W);
  return bending;
}

void dump_metric_tensors(const MetricTensors& tensors, std::ostream& out) {
  static const char* kTypeNames[] = {"E", "F", "G"};
  for (const TensorRow& row : tensors.rows) {
    for (size_t s = 0; s < row.support.size(); ++s) {
      for (int p = row.offsets[s]; p < row.offsets[s + 1]; ++p) {
        out << kTypeNames[static_cast<int>(row.type)] << ' ' << row.node << ' '
            << row.support[s] << ' ' << row.pairs[p].first << ' ' << row.pairs[p].second << '\n';
      }
    }
  }
}

void dump_bending(const BendingOperator& bending, std::ostream& out) {
  for (int col = 0; col < bending.K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(bending.K, col); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace cloth
