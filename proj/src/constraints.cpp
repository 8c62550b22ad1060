#include "clothsim/constraints.hpp"

#include <set>
#include <stdexcept>

namespace cloth {

ConstraintSystem build_constraint_system(const Mesh& mesh, MetricTensors tensors,
                                         const RestValues& rest,
                                         const std::vector<int>& handle_nodes) {
  ConstraintSystem system;
  system.node_count = mesh.node_count();
  system.tensors = std::move(tensors);

  if (system.tensors.rows.size() != static_cast<size_t>(rest.metric.size()))
    throw std::runtime_error("constraint system: rest values do not match tensor rows");
  if (mesh.boundary_edges.size() != static_cast<size_t>(rest.edge_len2.size()))
    throw std::runtime_error("constraint system: rest lengths do not match boundary edges");

  for (size_t b = 0; b < mesh.boundary_edges.size(); ++b) {
    EdgeRow row;
    row.a = mesh.boundary_edges[b][0];
    row.b = mesh.boundary_edges[b][1];
    row.rest_len2 = rest.edge_len2[static_cast<int>(b)];
    if (!(row.rest_len2 > 0.0))
      throw std::runtime_error("constraint system: boundary edge with zero rest length");
    system.edges.push_back(row);
  }

  std::set<int> seen;
  for (int v : handle_nodes) {
    if (v < 0 || v >= system.node_count)
      throw std::runtime_error("constraint system: handle node " + std::to_string(v) +
                               " out of range");
    if (!seen.insert(v).second)
      throw std::runtime_error("constraint system: handle node " + std::to_string(v) +
                               " listed twice");
    system.handles.push_back({v});
    system.handle_targets.push_back(mesh.rest_positions[v]);
  }

  const int nm = system.metric_rows();
  const int ne = static_cast<int>(system.edges.size());
  const int nh = static_cast<int>(system.handles.size());

  system.rest.resize(nm + ne);
  system.rest.head(nm) = rest.metric;
  system.rest.tail(ne) = rest.edge_len2;

  system.tolerance_refs.resize(nm + ne + 3 * nh);
  for (int r = 0; r < nm; ++r) {
    const int k = system.tensors.rows[r].node;
    const double ref = system.tensors.rest_E[k] + system.tensors.rest_G[k];
    if (!(ref > 0.0))
      throw std::runtime_error("constraint system: non-positive rest metric at node " +
                               std::to_string(k));
    system.tolerance_refs[r] = ref;
  }
  for (int b = 0; b < ne; ++b) system.tolerance_refs[nm + b] = system.edges[b].rest_len2;
  for (int h = 0; h < 3 * nh; ++h) system.tolerance_refs[nm + ne + h] = 1.0;

  return system;
}

void set_handle_targets(ConstraintSystem& system, std::vector<Eigen::Vector3d> targets) {
  if (targets.size() != system.handles.size())
    throw std::runtime_error("constraint system: wrong number of handle targets");
  system.handle_targets = std::move(targets);
}

Eigen::SparseMatrix<double> eval_jacobian(const ConstraintSystem& system,
                                          const Eigen::VectorXd& phi) {
  const int n = system.node_count;
  const int nm = system.metric_rows();
  const int ne = static_cast<int>(system.edges.size());
  const int nh = static_cast<int>(system.handles.size());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * system.tensors.stored_entries() / 2 + 6 * ne + 3 * nh);

  for (int r = 0; r < nm; ++r) {
    const TensorRow& row = system.tensors.rows[r];
    for (size_t s = 0; s < row.support.size(); ++s) {
      const int i = row.support[s];
      double gx = 0.0, gy = 0.0, gz = 0.0;
      for (int p = row.offsets[s]; p < row.offsets[s + 1]; ++p) {
        const auto& [j, c] = row.pairs[p];
        gx += c * phi[j];
        gy += c * phi[n + j];
        gz += c * phi[2 * n + j];
      }
      trips.emplace_back(r, i, 2.0 * gx);
      trips.emplace_back(r, n + i, 2.0 * gy);
      trips.emplace_back(r, 2 * n + i, 2.0 * gz);
    }
  }

  for (int b = 0; b < ne; ++b) {
    const EdgeRow& edge = system.edges[b];
    const int r = nm + b;
    const Eigen::Vector3d d =
        node_position(phi, n, edge.a) - node_position(phi, n, edge.b);
    for (int c = 0; c < 3; ++c) {
      trips.emplace_back(r, c * n + edge.a, 2.0 * d[c]);
      trips.emplace_back(r, c * n + edge.b, -2.0 * d[c]);
    }
  }

  for (int h = 0; h < nh; ++h) {
    const int v = system.handles[h].node;
    for (int c = 0; c < 3; ++c) trips.emplace_back(nm + ne + 3 * h + c, c * n + v, 1.0);
  }

  Eigen::SparseMatrix<double> jac(system.rows(), 3 * n);
  jac.setFromTriplets(trips.begin(), trips.end());
  return jac;
}

Eigen::VectorXd eval_constraints(const ConstraintSystem& system, const Eigen::VectorXd& phi,
                                 const Eigen::SparseMatrix<double>& jacobian) {
  const int nm = system.metric_rows();
  const int ne = static_cast<int>(system.edges.size());
  const int nh = static_cast<int>(system.handles.size());

  Eigen::VectorXd values = jacobian * phi;
  values.head(nm + ne) = 0.5 * values.head(nm + ne) - system.rest;
  for (int h = 0; h < nh; ++h)
    values.segment<3>(nm + ne + 3 * h) -= system.handle_targets[h];
  return values;
}

double relative_residual(const ConstraintSystem& system, const Eigen::VectorXd& values) {
  double residual = 0.0;
  for (int r = 0; r < values.size(); ++r)
    residual = std::max(residual, std::abs(values[r]) / system.tolerance_refs[r]);
  return residual;
}

}  // namespace cloth
