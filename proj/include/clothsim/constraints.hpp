#pragma once

#include "clothsim/assembly.hpp"
#include "clothsim/mesh.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace cloth {

struct EdgeRow {
  int a = -1, b = -1;
  double rest_len2 = 0.0;
};

struct HandleRow {
  int node = -1;  // contributes one row per coordinate, x then y then z
};

// Full constraint stack in fixed row order: metric tensor rows (E block,
// F block, G block), boundary edge rows, then 3 rows per handle.  Evaluation
// is read-only; handle targets are the only state updated between steps.
struct ConstraintSystem {
  int node_count = 0;
  MetricTensors tensors;
  std::vector<EdgeRow> edges;
  std::vector<HandleRow> handles;
  std::vector<Eigen::Vector3d> handle_targets;  // one per handle

  Eigen::VectorXd rest;            // targets for metric + edge rows
  Eigen::VectorXd tolerance_refs;  // per row; metric rows use rest E+G, edges
                                   // their squared length, handles 1

  int metric_rows() const { return static_cast<int>(tensors.rows.size()); }
  int rows() const {
    return metric_rows() + static_cast<int>(edges.size()) + 3 * static_cast<int>(handles.size());
  }
};

ConstraintSystem build_constraint_system(const Mesh& mesh, MetricTensors tensors,
                                         const RestValues& rest,
                                         const std::vector<int>& handle_nodes);

void set_handle_targets(ConstraintSystem& system, std::vector<Eigen::Vector3d> targets);

// Jacobian of the constraint vector at phi, rows as above, columns in the
// stacked (x | y | z) layout.  Metric rows are 2 [T kron x, T kron y, T kron z].
Eigen::SparseMatrix<double> eval_jacobian(const ConstraintSystem& system,
                                          const Eigen::VectorXd& phi);

// Constraint values through the Jacobian shortcut: metric and edge rows are
// (J phi)/2 - rest, handle rows (J phi) - target.
Eigen::VectorXd eval_constraints(const ConstraintSystem& system, const Eigen::VectorXd& phi,
                                 const Eigen::SparseMatrix<double>& jacobian);

// max_k |C_k| / tolerance_ref_k, zero for an empty system.
double relative_residual(const ConstraintSystem& system, const Eigen::VectorXd& values);

}  // namespace cloth
