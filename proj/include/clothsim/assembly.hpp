#pragma once

#include "clothsim/mesh.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

namespace cloth {

// Diagonal (row-sum lumped) mass built from the rest geometry.  Entries carry
// area units, so the total equals the rest surface area.
struct LumpedMass {
  Eigen::VectorXd m;  // one entry per node, all positive

  double total() const { return m.sum(); }
};

LumpedMass assemble_lumped_mass(const Mesh& mesh);

enum class MetricType { E = 0, F = 1, G = 2 };

// One row of a metric 3-tensor: the sparse symmetric matrix of coefficients
// T^{kij} for fixed (k, type), stored as full ordered (i,j) pairs grouped by i.
struct TensorRow {
  int node = -1;
  MetricType type = MetricType::E;
  std::vector<int> support;                   // distinct i, ascending
  std::vector<int> offsets;                   // support.size()+1 slices into pairs
  std::vector<std::pair<int, double>> pairs;  // (j, coefficient)

  // Contraction sum_{ij} T^{ij} <a_i, b_j> for same-length coordinate blocks.
  double contract(const Eigen::VectorXd& phi, int n) const;
};

// Time-independent tensors of the weighted first-fundamental-form averages.
// E and G rows exist for interior nodes, F rows for interior nodes and
// corners; rest_E/rest_G keep the rest-metric averages for every node since
// the residual normalizers need them at corners too.
struct MetricTensors {
  int node_count = 0;
  std::vector<TensorRow> rows;  // E block, then F block, then G block
  std::vector<double> rest_E;   // per node
  std::vector<double> rest_G;   // per node

  std::size_t stored_entries() const;
};

// Rest targets: one value per tensor row, then one squared rest length per
// boundary edge (mesh.boundary_edges order).
struct RestValues {
  Eigen::VectorXd metric;
  Eigen::VectorXd edge_len2;
};

std::pair<MetricTensors, RestValues> assemble_metric_tensors(const Mesh& mesh,
                                                             const LumpedMass& mass);

// Isometric bending pair: L is the cotangent Laplacian with rows scaled by the
// inverse lumped mass (quads are split along their shorter rest diagonal for
// this operator only), K = L^T M_L L is the PSD energy matrix applied to each
// coordinate block.  Rows exist for interior vertices only — the cotan stencil
// is a Laplacian approximation only where the one-ring is complete, and the
// free boundary carries no bending condition — so boundary rows of L (and the
// corresponding terms of K) are identically zero.
struct BendingOperator {
  Eigen::SparseMatrix<double> L;
  Eigen::SparseMatrix<double> K;
};

BendingOperator assemble_bending(const Mesh& mesh, const LumpedMass& mass);

// Debug dumps in plain-text triplet form ("E k i j value" / "row col value").
void dump_metric_tensors(const MetricTensors& tensors, std::ostream& out);
void dump_bending(const BendingOperator& bending, std::ostream& out);

}  // namespace cloth
