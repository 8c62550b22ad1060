#include "doctest.h"

#include "clothsim/assembly.hpp"
#include "clothsim/constraints.hpp"
#include "clothsim/mesh.hpp"

#include <algorithm>
#include <random>

using namespace cloth;

namespace {

Mesh grid3x3() {
  std::vector<Eigen::Vector3d> nodes;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) nodes.push_back({0.5 * i, 0.5 * j, 0.0});
  std::vector<Element> elems;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      elems.push_back({ElementKind::Quad,
                       {j * 3 + i, j * 3 + i + 1, (j + 1) * 3 + i + 1, (j + 1) * 3 + i}});
  return build_mesh(nodes, elems);
}

ConstraintSystem make_system(const Mesh& mesh, const std::vector<int>& handles = {}) {
  const LumpedMass mass = assemble_lumped_mass(mesh);
  auto [tensors, rest] = assemble_metric_tensors(mesh, mass);
  return build_constraint_system(mesh, std::move(tensors), rest, handles);
}

Eigen::VectorXd wiggled(const Mesh& mesh, unsigned seed, double amp) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, amp);
  Eigen::VectorXd phi = stack_positions(mesh.rest_positions);
  for (int i = 0; i < phi.size(); ++i) phi[i] += g(rng);
  return phi;
}

}  // namespace

TEST_CASE("row order: metric blocks, then edges, then handle coordinates") {
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh, {0, 8});
  CHECK(sys.metric_rows() == 7);            // 1 E + 5 F + 1 G
  CHECK(sys.edges.size() == 8);
  CHECK(sys.handles.size() == 2);
  CHECK(sys.rows() == 7 + 8 + 6);
  // edge rows follow the mesh's sorted boundary list
  for (std::size_t e = 0; e < sys.edges.size(); ++e) {
    CHECK(sys.edges[e].a == mesh.boundary_edges[e][0]);
    CHECK(sys.edges[e].b == mesh.boundary_edges[e][1]);
    CHECK(sys.edges[e].rest_len2 == doctest::Approx(0.25).epsilon(1e-12));
  }
  CHECK(sys.handles[0].node == 0);
  CHECK(sys.handles[1].node == 8);
}

TEST_CASE("rest state satisfies every constraint") {
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh, {4});
  const Eigen::VectorXd phi = stack_positions(mesh.rest_positions);
  const Eigen::VectorXd values = eval_constraints(sys, phi, eval_jacobian(sys, phi));
  CHECK(values.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(relative_residual(sys, values) < 1e-12);
}

TEST_CASE("metric rows: Jacobian shortcut equals direct tensor contraction") {
  // Two genuinely different evaluation routes for the same quadratic form:
  // the tensor contraction sums T^{ij} <p_i, p_j> directly, while the
  // shortcut assembles grad C = 2 T kron (x|y|z) and halves J phi.
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh);
  const int n = mesh.node_count();
  const Eigen::VectorXd phi = wiggled(mesh, 3, 0.1);
  const Eigen::VectorXd values = eval_constraints(sys, phi, eval_jacobian(sys, phi));

  for (int r = 0; r < sys.metric_rows(); ++r) {
    const double direct = sys.tensors.rows[r].contract(phi, n) - sys.rest[r];
    CHECK(values[r] == doctest::Approx(direct).epsilon(1e-12));
  }
  // edge rows against plain squared lengths
  for (std::size_t e = 0; e < sys.edges.size(); ++e) {
    const Eigen::Vector3d d = node_position(phi, n, sys.edges[e].a) -
                              node_position(phi, n, sys.edges[e].b);
    const double direct = d.squaredNorm() - sys.edges[e].rest_len2;
    CHECK(values[sys.metric_rows() + static_cast<int>(e)] ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("handle rows subtract the target coordinate-wise") {
  const Mesh mesh = grid3x3();
  ConstraintSystem sys = make_system(mesh, {2});
  const int n = mesh.node_count();
  const Eigen::VectorXd phi = stack_positions(mesh.rest_positions);

  // default target is the rest position
  Eigen::VectorXd values = eval_constraints(sys, phi, eval_jacobian(sys, phi));
  const int h0 = sys.metric_rows() + static_cast<int>(sys.edges.size());
  CHECK(values.segment(h0, 3).cwiseAbs().maxCoeff() < 1e-15);

  set_handle_targets(sys, {mesh.rest_positions[2] + Eigen::Vector3d(0.1, -0.2, 0.3)});
  values = eval_constraints(sys, phi, eval_jacobian(sys, phi));
  CHECK(values[h0 + 0] == doctest::Approx(-0.1));
  CHECK(values[h0 + 1] == doctest::Approx(0.2));
  CHECK(values[h0 + 2] == doctest::Approx(-0.3));

  CHECK_THROWS_AS(set_handle_targets(sys, {}), std::runtime_error);  // wrong count
}

TEST_CASE("Jacobian matches central finite differences") {
  // Metric and edge rows are quadratic and handle rows linear in phi, so the
  // central difference is exact up to roundoff.
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh, {0});
  const Eigen::VectorXd phi = wiggled(mesh, 9, 0.05);
  const Eigen::MatrixXd J = Eigen::MatrixXd(eval_jacobian(sys, phi));

  const double h = 1e-6;
  double worst = 0.0;
  for (int c = 0; c < phi.size(); ++c) {
    Eigen::VectorXd p = phi, m = phi;
    p[c] += h;
    m[c] -= h;
    const Eigen::VectorXd Cp = eval_constraints(sys, p, eval_jacobian(sys, p));
    const Eigen::VectorXd Cm = eval_constraints(sys, m, eval_jacobian(sys, m));
    const Eigen::VectorXd fd = (Cp - Cm) / (2.0 * h);
    worst = std::max(worst, (fd - J.col(c)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("Jacobian columns live in the stacked blocks of the row support") {
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh, {4});
  const int n = mesh.node_count();
  const Eigen::VectorXd phi = wiggled(mesh, 21, 0.05);
  const Eigen::MatrixXd J = Eigen::MatrixXd(eval_jacobian(sys, phi));

  // metric row r, support node i: d C_r / d x_i = 2 sum_j T_ij x_j
  const TensorRow& row = sys.tensors.rows[0];
  for (std::size_t s = 0; s < row.support.size(); ++s) {
    const int i = row.support[s];
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    for (int p = row.offsets[s]; p < row.offsets[s + 1]; ++p) {
      const auto [j, coeff] = row.pairs[p];
      grad += 2.0 * coeff * node_position(phi, n, j);
    }
    CHECK(J(0, i) == doctest::Approx(grad.x()).epsilon(1e-12));
    CHECK(J(0, n + i) == doctest::Approx(grad.y()).epsilon(1e-12));
    CHECK(J(0, 2 * n + i) == doctest::Approx(grad.z()).epsilon(1e-12));
  }
  // nodes outside the support get exact zeros
  Eigen::VectorXd dense_row = J.row(0);
  for (int i = 0; i < n; ++i) {
    if (std::find(row.support.begin(), row.support.end(), i) != row.support.end())
      continue;
    CHECK(dense_row[i] == 0.0);
    CHECK(dense_row[n + i] == 0.0);
    CHECK(dense_row[2 * n + i] == 0.0);
  }

  // handle rows are coordinate selectors
  const int h0 = sys.metric_rows() + static_cast<int>(sys.edges.size());
  CHECK(J(h0 + 0, 4) == 1.0);
  CHECK(J(h0 + 1, n + 4) == 1.0);
  CHECK(J(h0 + 2, 2 * n + 4) == 1.0);
  CHECK(Eigen::VectorXd(J.row(h0)).cwiseAbs().sum() == 1.0);
}

TEST_CASE("rigid motions leave metric and edge rows feasible") {
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh);
  std::mt19937 rng(33);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Matrix3d A;
    for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = g(rng);
    const Eigen::Matrix3d R = Eigen::HouseholderQR<Eigen::Matrix3d>(A).householderQ();
    const Eigen::Vector3d t(g(rng), g(rng), g(rng));
    std::vector<Eigen::Vector3d> moved;
    for (const auto& p : mesh.rest_positions) moved.push_back(R * p + t);
    const Eigen::VectorXd phi = stack_positions(moved);
    const Eigen::VectorXd values = eval_constraints(sys, phi, eval_jacobian(sys, phi));
    CHECK(values.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("relative residual scales rows by their reference") {
  const Mesh mesh = grid3x3();
  const ConstraintSystem sys = make_system(mesh, {4});
  REQUIRE(sys.tolerance_refs.size() == sys.rows());
  // metric rows: rest E + G = 1/8 on this grid; edges 1/4; handles 1
  for (int r = 0; r < sys.metric_rows(); ++r)
    CHECK(sys.tolerance_refs[r] == doctest::Approx(0.125).epsilon(1e-12));
  for (int e = 0; e < 8; ++e)
    CHECK(sys.tolerance_refs[sys.metric_rows() + e] == doctest::Approx(0.25).epsilon(1e-12));
  for (int k = 0; k < 3; ++k)
    CHECK(sys.tolerance_refs[sys.metric_rows() + 8 + k] == 1.0);

  Eigen::VectorXd values = Eigen::VectorXd::Zero(sys.rows());
  values[0] = 0.25;  // metric row: ratio 2
  values[sys.metric_rows()] = 0.375;  // edge row: ratio 1.5
  CHECK(relative_residual(sys, values) == doctest::Approx(2.0));
}

TEST_CASE("builder rejects malformed handle lists") {
  const Mesh mesh = grid3x3();
  const LumpedMass mass = assemble_lumped_mass(mesh);
  {
    auto [tensors, rest] = assemble_metric_tensors(mesh, mass);
    CHECK_THROWS_AS(build_constraint_system(mesh, std::move(tensors), rest, {9}),
                    std::runtime_error);
  }
  {
    auto [tensors, rest] = assemble_metric_tensors(mesh, mass);
    CHECK_THROWS_AS(build_constraint_system(mesh, std::move(tensors), rest, {3, 3}),
                    std::runtime_error);
  }
}
