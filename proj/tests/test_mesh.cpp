#include "doctest.h"

#include "clothsim/mesh.hpp"

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

using namespace cloth;

namespace {

Mesh unit_quad() {
  return build_mesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                    {{ElementKind::Quad, {0, 1, 2, 3}}});
}

// 3x3 nodes, four unit half-size quads covering [0,1]^2.
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

}  // namespace

TEST_CASE("single quad: boundary, corners, no interior") {
  const Mesh m = unit_quad();
  CHECK(m.node_count() == 4);
  CHECK(m.element_count() == 1);
  REQUIRE(m.boundary_edges.size() == 4);
  // sorted pairs, lexicographic order
  CHECK(m.boundary_edges[0] == std::array<int, 2>{0, 1});
  CHECK(m.boundary_edges[1] == std::array<int, 2>{0, 3});
  CHECK(m.boundary_edges[2] == std::array<int, 2>{1, 2});
  CHECK(m.boundary_edges[3] == std::array<int, 2>{2, 3});
  CHECK(m.interior_nodes.empty());
  CHECK(m.boundary_nodes == std::vector<int>{0, 1, 2, 3});
  CHECK(m.corner_nodes == std::vector<int>{0, 1, 2, 3});  // 90-degree turns
}

TEST_CASE("3x3 grid classification") {
  const Mesh m = grid3x3();
  CHECK(m.interior_nodes == std::vector<int>{4});
  CHECK(m.boundary_nodes == std::vector<int>{0, 1, 2, 3, 5, 6, 7, 8});
  // edge mid-nodes sit on straight boundary runs, so only the four corners count
  CHECK(m.corner_nodes == std::vector<int>{0, 2, 6, 8});
  CHECK(m.boundary_edges.size() == 8);
}

TEST_CASE("shape functions interpolate corners and sum to one") {
  const double corners_quad[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  double N[4];
  for (int c = 0; c < 4; ++c) {
    shape_values(ElementKind::Quad, corners_quad[c][0], corners_quad[c][1], N);
    for (int i = 0; i < 4; ++i) CHECK(N[i] == doctest::Approx(i == c ? 1.0 : 0.0));
  }
  const double corners_tri[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  for (int c = 0; c < 3; ++c) {
    shape_values(ElementKind::Tri, corners_tri[c][0], corners_tri[c][1], N);
    for (int i = 0; i < 3; ++i) CHECK(N[i] == doctest::Approx(i == c ? 1.0 : 0.0));
  }

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double xi = u(rng), eta = u(rng);
    shape_values(ElementKind::Quad, xi, eta, N);
    CHECK(N[0] + N[1] + N[2] + N[3] == doctest::Approx(1.0));
    shape_values(ElementKind::Tri, 0.25 * (xi + 1), 0.25 * (eta + 1), N);
    CHECK(N[0] + N[1] + N[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("shape gradients match finite differences") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const double h = 1e-6;
  double Np[4], Nm[4], dxi[4], deta[4];
  for (ElementKind kind : {ElementKind::Quad, ElementKind::Tri}) {
    for (int trial = 0; trial < 10; ++trial) {
      double xi = u(rng), eta = u(rng);
      if (kind == ElementKind::Tri) {
        xi = 0.25 * (xi + 1);
        eta = 0.25 * (eta + 1);
      }
      shape_gradients(kind, xi, eta, dxi, deta);
      shape_values(kind, xi + h, eta, Np);
      shape_values(kind, xi - h, eta, Nm);
      for (int i = 0; i < (kind == ElementKind::Quad ? 4 : 3); ++i)
        CHECK(dxi[i] == doctest::Approx((Np[i] - Nm[i]) / (2 * h)).epsilon(1e-6));
      shape_values(kind, xi, eta + h, Np);
      shape_values(kind, xi, eta - h, Nm);
      for (int i = 0; i < (kind == ElementKind::Quad ? 4 : 3); ++i)
        CHECK(deta[i] == doctest::Approx((Np[i] - Nm[i]) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("quadrature weights and polynomial exactness") {
  const auto& quad = reference_quadrature(ElementKind::Quad);
  REQUIRE(quad.size() == 9);
  double wsum = 0.0, integral = 0.0;
  for (const auto& q : quad) {
    wsum += q.w;
    integral += q.w * q.xi * q.xi * q.xi * q.xi * q.eta * q.eta;
  }
  CHECK(wsum == doctest::Approx(4.0));
  // int_{-1}^{1} xi^4 dxi * int_{-1}^{1} eta^2 deta = (2/5)(2/3)
  CHECK(integral == doctest::Approx(4.0 / 15.0));

  const auto& tri = reference_quadrature(ElementKind::Tri);
  REQUIRE(tri.size() == 3);
  double tsum = 0.0, txi = 0.0;
  for (const auto& q : tri) {
    tsum += q.w;
    txi += q.w * q.xi;
  }
  CHECK(tsum == doctest::Approx(0.5));
  CHECK(txi == doctest::Approx(1.0 / 6.0));  // int over reference triangle of xi
}

TEST_CASE("stacked layout and element map") {
  const Mesh m = unit_quad();
  const Eigen::VectorXd phi = stack_positions(m.rest_positions);
  REQUIRE(phi.size() == 12);
  CHECK(phi[1] == 1.0);            // x of node 1
  CHECK(phi[4 + 2] == 1.0);        // y of node 2
  CHECK(phi[2 * 4 + 3] == 0.0);    // z of node 3
  CHECK(node_position(phi, 4, 2) == Eigen::Vector3d(1, 1, 0));

  const SurfacePoint center = element_map(m, 0, phi, 0.0, 0.0);
  CHECK(center.position.isApprox(Eigen::Vector3d(0.5, 0.5, 0.0)));
  CHECK(center.t_xi.isApprox(Eigen::Vector3d(0.5, 0.0, 0.0)));
  CHECK(center.t_eta.isApprox(Eigen::Vector3d(0.0, 0.5, 0.0)));
}

TEST_CASE("invalid meshes are rejected with the culprit named") {
  // node index out of range
  CHECK_THROWS_WITH_AS(
      build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{ElementKind::Tri, {0, 1, 3, -1}}}),
      doctest::Contains("element 0"), std::runtime_error);
  // repeated node inside one element
  CHECK_THROWS_AS(
      build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{ElementKind::Tri, {0, 1, 1, -1}}}),
      std::runtime_error);
  // fewer than 3 nodes
  CHECK_THROWS_AS(build_mesh({{0, 0, 0}, {1, 0, 0}}, {}), std::runtime_error);
  // no elements
  CHECK_THROWS_AS(build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {}), std::runtime_error);

  // an edge shared by three elements is non-manifold
  CHECK_THROWS_WITH_AS(
      build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}},
                 {{ElementKind::Tri, {0, 1, 2, -1}},
                  {ElementKind::Tri, {1, 0, 3, -1}},
                  {ElementKind::Tri, {0, 1, 4, -1}}}),
      doctest::Contains("non-manifold"), std::runtime_error);

  // both triangles traverse edge (1,2) in the same direction: orientation clash
  CHECK_THROWS_WITH_AS(
      build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}},
                 {{ElementKind::Tri, {0, 1, 2, -1}}, {ElementKind::Tri, {3, 1, 2, -1}}}),
      doctest::Contains("orientation"), std::runtime_error);

  // degenerate rest geometry (collinear triangle)
  CHECK_THROWS_WITH_AS(
      build_mesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{ElementKind::Tri, {0, 1, 2, -1}}}),
      doctest::Contains("zero rest area"), std::runtime_error);
}

TEST_CASE("corner detection follows the boundary angle") {
  // Trapezoid boundary chain: node 1 sits on a straight run between 0 and 2,
  // displacing it upward bends the boundary there.
  const auto trapezoid = [](double bump) {
    return build_mesh({{0, 0, 0}, {1, bump, 0}, {2, 0, 0}, {2, 1, 0}, {0, 1, 0}},
                      {{ElementKind::Tri, {0, 1, 4, -1}},
                       {ElementKind::Tri, {1, 3, 4, -1}},
                       {ElementKind::Tri, {1, 2, 3, -1}}});
  };
  const Mesh straight = trapezoid(0.0);
  CHECK(straight.corner_nodes == std::vector<int>{0, 2, 3, 4});
  // a 53-degree kink at node 1 exceeds the 30-degree threshold
  const Mesh kinked = trapezoid(0.5);
  CHECK(kinked.corner_nodes == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("corner override replaces the detected set") {
  Mesh m = grid3x3();
  override_corners(m, {1, 7});
  CHECK(m.corner_nodes == std::vector<int>{1, 7});
  CHECK_THROWS_AS(override_corners(m, {99}), std::runtime_error);
}

TEST_CASE("mesh file round trip is exact") {
  const Mesh m = grid3x3();
  const std::string path =
      (std::filesystem::temp_directory_path() / "roundtrip_mesh.txt").string();
  save_mesh(m, path, {{"pins", {0, 2}}});
  const Mesh back = load_mesh(path);
  REQUIRE(back.node_count() == m.node_count());
  for (int i = 0; i < m.node_count(); ++i)
    CHECK(back.rest_positions[i] == m.rest_positions[i]);  // bitwise
  REQUIRE(back.element_count() == m.element_count());
  for (int e = 0; e < m.element_count(); ++e) {
    CHECK(back.elements[e].kind == m.elements[e].kind);
    CHECK(back.elements[e].nodes == m.elements[e].nodes);
  }
  std::remove(path.c_str());
}

TEST_CASE("mesh loader reports file and line") {
  std::istringstream bad("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  CHECK_THROWS_WITH_AS(load_mesh(bad, "demo.txt"), doctest::Contains("demo.txt"),
                       std::runtime_error);
  std::istringstream short_v("v 0 0\n");
  CHECK_THROWS_AS(load_mesh(short_v, "demo.txt"), std::runtime_error);
  std::istringstream junk("v 0 0 0\nwhat 1 2\n");
  CHECK_THROWS_WITH_AS(load_mesh(junk, "demo.txt"), doctest::Contains(":2"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_mesh("/no/such/file.txt"), std::runtime_error);
}
