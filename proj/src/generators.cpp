#include "clothsim/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cloth {

namespace {

Eigen::Vector3d plane_point(GridPlane plane, double u, double v) {
  switch (plane) {
    case GridPlane::XY: return {u, v, 0.0};
    case GridPlane::XZ: return {u, 0.0, v};
    case GridPlane::YZ: return {0.0, u, v};
  }
  throw std::runtime_error("unknown grid plane");
}

}  // namespace

GeneratedMesh generate_grid(const GridSpec& spec) {
  if (spec.nx < 2 || spec.ny < 2)
    throw std::runtime_error("grid needs at least 2x2 nodes");
  if (spec.width <= 0.0 || spec.height <= 0.0)
    throw std::runtime_error("grid needs positive width and height");
  if (spec.jitter < 0.0) throw std::runtime_error("grid jitter must be >= 0");

  const int nx = spec.nx, ny = spec.ny;
  const double du = spec.width / (nx - 1);
  const double dv = spec.height / (ny - 1);
  std::mt19937 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Jitter is capped below the threshold where a cell could fold over, so any
  // diagonal split of any cell keeps positive orientation.
  const double cap = 0.16 * std::min(du, dv);

  std::vector<Eigen::Vector3d> nodes(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double u = du * i;
      double v = dv * j;
      if (spec.jitter > 0.0 && i > 0 && i < nx - 1 && j > 0 && j < ny - 1) {
        u += std::clamp(spec.jitter * du * gauss(rng), -cap, cap);
        v += std::clamp(spec.jitter * dv * gauss(rng), -cap, cap);
      }
      nodes[static_cast<std::size_t>(j) * nx + i] =
          spec.origin + plane_point(spec.plane, u, v);
    }
  }

  std::vector<Element> elements;
  std::bernoulli_distribution coin(0.5);
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i;
      const int b = j * nx + i + 1;
      const int c = (j + 1) * nx + i + 1;
      const int d = (j + 1) * nx + i;
      if (!spec.triangles) {
        elements.push_back(Element{ElementKind::Quad, {a, b, c, d}});
      } else if (coin(rng)) {
        elements.push_back(Element{ElementKind::Tri, {a, b, c, -1}});
        elements.push_back(Element{ElementKind::Tri, {a, c, d, -1}});
      } else {
        elements.push_back(Element{ElementKind::Tri, {a, b, d, -1}});
        elements.push_back(Element{ElementKind::Tri, {b, c, d, -1}});
      }
    }
  }

  GeneratedMesh out;
  out.mesh = build_mesh(nodes, elements);
  out.tags["corner_u0v0"] = {0};
  out.tags["corner_u1v0"] = {nx - 1};
  out.tags["corner_u0v1"] = {(ny - 1) * nx};
  out.tags["corner_u1v1"] = {(ny - 1) * nx + nx - 1};
  return out;
}

GeneratedMesh generate_annulus(const AnnulusSpec& spec) {
  if (spec.rings < 2 || spec.sectors < 3)
    throw std::runtime_error("annulus needs >= 2 rings and >= 3 sectors");
  if (spec.inner_radius <= 0.0 || spec.outer_radius <= spec.inner_radius)
    throw std::runtime_error("annulus needs 0 < inner_radius < outer_radius");

  const int R = spec.rings, S = spec.sectors;
  std::vector<Eigen::Vector3d> nodes(static_cast<std::size_t>(R) * S);
  for (int i = 0; i < R; ++i) {
    const double r = spec.inner_radius +
                     (spec.outer_radius - spec.inner_radius) * i / (R - 1);
    for (int j = 0; j < S; ++j) {
      const double th = 2.0 * M_PI * j / S;
      nodes[static_cast<std::size_t>(i) * S + j] = {r * std::cos(th),
                                                    r * std::sin(th), 0.0};
    }
  }

  std::vector<Element> elements;
  for (int i = 0; i + 1 < R; ++i) {
    for (int j = 0; j < S; ++j) {
      const int jn = (j + 1) % S;
      elements.push_back(Element{
          ElementKind::Quad, {i * S + j, (i + 1) * S + j, (i + 1) * S + jn,
                              i * S + jn}});
    }
  }

  GeneratedMesh out;
  out.mesh = build_mesh(nodes, elements);
  for (int j = 0; j < S; ++j) out.tags["inner_rim"].push_back(j);
  for (int j = 0; j < S; ++j) out.tags["outer_rim"].push_back((R - 1) * S + j);
  return out;
}

GeneratedMesh generate_tube(const TubeSpec& spec) {
  if (spec.around < 6 || spec.around % 2 != 0)
    throw std::runtime_error("tube needs an even node count >= 6 around");
  if (spec.levels < 2) throw std::runtime_error("tube needs >= 2 levels");
  if (spec.semi_x <= 0.0 || spec.semi_y <= 0.0 || spec.height <= 0.0)
    throw std::runtime_error("tube needs positive semi-axes and height");

  const int S = spec.around, L = spec.levels;
  std::vector<Eigen::Vector3d> nodes(static_cast<std::size_t>(S) * L);
  for (int i = 0; i < L; ++i) {
    const double z = -spec.height * i / (L - 1);
    for (int j = 0; j < S; ++j) {
      const double th = 2.0 * M_PI * j / S;
      nodes[static_cast<std::size_t>(i) * S + j] = {spec.semi_x * std::cos(th),
                                                    spec.semi_y * std::sin(th),
                                                    z};
    }
  }

  std::vector<Element> elements;
  for (int i = 0; i + 1 < L; ++i) {
    for (int j = 0; j < S; ++j) {
      const int jn = (j + 1) % S;
      elements.push_back(Element{
          ElementKind::Quad, {i * S + j, (i + 1) * S + j, (i + 1) * S + jn,
                              i * S + jn}});
    }
  }

  GeneratedMesh out;
  out.mesh = build_mesh(nodes, elements);
  for (int j = 0; j < S; ++j) out.tags["top_ring"].push_back(j);
  for (int j = 0; j < S; ++j) out.tags["bottom_ring"].push_back((L - 1) * S + j);
  out.tags["handle_a"] = {0};
  out.tags["handle_b"] = {S / 2};
  return out;
}

Mesh add_position_noise(const Mesh& mesh, double sigma, unsigned seed) {
  if (sigma < 0.0) throw std::runtime_error("noise sigma must be >= 0");
  if (sigma == 0.0) return mesh;
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<Eigen::Vector3d> nodes = mesh.rest_positions;
  for (auto& p : nodes)
    for (int c = 0; c < 3; ++c) p[c] += gauss(rng);
  return build_mesh(nodes, mesh.elements);
}

}  // namespace cloth
