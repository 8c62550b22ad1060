#pragma once

#include "clothsim/mesh.hpp"

#include <map>
#include <string>
#include <vector>

namespace cloth {

// Generated meshes carry named node sets ("corner_u0v0", "inner_rim", ...) so
// scenarios can attach handles without hard-coding indices.
struct GeneratedMesh {
  Mesh mesh;
  std::map<std::string, std::vector<int>> tags;
};

enum class GridPlane { XY, XZ, YZ };

// Rectangular sheet of nx-by-ny nodes spanning width x height in the chosen
// plane (grid coordinates u, v map to the plane's two axes).  With triangles
// enabled every cell is split along a seeded random diagonal and interior
// nodes are jittered, which produces the irregular meshes used for the
// mesh-independence experiments.  Tags: corner_u0v0, corner_u1v0, corner_u0v1,
// corner_u1v1.
struct GridSpec {
  int nx = 2;
  int ny = 2;
  double width = 1.0;
  double height = 1.0;
  GridPlane plane = GridPlane::XY;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  bool triangles = false;
  double jitter = 0.0;  // std dev relative to node spacing, interior nodes only
  unsigned seed = 0;
};

GeneratedMesh generate_grid(const GridSpec& spec);

// Flat annulus of quads in the xy-plane, closed in the angular direction.
// Tags: inner_rim, outer_rim.
struct AnnulusSpec {
  double inner_radius = 0.09;
  double outer_radius = 0.15;
  int rings = 8;    // node count in the radial direction
  int sectors = 96; // node count around
};

GeneratedMesh generate_annulus(const AnnulusSpec& spec);

// Two-panel garment-like closed tube: an elliptic cylinder hanging along -z,
// flattened so the +-x extremes act as seams.  Tags: top_ring, bottom_ring,
// handle_a (top seam at +x), handle_b (top seam at -x).
struct TubeSpec {
  double semi_x = 0.15;
  double semi_y = 0.03;
  double height = 0.45;
  int around = 24;  // nodes per ring, must be even
  int levels = 15;  // rings along the axis
};

GeneratedMesh generate_tube(const TubeSpec& spec);

// Seeded Gaussian displacement of every node coordinate; the mesh is rebuilt
// so topology classification sees the perturbed geometry.
Mesh add_position_noise(const Mesh& mesh, double sigma, unsigned seed);

}  // namespace cloth
