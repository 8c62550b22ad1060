#pragma once

#include "clothsim/assembly.hpp"
#include "clothsim/io.hpp"
#include "clothsim/mesh.hpp"

#include <vector>

namespace cloth {

// Deformed area of one element by the same quadrature used in assembly.
double element_area(const Mesh& mesh, const Eigen::VectorXd& phi, int element);
std::vector<double> element_areas(const Mesh& mesh, const Eigen::VectorXd& phi);
double total_area(const Mesh& mesh, const Eigen::VectorXd& phi);

// Per-frame area conservation series against the trajectory's first frame.
struct AreaMetrics {
  std::vector<double> times;
  std::vector<double> total;                    // A(t)
  std::vector<double> e_total;                  // |A(t) - A0| / A0
  std::vector<double> e_mean;                   // mean_e |a_e(t) - a_e(0)| / a_e(0)
  std::vector<double> dispersion;               // e_mean + 2 sqrt(Var), population variance
  std::vector<Eigen::VectorXd> signed_element;  // (a_e(t) - a_e(0)) / a_e(0)
};

AreaMetrics area_metrics(const Mesh& mesh, const Trajectory& trajectory);

// Cusick-style drape coefficient: the cloth's xy-projection (union over all
// elements) is rasterized on a uniform grid of cell centers and compared to
// the annulus ring area pi (outer^2 - inner^2).
struct DrapeResult {
  double coefficient = 0.0;     // percent
  double projected_area = 0.0;  // m^2
  double ring_area = 0.0;       // m^2
  long covered_cells = 0;
  double cell_size = 0.0;
};

DrapeResult drape_coefficient(const Mesh& mesh, const Eigen::VectorXd& phi,
                              double inner_radius, double outer_radius,
                              double cell_size = 1e-3);

// Frame range [begin, end); end = -1 means "through the last frame".
struct FrameWindow {
  int begin = 0;
  int end = -1;
};

// Mass-weighted distance between two trajectories on the same mesh.
struct TrajectoryError {
  std::vector<double> e;  // sqrt((phi - ref)^T M (phi - ref)) per frame
  std::vector<double> d;  // e + 2 std over nodes of the per-node distance
  double mean_e = 0.0;    // over the window
  double mean_d = 0.0;
};

TrajectoryError trajectory_error(const Trajectory& sim, const Trajectory& reference,
                                 const LumpedMass& mass, FrameWindow window = {});

}  // namespace cloth
