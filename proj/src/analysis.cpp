#include "clothsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cloth {

double element_area(const Mesh& mesh, const Eigen::VectorXd& phi, int element) {
  double area = 0.0;
  for (const QuadraturePoint& q : reference_quadrature(mesh.elements[element].kind)) {
    const SurfacePoint s = element_map(mesh, element, phi, q.xi, q.eta);
    const double E = s.t_xi.squaredNorm();
    const double G = s.t_eta.squaredNorm();
    const double F = s.t_xi.dot(s.t_eta);
    area += std::sqrt(std::abs(E * G - F * F)) * q.w;
  }
  return area;
}

std::vector<double> element_areas(const Mesh& mesh, const Eigen::VectorXd& phi) {
  std::vector<double> areas(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) areas[e] = element_area(mesh, phi, e);
  return areas;
}

double total_area(const Mesh& mesh, const Eigen::VectorXd& phi) {
  double total = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) total += element_area(mesh, phi, e);
  return total;
}

AreaMetrics area_metrics(const Mesh& mesh, const Trajectory& trajectory) {
  if (trajectory.frames.empty()) throw std::runtime_error("area metrics: empty trajectory");
  if (trajectory.node_count != mesh.node_count())
    throw std::runtime_error("area metrics: trajectory does not match mesh");

  const int ne = mesh.element_count();
  const std::vector<double> rest = element_areas(mesh, trajectory.frames.front());
  const double rest_total = std::accumulate(rest.begin(), rest.end(), 0.0);

  AreaMetrics metrics;
  for (size_t f = 0; f < trajectory.frames.size(); ++f) {
    const std::vector<double> areas = element_areas(mesh, trajectory.frames[f]);
    const double total = std::accumulate(areas.begin(), areas.end(), 0.0);

    Eigen::VectorXd signed_rel(ne);
    double mean = 0.0;
    for (int e = 0; e < ne; ++e) {
      signed_rel[e] = (areas[e] - rest[e]) / rest[e];
      mean += std::abs(signed_rel[e]);
    }
    mean /= ne;
    double var = 0.0;
    for (int e = 0; e < ne; ++e) {
      const double dev = std::abs(signed_rel[e]) - mean;
      var += dev * dev;
    }
    var /= ne;

    metrics.times.push_back(trajectory.times[f]);
    metrics.total.push_back(total);
    metrics.e_total.push_back(std::abs(total - rest_total) / rest_total);
    metrics.e_mean.push_back(mean);
    metrics.dispersion.push_back(mean + 2.0 * std::sqrt(var));
    metrics.signed_element.push_back(std::move(signed_rel));
  }
  return metrics;
}

namespace {

bool point_in_triangle(double px, double py, const double ax[2], const double bx[2],
                       const double cx[2]) {
  const double d1 = (px - bx[0]) * (ax[1] - bx[1]) - (ax[0] - bx[0]) * (py - bx[1]);
  const double d2 = (px - cx[0]) * (bx[1] - cx[1]) - (bx[0] - cx[0]) * (py - cx[1]);
  const double d3 = (px - ax[0]) * (cx[1] - ax[1]) - (cx[0] - ax[0]) * (py - ax[1]);
  const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
  const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
  return !(has_neg && has_pos);
}

}  // namespace

DrapeResult drape_coefficient(const Mesh& mesh, const Eigen::VectorXd& phi,
                              double inner_radius, double outer_radius, double cell_size) {
  if (!(outer_radius > inner_radius) || !(inner_radius > 0.0))
    throw std::runtime_error("drape: need 0 < inner radius < outer radius");
  if (!(cell_size > 0.0)) throw std::runtime_error("drape: cell size must be positive");

  const int n = mesh.node_count();
  double min_x = phi.head(n).minCoeff() - cell_size;
  double max_x = phi.head(n).maxCoeff() + cell_size;
  double min_y = phi.segment(n, n).minCoeff() - cell_size;
  double max_y = phi.segment(n, n).maxCoeff() + cell_size;

  const long nx = std::lround(std::ceil((max_x - min_x) / cell_size)) + 1;
  const long ny = std::lround(std::ceil((max_y - min_y) / cell_size)) + 1;
  std::vector<char> covered(static_cast<size_t>(nx * ny), 0);

  const auto cell_index = [&](double v, double lo) {
    return static_cast<long>(std::floor((v - lo) / cell_size));
  };

  const auto rasterize_triangle = [&](const double a[2], const double b[2], const double c[2]) {
    const double tx0 = std::min({a[0], b[0], c[0]});
    const double tx1 = std::max({a[0], b[0], c[0]});
    const double ty0 = std::min({a[1], b[1], c[1]});
    const double ty1 = std::max({a[1], b[1], c[1]});
    const long i0 = std::max(0L, cell_index(tx0, min_x) - 1);
    const long i1 = std::min(nx - 1, cell_index(tx1, min_x) + 1);
    const long j0 = std::max(0L, cell_index(ty0, min_y) - 1);
    const long j1 = std::min(ny - 1, cell_index(ty1, min_y) + 1);
    for (long j = j0; j <= j1; ++j) {
      const double py = min_y + (j + 0.5) * cell_size;
      for (long i = i0; i <= i1; ++i) {
        if (covered[static_cast<size_t>(j * nx + i)]) continue;
        const double px = min_x + (i + 0.5) * cell_size;
        if (point_in_triangle(px, py, a, b, c)) covered[static_cast<size_t>(j * nx + i)] = 1;
      }
    }
  };

  for (const Element& el : mesh.elements) {
    double p[4][2];
    for (int c = 0; c < el.size(); ++c) {
      p[c][0] = phi[el.nodes[c]];
      p[c][1] = phi[n + el.nodes[c]];
    }
    rasterize_triangle(p[0], p[1], p[2]);
    if (el.kind == ElementKind::Quad) rasterize_triangle(p[0], p[2], p[3]);
  }

  DrapeResult result;
  result.cell_size = cell_size;
  result.covered_cells = std::count(covered.begin(), covered.end(), 1);
  result.projected_area = result.covered_cells * cell_size * cell_size;
  result.ring_area = M_PI * (outer_radius * outer_radius - inner_radius * inner_radius);
  result.coefficient = 100.0 * result.projected_area / result.ring_area;
  return result;
}

TrajectoryError trajectory_error(const Trajectory& sim, const Trajectory& reference,
                                 const LumpedMass& mass, FrameWindow window) {
  if (sim.node_count != reference.node_count)
    throw std::runtime_error("trajectory error: node counts differ");
  if (sim.frames.size() != reference.frames.size())
    throw std::runtime_error("trajectory error: frame counts differ");
  if (sim.node_count != mass.m.size())
    throw std::runtime_error("trajectory error: mass does not match trajectory");

  const int n = sim.node_count;
  const int total_frames = static_cast<int>(sim.frames.size());
  const int begin = std::clamp(window.begin, 0, total_frames);
  const int end = window.end < 0 ? total_frames : std::clamp(window.end, begin, total_frames);

  TrajectoryError err;
  for (int f = 0; f < total_frames; ++f) {
    const Eigen::VectorXd diff = sim.frames[f] - reference.frames[f];
    double weighted = 0.0;
    double dist_sum = 0.0, dist_sq_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d2 = diff[i] * diff[i] + diff[n + i] * diff[n + i] +
                        diff[2 * n + i] * diff[2 * n + i];
      weighted += mass.m[i] * d2;
      const double d = std::sqrt(d2);
      dist_sum += d;
      dist_sq_sum += d2;
    }
    const double mean_dist = dist_sum / n;
    const double var = std::max(0.0, dist_sq_sum / n - mean_dist * mean_dist);
    err.e.push_back(std::sqrt(weighted));
    err.d.push_back(err.e.back() + 2.0 * std::sqrt(var));
  }

  if (end > begin) {
    for (int f = begin; f < end; ++f) {
      err.mean_e += err.e[f];
      err.mean_d += err.d[f];
    }
    err.mean_e /= end - begin;
    err.mean_d /= end - begin;
  }
  return err;
}

}  // namespace cloth
