#pragma once

#include "clothsim/analysis.hpp"
#include "clothsim/dynamics.hpp"

#include <functional>

namespace cloth {

struct NelderMeadOptions {
  int max_iterations = 200;
  double diameter_tol = 1e-3;  // L-inf simplex diameter in bounds-scaled coordinates
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Downhill simplex with the classic coefficients (reflect 1, expand 2,
// contract 1/2, shrink 1/2).  Trial points are clamped into [lower, upper];
// +inf objective values are legal and lose every comparison.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const NelderMeadOptions& options = {});

// Fits (delta, alpha) so the simulated motion tracks a reference trajectory.
// The scenario acts as a template: per evaluation its delta/alpha are
// replaced, the simulation restarts from the reference's first frame, and the
// loss sums the mass-weighted squared distance over the first half of the
// frames.  The second half is the held-out test window.
struct CalibrationProblem {
  Scenario scenario;
  Trajectory reference;
  double delta0 = 0.4;
  double alpha0 = 1.5;
  double delta_step = 0.1;
  double alpha_step = 0.5;
  Eigen::Vector2d lower{0.0, 0.0};
  Eigen::Vector2d upper{2.0, 10.0};
  NelderMeadOptions options;
};

// Training loss; +inf when the simulation fails, produces non-finite state,
// or leaves any step unconverged.
double calibration_loss(const CalibrationProblem& problem, double delta, double alpha);

struct FitResult {
  double delta = 0.0;
  double alpha = 0.0;
  double loss = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double test_error = 0.0;  // mean per-frame error over the test window
  bool converged = false;
};

FitResult fit(const CalibrationProblem& problem);

// Frame index ranges derived from the reference length: training covers
// frames 1 .. floor((F-1)/2), testing the rest.
FrameWindow training_window(const Trajectory& reference);
FrameWindow test_window(const Trajectory& reference);

}  // namespace cloth
