#pragma once

#include "clothsim/assembly.hpp"
#include "clothsim/constraints.hpp"
#include "clothsim/io.hpp"
#include "clothsim/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cloth {

inline constexpr double kGravity = 9.8;  // m/s^2

struct PhysParams {
  double rho = 1.0;    // inertial density
  double delta = 1.0;  // virtual gravitational mass (aerodynamic surrogate)
  double kappa = 0.0;  // bending stiffness
  double alpha = 0.0;  // mass-proportional damping
  double beta = 0.0;   // stiffness-proportional damping
};

struct SimState {
  double t = 0.0;
  Eigen::VectorXd phi;       // stacked positions
  Eigen::VectorXd velocity;  // stacked velocities
};

struct Obstacle {
  enum class Kind { Sphere, HalfSpace, Cylinder };
  Kind kind = Kind::HalfSpace;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // center / plane point / axis point
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // plane normal / cylinder axis
  double radius = 0.0;

  static Obstacle sphere(const Eigen::Vector3d& center, double radius);
  static Obstacle half_space(const Eigen::Vector3d& point, const Eigen::Vector3d& normal);
  static Obstacle cylinder(const Eigen::Vector3d& point, const Eigen::Vector3d& axis,
                           double radius);

  // Signed clearance in meters, non-negative outside the obstacle.
  double value(const Eigen::Vector3d& p) const;
  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const;  // unit where defined
};

struct HandleTrajectory {
  enum class Kind { Fixed, Oscillation, Scripted };
  Kind kind = Kind::Fixed;
  Eigen::Vector3d base = Eigen::Vector3d::Zero();  // fixed position, or (c, y0, z0)
  double amplitude = 0.0;
  double frequency = 0.0;
  double drive_end = std::numeric_limits<double>::infinity();  // hold afterwards
  std::vector<std::pair<double, Eigen::Vector3d>> samples;     // scripted, ascending t

  static HandleTrajectory fixed(const Eigen::Vector3d& position);
  // x(t) = amplitude cos(2 pi frequency t) + c with (c, y0, z0) = base
  static HandleTrajectory oscillation(double amplitude, double frequency,
                                      const Eigen::Vector3d& base,
                                      double drive_end = std::numeric_limits<double>::infinity());
  static HandleTrajectory scripted(std::vector<std::pair<double, Eigen::Vector3d>> samples);

  Eigen::Vector3d at(double t) const;
};

struct HandleSpec {
  int node = -1;
  HandleTrajectory trajectory;
};

struct Scenario {
  Mesh mesh;
  PhysParams params;
  std::vector<HandleSpec> handles;
  std::vector<Obstacle> obstacles;
  double dt = 0.01;
  double duration = 1.0;
  double tolerance = 1e-3;  // relative constraint residual
  int max_iterations = 50;
  int snapshot_stride = 1;
  std::optional<Eigen::VectorXd> initial_positions;  // defaults to rest
};

struct StepReport {
  int step = 0;
  double t = 0.0;
  int iterations = 0;        // projection iterations
  double residual = 0.0;     // final relative residual
  int linear_solves = 0;
  int active_contacts = 0;
  bool converged = true;
  std::vector<int> contact_nodes;        // final active set audit
  std::vector<double> contact_gamma;     // multipliers, one per active row
  std::vector<double> contact_clearance; // exact H at the returned positions
};

struct SimError : std::runtime_error {
  int step;
  SimError(int step_, const std::string& what) : std::runtime_error(what), step(step_) {}
};

struct SimOperators {
  LumpedMass mass;
  BendingOperator bending;
};

SimOperators assemble_operators(const Mesh& mesh);

// Cached factorization of (rho + dt alpha) M + (dt beta + dt^2 kappa) K; the
// same n x n factor serves all three coordinate blocks.
class ImplicitSolver {
 public:
  void prepare(const SimOperators& ops, const PhysParams& params, double dt);
  bool ready(const PhysParams& params, double dt) const;
  const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& factorization() const {
    return solver_;
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  PhysParams params_;
  double dt_ = -1.0;
  bool prepared_ = false;
};

// One implicit Euler step ignoring constraints; returns the predicted
// positions phi0 = phi + dt v*.
Eigen::VectorXd unconstrained_step(const SimState& state, const PhysParams& params,
                                   const SimOperators& ops, double dt,
                                   ImplicitSolver* cache = nullptr);

struct ProjectionResult {
  Eigen::VectorXd phi;
  int iterations = 0;
  double residual = 0.0;
  int linear_solves = 0;
  bool converged = true;
  int active_contacts = 0;
  std::vector<int> contact_nodes;
  std::vector<double> contact_gamma;
  std::vector<double> contact_clearance;
};

// Reusable state for the projection solves: the normal matrix keeps one
// sparsity pattern for a given constraint system, and the contact active set
// warm-starts consecutive steps.
struct ProjectionWorkspace {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  std::vector<std::pair<int, int>> active;  // (node, obstacle index)
};

// Iterates dlambda solves of (grad C M^-1 grad C^T) dlambda = C until the
// relative residual drops to tol; phi0 feasible returns untouched.
ProjectionResult fast_projection(const ConstraintSystem& system, const LumpedMass& mass,
                                 Eigen::VectorXd phi0, double tol, int max_iter,
                                 ProjectionWorkspace* workspace = nullptr);

// Fast projection with obstacle rows handled by an active-set QP on the
// linearized constraints.  Without obstacles this is exactly fast_projection.
ProjectionResult step_with_contact(const ConstraintSystem& system, const LumpedMass& mass,
                                   Eigen::VectorXd phi0, const std::vector<Obstacle>& obstacles,
                                   double tol, int max_iter,
                                   ProjectionWorkspace* workspace = nullptr);

struct SimResult {
  Trajectory trajectory;
  std::vector<StepReport> reports;

  bool all_converged() const;
};

SimResult simulate(const Scenario& scenario);

// Gravity load in the stacked layout: -delta g m_k on each z slot.
Eigen::VectorXd gravity_force(const PhysParams& params, const LumpedMass& mass);

}  // namespace cloth
