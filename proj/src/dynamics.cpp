#include "clothsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace cloth {

Obstacle Obstacle::sphere(const Eigen::Vector3d& center, double radius) {
  if (!(radius > 0.0)) throw std::runtime_error("sphere obstacle needs positive radius");
  Obstacle o;
  o.kind = Kind::Sphere;
  o.point = center;
  o.radius = radius;
  return o;
}

Obstacle Obstacle::half_space(const Eigen::Vector3d& point, const Eigen::Vector3d& normal) {
  if (normal.norm() < 1e-12) throw std::runtime_error("half-space obstacle needs a normal");
  Obstacle o;
  o.kind = Kind::HalfSpace;
  o.point = point;
  o.axis = normal.normalized();
  return o;
}

Obstacle Obstacle::cylinder(const Eigen::Vector3d& point, const Eigen::Vector3d& axis,
                            double radius) {
  if (axis.norm() < 1e-12) throw std::runtime_error("cylinder obstacle needs an axis");
  if (!(radius > 0.0)) throw std::runtime_error("cylinder obstacle needs positive radius");
  Obstacle o;
  o.kind = Kind::Cylinder;
  o.point = point;
  o.axis = axis.normalized();
  o.radius = radius;
  return o;
}

double Obstacle::value(const Eigen::Vector3d& p) const {
  switch (kind) {
    case Kind::Sphere:
      return (p - point).norm() - radius;
    case Kind::HalfSpace:
      return axis.dot(p - point);
    case Kind::Cylinder: {
      const Eigen::Vector3d d = p - point;
      return (d - axis * axis.dot(d)).norm() - radius;
    }
  }
  return 0.0;
}

Eigen::Vector3d Obstacle::gradient(const Eigen::Vector3d& p) const {
  switch (kind) {
    case Kind::Sphere: {
      const Eigen::Vector3d d = p - point;
      const double r = d.norm();
      return r < 1e-12 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d(d / r);
    }
    case Kind::HalfSpace:
      return axis;
    case Kind::Cylinder: {
      const Eigen::Vector3d d = p - point;
      const Eigen::Vector3d radial = d - axis * axis.dot(d);
      const double r = radial.norm();
      if (r < 1e-12) {
        Eigen::Vector3d perp = axis.cross(Eigen::Vector3d::UnitX());
        if (perp.norm() < 1e-6) perp = axis.cross(Eigen::Vector3d::UnitY());
        return perp.normalized();
      }
      return radial / r;
    }
  }
  return Eigen::Vector3d::UnitZ();
}

HandleTrajectory HandleTrajectory::fixed(const Eigen::Vector3d& position) {
  HandleTrajectory h;
  h.kind = Kind::Fixed;
  h.base = position;
  return h;
}

HandleTrajectory HandleTrajectory::oscillation(double amplitude, double frequency,
                                               const Eigen::Vector3d& base, double drive_end) {
  HandleTrajectory h;
  h.kind = Kind::Oscillation;
  h.amplitude = amplitude;
  h.frequency = frequency;
  h.base = base;
  h.drive_end = drive_end;
  return h;
}

HandleTrajectory HandleTrajectory::scripted(
    std::vector<std::pair<double, Eigen::Vector3d>> samples) {
  if (samples.empty()) throw std::runtime_error("scripted handle needs at least one sample");
  for (size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].first > samples[i - 1].first))
      throw std::runtime_error("scripted handle samples must have increasing times");
  HandleTrajectory h;
  h.kind = Kind::Scripted;
  h.samples = std::move(samples);
  return h;
}

Eigen::Vector3d HandleTrajectory::at(double t) const {
  switch (kind) {
    case Kind::Fixed:
      return base;
    case Kind::Oscillation: {
      const double tc = std::min(t, drive_end);
      Eigen::Vector3d p = base;
      p.x() += amplitude * std::cos(2.0 * M_PI * frequency * tc);
      return p;
    }
    case Kind::Scripted: {
      if (t <= samples.front().first) return samples.front().second;
      if (t >= samples.back().first) return samples.back().second;
      auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                                 [](double v, const auto& s) { return v < s.first; });
      auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return (1.0 - w) * lo->second + w * hi->second;
    }
  }
  return base;
}

SimOperators assemble_operators(const Mesh& mesh) {
  SimOperators ops;
  ops.mass = assemble_lumped_mass(mesh);
  ops.bending = assemble_bending(mesh, ops.mass);
  return ops;
}

Eigen::VectorXd gravity_force(const PhysParams& params, const LumpedMass& mass) {
  const int n = static_cast<int>(mass.m.size());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * n);
  f.tail(n) = -params.delta * kGravity * mass.m;
  return f;
}

void ImplicitSolver::prepare(const SimOperators& ops, const PhysParams& params, double dt) {
  const int n = static_cast<int>(ops.mass.m.size());
  const double cm = params.rho + dt * params.alpha;
  const double ck = dt * params.beta + dt * dt * params.kappa;

  std::vector<Eigen::Triplet<double>> diag;
  diag.reserve(n);
  for (int i = 0; i < n; ++i) diag.emplace_back(i, i, cm * ops.mass.m[i]);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(diag.begin(), diag.end());
  if (ck != 0.0) A = A + (ck * ops.bending.K).eval();

  solver_.compute(A);
  if (solver_.info() != Eigen::Success)
    throw std::runtime_error("implicit step: factorization failed");
  params_ = params;
  dt_ = dt;
  prepared_ = true;
}

bool ImplicitSolver::ready(const PhysParams& params, double dt) const {
  return prepared_ && dt_ == dt && params_.rho == params.rho && params_.delta == params.delta &&
         params_.kappa == params.kappa && params_.alpha == params.alpha &&
         params_.beta == params.beta;
}

Eigen::VectorXd unconstrained_step(const SimState& state, const PhysParams& params,
                                   const SimOperators& ops, double dt, ImplicitSolver* cache) {
  const int n = static_cast<int>(ops.mass.m.size());
  ImplicitSolver local;
  ImplicitSolver* solver = cache ? cache : &local;
  if (!solver->ready(params, dt)) solver->prepare(ops, params, dt);

  Eigen::MatrixXd rhs(n, 3);
  for (int c = 0; c < 3; ++c) {
    const auto x = state.phi.segment(c * n, n);
    const auto v = state.velocity.segment(c * n, n);
    rhs.col(c) = params.rho * ops.mass.m.cwiseProduct(v);
    if (params.kappa != 0.0) rhs.col(c) -= dt * params.kappa * (ops.bending.K * x);
  }
  rhs.col(2) -= dt * params.delta * kGravity * ops.mass.m;  // gravity pulls -z

  const Eigen::MatrixXd vstar = solver->factorization().solve(rhs);
  Eigen::VectorXd phi0(3 * n);
  for (int c = 0; c < 3; ++c)
    phi0.segment(c * n, n) = state.phi.segment(c * n, n) + dt * vstar.col(c);
  return phi0;
}

namespace {

Eigen::VectorXd stacked_inverse_mass(const LumpedMass& mass) {
  const int n = static_cast<int>(mass.m.size());
  Eigen::VectorXd inv(3 * n);
  for (int c = 0; c < 3; ++c) inv.segment(c * n, n) = mass.m.cwiseInverse();
  return inv;
}

void add_regularization(Eigen::SparseMatrix<double>& A) {
  const int nc = static_cast<int>(A.rows());
  const double reg = 1e-10 * A.diagonal().sum() / nc;
  for (int r = 0; r < nc; ++r) A.coeffRef(r, r) += reg;
}

}  // namespace

ProjectionResult fast_projection(const ConstraintSystem& system, const LumpedMass& mass,
                                 Eigen::VectorXd phi0, double tol, int max_iter,
                                 ProjectionWorkspace* workspace) {
  ProjectionResult result;
  result.phi = std::move(phi0);
  if (system.rows() == 0) return result;

  const Eigen::VectorXd inv_m = stacked_inverse_mass(mass);
  Eigen::SparseMatrix<double> jac = eval_jacobian(system, result.phi);
  Eigen::VectorXd values = eval_constraints(system, result.phi, jac);
  result.residual = relative_residual(system, values);
  if (result.residual <= tol) return result;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> local_solver;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::SparseMatrix<double> jac_t = jac.transpose();
    Eigen::SparseMatrix<double> normal = jac * (inv_m.asDiagonal() * jac_t);
    add_regularization(normal);

    Eigen::VectorXd dlambda;
    if (workspace) {
      if (!workspace->analyzed) {
        workspace->solver.analyzePattern(normal);
        workspace->analyzed = true;
      }
      workspace->solver.factorize(normal);
      if (workspace->solver.info() != Eigen::Success) {
        result.converged = false;
        return result;
      }
      dlambda = workspace->solver.solve(values);
    } else {
      local_solver.compute(normal);
      if (local_solver.info() != Eigen::Success) {
        result.converged = false;
        return result;
      }
      dlambda = local_solver.solve(values);
    }
    result.linear_solves += 1;

    result.phi -= inv_m.cwiseProduct(jac_t * dlambda);
    result.iterations = it;

    jac = eval_jacobian(system, result.phi);
    values = eval_constraints(system, result.phi, jac);
    if (!values.allFinite()) {
      result.converged = false;
      result.residual = std::numeric_limits<double>::quiet_NaN();
      return result;
    }
    result.residual = relative_residual(system, values);
    if (result.residual <= tol) return result;
  }
  result.converged = false;
  return result;
}

ProjectionResult step_with_contact(const ConstraintSystem& system, const LumpedMass& mass,
                                   Eigen::VectorXd phi0, const std::vector<Obstacle>& obstacles,
                                   double tol, int max_iter, ProjectionWorkspace* workspace) {
  if (obstacles.empty())
    return fast_projection(system, mass, std::move(phi0), tol, max_iter, workspace);

  constexpr double kClearanceSlack = 1e-6;  // meters
  constexpr double kCandidateMargin = 0.1;  // meters

  const int n = system.node_count;
  const int n_eq = system.rows();
  const int n_obs = static_cast<int>(obstacles.size());
  const Eigen::VectorXd inv_m = stacked_inverse_mass(mass);

  ProjectionResult result;
  result.phi = std::move(phi0);
  result.converged = false;

  std::vector<std::pair<int, int>> last_active;  // (node, obstacle)
  Eigen::VectorXd last_gamma;

  for (int outer = 1; outer <= max_iter; ++outer) {
    Eigen::SparseMatrix<double> jac = eval_jacobian(system, result.phi);
    Eigen::VectorXd values = eval_constraints(system, result.phi, jac);
    if (!values.allFinite()) {
      result.residual = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    result.residual = relative_residual(system, values);

    double min_clearance = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> candidates;
    std::vector<double> cand_clearance;
    std::vector<Eigen::Vector3d> cand_gradient;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d p = node_position(result.phi, n, i);
      for (int o = 0; o < n_obs; ++o) {
        const double h = obstacles[o].value(p);
        min_clearance = std::min(min_clearance, h);
        if (h < kCandidateMargin) {
          candidates.emplace_back(i, o);
          cand_clearance.push_back(h);
          cand_gradient.push_back(obstacles[o].gradient(p));
        }
      }
    }

    if (result.residual <= tol && min_clearance >= -kClearanceSlack) {
      result.converged = true;
      result.iterations = outer - 1;
      break;
    }

    // Active set over the candidate rows, warm-started from the previous step.
    std::vector<int> active;  // indices into candidates
    if (workspace) {
      for (size_t c = 0; c < candidates.size(); ++c)
        if (std::find(workspace->active.begin(), workspace->active.end(), candidates[c]) !=
            workspace->active.end())
          active.push_back(static_cast<int>(c));
    }

    const int pivot_cap = 10 * std::max<int>(1, static_cast<int>(candidates.size()));
    int pivots = 0;
    bool stalled = false;
    Eigen::VectorXd dphi;
    Eigen::VectorXd gamma;

    while (true) {
      const int n_act = static_cast<int>(active.size());
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(jac.nonZeros() + 3 * n_act);
      for (int col = 0; col < jac.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(jac, col); it; ++it)
          trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      for (int a = 0; a < n_act; ++a) {
        const auto [node, obs] = candidates[active[a]];
        (void)obs;
        const Eigen::Vector3d& g = cand_gradient[active[a]];
        for (int c = 0; c < 3; ++c) trips.emplace_back(n_eq + a, c * n + node, g[c]);
      }
      Eigen::SparseMatrix<double> stacked(n_eq + n_act, 3 * n);
      stacked.setFromTriplets(trips.begin(), trips.end());

      Eigen::VectorXd rhs(n_eq + n_act);
      rhs.head(n_eq) = -values;
      for (int a = 0; a < n_act; ++a) rhs[n_eq + a] = -cand_clearance[active[a]];

      Eigen::SparseMatrix<double> stacked_t = stacked.transpose();
      Eigen::SparseMatrix<double> normal = stacked * (inv_m.asDiagonal() * stacked_t);
      add_regularization(normal);
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
      if (solver.info() != Eigen::Success) {
        stalled = true;
        break;
      }
      const Eigen::VectorXd nu = solver.solve(rhs);
      result.linear_solves += 1;
      gamma = nu.tail(n_act);

      // Drop the most negative multiplier, if any.
      int drop = -1;
      double gmin = -1e-12 * std::max(1.0, gamma.size() ? gamma.cwiseAbs().maxCoeff() : 0.0);
      for (int a = 0; a < n_act; ++a)
        if (gamma[a] < gmin) {
          gmin = gamma[a];
          drop = a;
        }
      if (drop >= 0) {
        active.erase(active.begin() + drop);
        if (++pivots > pivot_cap) {
          stalled = true;
          break;
        }
        continue;
      }

      dphi = inv_m.cwiseProduct(stacked_t * nu);

      // Admit the most violated linearized clearance.
      int add = -1;
      double worst = -1e-9;
      for (size_t c = 0; c < candidates.size(); ++c) {
        if (std::find(active.begin(), active.end(), static_cast<int>(c)) != active.end())
          continue;
        const int node = candidates[c].first;
        const Eigen::Vector3d dp(dphi[node], dphi[n + node], dphi[2 * n + node]);
        const double lin = cand_clearance[c] + cand_gradient[c].dot(dp);
        if (lin < worst) {
          worst = lin;
          add = static_cast<int>(c);
        }
      }
      if (add >= 0) {
        active.push_back(add);
        std::sort(active.begin(), active.end());
        if (++pivots > pivot_cap) {
          stalled = true;
          break;
        }
        continue;
      }
      break;  // multipliers non-negative, no linearized violation
    }

    if (stalled || dphi.size() == 0) {
      result.iterations = outer;
      break;
    }

    result.phi += dphi;
    result.iterations = outer;
    last_active.clear();
    for (int a : active) last_active.push_back(candidates[a]);
    last_gamma = gamma;
  }

  if (workspace) workspace->active = last_active;

  if (!result.converged && result.phi.allFinite()) {
    const Eigen::SparseMatrix<double> jac = eval_jacobian(system, result.phi);
    result.residual = relative_residual(system, eval_constraints(system, result.phi, jac));
  }

  result.active_contacts = static_cast<int>(last_active.size());
  for (size_t a = 0; a < last_active.size(); ++a) {
    const auto [node, obs] = last_active[a];
    result.contact_nodes.push_back(node);
    result.contact_gamma.push_back(last_gamma[static_cast<int>(a)]);
    result.contact_clearance.push_back(
        obstacles[obs].value(node_position(result.phi, n, node)));
  }
  return result;
}

bool SimResult::all_converged() const {
  for (const StepReport& rep : reports)
    if (!rep.converged) return false;
  return true;
}

SimResult simulate(const Scenario& scenario) {
  const Mesh& mesh = scenario.mesh;
  const int n = mesh.node_count();

  SimOperators ops = assemble_operators(mesh);
  auto [tensors, rest] = assemble_metric_tensors(mesh, ops.mass);

  std::vector<int> handle_nodes;
  for (const HandleSpec& h : scenario.handles) handle_nodes.push_back(h.node);
  ConstraintSystem system =
      build_constraint_system(mesh, std::move(tensors), rest, handle_nodes);

  SimState state;
  state.t = 0.0;
  if (scenario.initial_positions) {
    if (scenario.initial_positions->size() != 3 * n)
      throw std::runtime_error("simulate: initial positions have wrong size");
    state.phi = *scenario.initial_positions;
  } else {
    state.phi = stack_positions(mesh.rest_positions);
  }
  state.velocity = Eigen::VectorXd::Zero(3 * n);

  SimResult out;
  out.trajectory.node_count = n;
  out.trajectory.dt = scenario.dt;
  out.trajectory.times.push_back(0.0);
  out.trajectory.frames.push_back(state.phi);

  ImplicitSolver implicit;
  ProjectionWorkspace workspace;

  const int n_steps = static_cast<int>(std::llround(scenario.duration / scenario.dt));
  std::vector<Eigen::Vector3d> targets(scenario.handles.size());

  for (int step = 1; step <= n_steps; ++step) {
    const double t1 = step * scenario.dt;
    for (size_t h = 0; h < scenario.handles.size(); ++h)
      targets[h] = scenario.handles[h].trajectory.at(t1);
    set_handle_targets(system, targets);

    Eigen::VectorXd phi0 = unconstrained_step(state, scenario.params, ops, scenario.dt, &implicit);
    ProjectionResult pr =
        step_with_contact(system, ops.mass, std::move(phi0), scenario.obstacles,
                          scenario.tolerance, scenario.max_iterations, &workspace);
    if (!pr.phi.allFinite())
      throw SimError(step, "simulate: non-finite positions at step " + std::to_string(step));

    StepReport rep;
    rep.step = step;
    rep.t = t1;
    rep.iterations = pr.iterations;
    rep.residual = pr.residual;
    rep.linear_solves = pr.linear_solves;
    rep.active_contacts = pr.active_contacts;
    rep.converged = pr.converged;
    rep.contact_nodes = pr.contact_nodes;
    rep.contact_gamma = pr.contact_gamma;
    rep.contact_clearance = pr.contact_clearance;

    state.velocity = (pr.phi - state.phi) / scenario.dt;
    state.phi = std::move(pr.phi);
    state.t = t1;
    out.reports.push_back(std::move(rep));

    if (step % scenario.snapshot_stride == 0 || step == n_steps) {
      out.trajectory.times.push_back(t1);
      out.trajectory.frames.push_back(state.phi);
    }
  }
  return out;
}

}  // namespace cloth
