#include "clothsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cloth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double scaled_diameter(const std::vector<Eigen::VectorXd>& simplex,
                       const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  double diameter = 0.0;
  for (size_t a = 0; a < simplex.size(); ++a)
    for (size_t b = a + 1; b < simplex.size(); ++b)
      for (int c = 0; c < simplex[a].size(); ++c)
        diameter = std::max(diameter,
                            std::abs(simplex[a][c] - simplex[b][c]) / (upper[c] - lower[c]));
  return diameter;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const NelderMeadOptions& options) {
  const int dim = static_cast<int>(start.size());
  for (int c = 0; c < dim; ++c)
    if (!(upper[c] > lower[c])) throw std::runtime_error("nelder-mead: empty bounds");

  const auto clamp = [&](Eigen::VectorXd x) {
    for (int c = 0; c < dim; ++c) x[c] = std::clamp(x[c], lower[c], upper[c]);
    return x;
  };

  NelderMeadResult result;
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> value;
  simplex.push_back(clamp(start));
  for (int c = 0; c < dim; ++c) {
    Eigen::VectorXd v = start;
    v[c] += step[c];
    simplex.push_back(clamp(std::move(v)));
  }
  for (const Eigen::VectorXd& v : simplex) {
    value.push_back(objective(v));
    ++result.evaluations;
  }
  if (std::all_of(value.begin(), value.end(), [](double v) { return v == kInf; }))
    throw std::runtime_error("nelder-mead: every initial simplex vertex diverged");

  std::vector<int> order(simplex.size());
  const auto sort_simplex = [&] {
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return value[a] < value[b]; });
  };

  for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
    sort_simplex();
    if (scaled_diameter(simplex, lower, upper) < options.diameter_tol) {
      result.converged = true;
      break;
    }

    const int best = order.front();
    const int worst = order.back();
    const int second = order[order.size() - 2];

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int idx : order)
      if (idx != worst) centroid += simplex[idx];
    centroid /= dim;

    const auto eval = [&](const Eigen::VectorXd& x) {
      ++result.evaluations;
      return objective(x);
    };

    const Eigen::VectorXd reflected = clamp(centroid + (centroid - simplex[worst]));
    const double f_reflected = eval(reflected);

    if (f_reflected < value[best]) {
      const Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        value[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < value[second]) {
      simplex[worst] = reflected;
      value[worst] = f_reflected;
      continue;
    }

    if (f_reflected < value[worst]) {
      const Eigen::VectorXd contracted = clamp(centroid + 0.5 * (centroid - simplex[worst]));
      const double f_contracted = eval(contracted);
      if (f_contracted <= f_reflected) {
        simplex[worst] = contracted;
        value[worst] = f_contracted;
        continue;
      }
    } else {
      const Eigen::VectorXd contracted = centroid - 0.5 * (centroid - simplex[worst]);
      const double f_contracted = eval(contracted);
      if (f_contracted < value[worst]) {
        simplex[worst] = clamp(contracted);
        value[worst] = f_contracted;
        continue;
      }
    }

    for (size_t i = 0; i < simplex.size(); ++i) {  // shrink toward the best vertex
      if (static_cast<int>(i) == best) continue;
      simplex[i] = clamp(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
      value[i] = eval(simplex[i]);
    }
  }

  sort_simplex();
  result.x = simplex[order.front()];
  result.value = value[order.front()];
  return result;
}

FrameWindow training_window(const Trajectory& reference) {
  const int frames = static_cast<int>(reference.frames.size());
  return {1, (frames - 1) / 2 + 1};
}

FrameWindow test_window(const Trajectory& reference) {
  const int frames = static_cast<int>(reference.frames.size());
  return {(frames - 1) / 2 + 1, frames};
}

namespace {

struct LossContext {
  const CalibrationProblem& problem;
  LumpedMass mass;
};

double loss_with_mass(const LossContext& ctx, double delta, double alpha,
                      SimResult* out_sim = nullptr) {
  Scenario scenario = ctx.problem.scenario;
  scenario.params.delta = delta;
  scenario.params.alpha = alpha;
  scenario.initial_positions = ctx.problem.reference.frames.front();
  scenario.snapshot_stride = 1;

  SimResult sim;
  try {
    sim = simulate(scenario);
  } catch (const std::exception&) {
    return kInf;
  }
  if (sim.trajectory.frames.size() != ctx.problem.reference.frames.size()) return kInf;
  if (!sim.all_converged()) return kInf;

  const FrameWindow train = training_window(ctx.problem.reference);
  const int n = ctx.problem.reference.node_count;
  double loss = 0.0;
  for (int f = train.begin; f < train.end; ++f) {
    const Eigen::VectorXd diff = sim.trajectory.frames[f] - ctx.problem.reference.frames[f];
    for (int i = 0; i < n; ++i) {
      const double d2 = diff[i] * diff[i] + diff[n + i] * diff[n + i] +
                        diff[2 * n + i] * diff[2 * n + i];
      loss += ctx.mass.m[i] * d2;
    }
  }
  if (!std::isfinite(loss)) return kInf;
  if (out_sim) *out_sim = std::move(sim);
  return loss;
}

void validate(const CalibrationProblem& problem) {
  if (problem.reference.frames.size() < 3)
    throw std::runtime_error("calibration: reference needs at least 3 frames");
  if (problem.reference.node_count != problem.scenario.mesh.node_count())
    throw std::runtime_error("calibration: reference does not match the scenario mesh");
  const int steps = static_cast<int>(std::llround(problem.scenario.duration / problem.scenario.dt));
  if (steps + 1 != static_cast<int>(problem.reference.frames.size()))
    throw std::runtime_error("calibration: scenario duration/dt does not match reference frames");
}

}  // namespace

double calibration_loss(const CalibrationProblem& problem, double delta, double alpha) {
  validate(problem);
  LossContext ctx{problem, assemble_lumped_mass(problem.scenario.mesh)};
  return loss_with_mass(ctx, delta, alpha);
}

FitResult fit(const CalibrationProblem& problem) {
  validate(problem);
  LossContext ctx{problem, assemble_lumped_mass(problem.scenario.mesh)};

  const auto objective = [&](const Eigen::VectorXd& x) {
    return loss_with_mass(ctx, x[0], x[1]);
  };

  Eigen::VectorXd start(2), step(2);
  start << problem.delta0, problem.alpha0;
  step << problem.delta_step, problem.alpha_step;

  const NelderMeadResult nm = nelder_mead(objective, start, step, problem.lower,
                                          problem.upper, problem.options);

  FitResult result;
  result.delta = nm.x[0];
  result.alpha = nm.x[1];
  result.loss = nm.value;
  result.iterations = nm.iterations;
  result.evaluations = nm.evaluations;
  result.converged = nm.converged;

  SimResult best;
  if (loss_with_mass(ctx, result.delta, result.alpha, &best) == kInf) {
    result.test_error = kInf;
    return result;
  }
  const TrajectoryError err = trajectory_error(best.trajectory, problem.reference, ctx.mass,
                                               test_window(problem.reference));
  result.test_error = err.mean_e;
  return result;
}

}  // namespace cloth
