#pragma once

#include "clothsim/dynamics.hpp"
#include "clothsim/generators.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cloth {

// Mesh source: either a mesh file or one of the built-in generators, plus
// optional Gaussian rest-shape noise and a corner override.
struct MeshSpec {
  std::string source;     // mesh file path; empty when generated
  std::string generator;  // "grid" | "annulus" | "tube"; empty when from file
  GridSpec grid;
  AnnulusSpec annulus;
  TubeSpec tube;
  double noise = 0.0;  // std dev of rest-position noise, meters
  unsigned seed = 0;   // master seed: jitter/diagonals use seed, noise seed+1
  std::optional<std::vector<int>> corners;
};

struct HandleLine {
  enum class Kind { Fix, Oscillate, Script };
  Kind kind = Kind::Fix;
  std::string target;  // tag name or node index
  double amplitude = 0.0;
  double frequency = 0.0;
  double drive_end = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Eigen::Vector3d>> samples;
};

struct IntegratorSpec {
  double dt = 0.01;
  double duration = 1.0;
  double tolerance = 1e-3;
  int max_iterations = 50;
};

struct OutputSpec {
  int stride = 1;
  std::string trajectory = "trajectory.txt";
  std::string reports = "reports.json";
  std::string mesh = "mesh.txt";
  std::string resolved = "resolved_scenario.txt";
};

// Material-fit settings; only the fit command reads these.
struct FitSpec {
  std::string reference;  // trajectory file to match
  double delta0 = 0.4;
  double alpha0 = 1.5;
  double delta_step = 0.1;
  double alpha_step = 0.5;
  double delta_min = 0.0;
  double delta_max = 2.0;
  double alpha_min = 0.0;
  double alpha_max = 10.0;
  int max_iterations = 200;
  double diameter_tol = 1e-3;
};

struct ScenarioSpec {
  MeshSpec mesh;
  PhysParams params;
  std::vector<HandleLine> handles;
  std::vector<Obstacle> obstacles;
  IntegratorSpec integrator;
  OutputSpec outputs;
  std::optional<FitSpec> fit;
};

// Parses the sectioned text format.  Unknown sections, unknown keys,
// duplicate keys, and malformed values all throw with origin:line context.
ScenarioSpec parse_scenario(std::istream& in, const std::string& origin);
ScenarioSpec load_scenario(const std::string& path);

// Applies one "section.key=value" assignment (the --set syntax).
void apply_override(ScenarioSpec& spec, const std::string& assignment);

// Canonical text for the spec with every value explicit; re-parsing the
// rendered text reproduces the spec exactly.
std::string render_scenario(const ScenarioSpec& spec);

struct BuiltScenario {
  Scenario scenario;
  std::map<std::string, std::vector<int>> tags;
  OutputSpec outputs;
  std::optional<FitSpec> fit;
};

// Realizes the mesh (generator + noise + corner override), resolves handle
// targets against tags or node indices, and packages the runnable scenario.
BuiltScenario build_scenario(const ScenarioSpec& spec);

}  // namespace cloth
