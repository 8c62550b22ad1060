#pragma once

#include "clothsim/scenario.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cloth {

// Exit codes shared by every command: 0 success, 1 usage/IO/model error,
// 2 finished but with flagged (non-converged) steps.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

struct SimulateOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;  // section.key=value, applied in order
  std::optional<unsigned> seed;
  std::optional<double> dt;
  std::optional<double> tol;
  bool dump = false;  // per-frame constraint values + residual
};
int cmd_simulate(const SimulateOptions& options);

struct LockingOptions {
  std::string out_dir = ".";
  unsigned seed = 1;
  std::optional<double> dt;
  std::optional<double> tol;
};
int cmd_locking(const LockingOptions& options);

struct CusickOptions {
  std::string out_dir = ".";
  std::string preset = "med";  // low | med | high
  std::optional<double> kappa; // explicit stiffness overrides the preset
  bool sweep = false;          // resolution sweep instead of a single mesh
  unsigned seed = 1;
  std::optional<double> dt;
  std::optional<double> tol;
};
int cmd_cusick(const CusickOptions& options);

// Bending stiffness behind a named preset; throws on unknown names.
double cusick_preset_kappa(const std::string& preset);

// The experiment subcommands build their scenarios through these, and the
// acceptance tests call the same functions, so both always run identical
// configurations.
struct LockingMesh {
  std::string label;
  bool triangles = false;
  int nx = 0, ny = 0;
};
std::vector<LockingMesh> locking_meshes();
ScenarioSpec locking_scenario(const LockingMesh& mesh, unsigned seed,
                              std::optional<double> dt = {},
                              std::optional<double> tol = {});

// Draped-ring resolution ladder as (rings, sectors) node counts.
std::vector<std::pair<int, int>> cusick_sweep();
ScenarioSpec cusick_scenario(double kappa, int rings, int sectors, unsigned seed,
                             std::optional<double> dt = {},
                             std::optional<double> tol = {});
// Tail-averaged drape coefficient: the draped state keeps a small residual
// oscillation, so the readout averages the frames of the final window instead
// of sampling one frame at a random phase.
double cusick_drape(const ScenarioSpec& spec, const Mesh& mesh,
                    const Trajectory& trajectory);

struct MetricsOptions {
  std::string trajectory_path;
  std::string mesh_path;
  std::string reference_path;  // optional
  std::string out_dir = ".";
};
int cmd_metrics(const MetricsOptions& options);

struct FitOptions {
  std::string problem_path;  // scenario file with a [fit] section
  std::string out_dir = ".";
  std::vector<std::string> overrides;
};
int cmd_fit(const FitOptions& options);

struct GenMeshOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<unsigned> seed;
  bool dump_operators = false;  // metric tensors + bending in triplet form
};
int cmd_gen_mesh(const GenMeshOptions& options);

// Full argv front end (subcommands simulate / locking / cusick / metrics /
// fit / gen-mesh); returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace cloth
