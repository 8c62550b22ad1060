#include "doctest.h"

#include "clothsim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace cloth;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& stem) {
    path = fs::temp_directory_path() / ("clothcli_" + stem);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path.string() : (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kSmallSheet = R"([mesh]
generator = grid
nx = 3
ny = 3
width = 0.3
height = 0.3
plane = xy
noise = 0.001
seed = 7

[params]
rho = 1
delta = 1
kappa = 0.001
alpha = 1

[integrator]
dt = 0.01
duration = 0.05
tolerance = 0.001
max_iterations = 50

[outputs]
stride = 1
)";

int cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"cloth"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("stiffness presets map to increasing kappa and reject junk") {
  const double low = cusick_preset_kappa("low");
  const double med = cusick_preset_kappa("med");
  const double high = cusick_preset_kappa("high");
  CHECK(low > 0.0);
  CHECK(low < med);
  CHECK(med < high);
  CHECK_THROWS_AS((void)cusick_preset_kappa("wool"), std::runtime_error);
}

TEST_CASE("bad invocations exit with the error code") {
  CHECK(cli({"frobnicate"}) == kExitError);
  CHECK(cli({"simulate"}) == kExitError);  // missing scenario path
  CHECK(cli({"simulate", "/nonexistent/path.scn"}) == kExitError);
}

TEST_CASE("simulate writes its artifacts and honors overrides") {
  TempDir dir("simulate");
  write_file(dir.str("sheet.scn"), kSmallSheet);

  const int rc = cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
                      dir.str("run").c_str(), "--set", "params.kappa=0.5"});
  CHECK(rc == kExitOk);
  CHECK(fs::exists(dir.str("run") + "/trajectory.txt"));
  CHECK(fs::exists(dir.str("run") + "/reports.json"));
  CHECK(fs::exists(dir.str("run") + "/mesh.txt"));
  CHECK(fs::exists(dir.str("run") + "/resolved_scenario.txt"));

  // The resolved scenario echoes the override, not the file's value.
  const std::string resolved = read_file(dir.str("run") + "/resolved_scenario.txt");
  CHECK(resolved.find("kappa = 0.5") != std::string::npos);

  // Unknown keys are rejected up front.
  CHECK(cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
             dir.str("bad").c_str(), "--set", "params.bogus=1"}) == kExitError);
}

TEST_CASE("repeated runs are byte-identical") {
  TempDir dir("determinism");
  write_file(dir.str("sheet.scn"), kSmallSheet);
  REQUIRE(cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
               dir.str("a").c_str()}) == kExitOk);
  REQUIRE(cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
               dir.str("b").c_str()}) == kExitOk);
  CHECK(read_file(dir.str("a") + "/trajectory.txt") ==
        read_file(dir.str("b") + "/trajectory.txt"));
  CHECK(!read_file(dir.str("a") + "/trajectory.txt").empty());

  // A different seed must actually change the noisy mesh.
  REQUIRE(cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
               dir.str("c").c_str(), "--seed", "8"}) == kExitOk);
  CHECK(read_file(dir.str("a") + "/trajectory.txt") !=
        read_file(dir.str("c") + "/trajectory.txt"));
}

TEST_CASE("an exhausted iteration budget surfaces as the flagged exit code") {
  TempDir dir("flagged");
  write_file(dir.str("sheet.scn"), kSmallSheet);
  const int rc = cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
                      dir.str("run").c_str(), "--set",
                      "integrator.max_iterations=1", "--tol", "1e-14"});
  CHECK(rc == kExitFlagged);
  CHECK(fs::exists(dir.str("run") + "/trajectory.txt"));  // still written
}

TEST_CASE("gen-mesh emits the generated mesh without simulating") {
  TempDir dir("genmesh");
  write_file(dir.str("ring.scn"), R"([mesh]
generator = annulus
rings = 4
sectors = 12
inner_radius = 0.09
outer_radius = 0.15
)");
  CHECK(cli({"gen-mesh", dir.str("ring.scn").c_str(), "--out",
             dir.str("out").c_str()}) == kExitOk);
  std::istringstream mesh(read_file(dir.str("out") + "/mesh.txt"));
  int vertices = 0, faces = 0;
  for (std::string line; std::getline(mesh, line);) {
    if (line.rfind("v ", 0) == 0) ++vertices;
    if (line.rfind("f ", 0) == 0) ++faces;
  }
  CHECK(vertices == 48);  // 4 rings x 12 sectors
  CHECK(faces == 3 * 12);  // quads between rings, closed around
  CHECK(!fs::exists(dir.str("out") + "/trajectory.txt"));
}

TEST_CASE("metrics consumes a recorded run") {
  TempDir dir("metrics");
  write_file(dir.str("sheet.scn"), kSmallSheet);
  REQUIRE(cli({"simulate", dir.str("sheet.scn").c_str(), "--out",
               dir.str("run").c_str()}) == kExitOk);
  const std::string traj = dir.str("run") + "/trajectory.txt";
  const std::string mesh = dir.str("run") + "/mesh.txt";
  CHECK(cli({"metrics", traj.c_str(), "--mesh", mesh.c_str(), "--out",
             dir.str("m").c_str()}) == kExitOk);
  CHECK(fs::exists(dir.str("m") + "/metrics.json"));
  CHECK(fs::exists(dir.str("m") + "/area_total.txt"));
  CHECK(fs::exists(dir.str("m") + "/e_total.txt"));
  CHECK(fs::exists(dir.str("m") + "/dispersion.txt"));
}

TEST_CASE("fit consumes a reference trajectory through the scenario file") {
  TempDir dir("fit");
  // Record the reference with known parameters on a tiny out-of-plane rig.
  const std::string rig = R"([mesh]
generator = grid
nx = 3
ny = 3
width = 0.2
height = 0.2
plane = yz

[params]
rho = 1
delta = 0.6
alpha = 2

[handles]
oscillate corner_u0v1 0.05 1.5
oscillate corner_u1v1 0.05 1.5

[integrator]
dt = 0.01
duration = 0.6
tolerance = 1e-6
max_iterations = 50

[outputs]
stride = 1
)";
  write_file(dir.str("rig.scn"), rig);
  REQUIRE(cli({"simulate", dir.str("rig.scn").c_str(), "--out",
               dir.str("ref").c_str()}) == kExitOk);

  const std::string problem = rig + std::string(R"(
[fit]
reference = )") + dir.str("ref") + R"(/trajectory.txt
delta0 = 1.2
alpha0 = 1
delta_step = 0.2
alpha_step = 0.8
max_iterations = 150
diameter_tol = 1e-3
)";
  write_file(dir.str("problem.scn"), problem);
  const int rc = cli({"fit", dir.str("problem.scn").c_str(), "--out",
                      dir.str("out").c_str()});
  CHECK(rc == kExitOk);
  CHECK(fs::exists(dir.str("out") + "/fit.json"));
  const std::string fit_json = read_file(dir.str("out") + "/fit.json");
  CHECK(fit_json.find("\"delta\"") != std::string::npos);
  CHECK(fit_json.find("\"test_error\"") != std::string::npos);
}
