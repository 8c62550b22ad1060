#include "clothsim/scenario.hpp"

#include "clothsim/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cloth {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, const std::string& origin, int line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail(origin, line, "expected a number, got '" + tok + "'");
  return v;
}

int to_int(const std::string& tok, const std::string& origin, int line) {
  int v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail(origin, line, "expected an integer, got '" + tok + "'");
  return v;
}

unsigned to_unsigned(const std::string& tok, const std::string& origin, int line) {
  unsigned v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail(origin, line, "expected a non-negative integer, got '" + tok + "'");
  return v;
}

Eigen::Vector3d to_vec3(const std::vector<std::string>& toks, std::size_t at,
                        const std::string& origin, int line) {
  return {to_double(toks[at], origin, line), to_double(toks[at + 1], origin, line),
          to_double(toks[at + 2], origin, line)};
}

// Scalar key assignment shared by the file parser and --set overrides.
void set_key(ScenarioSpec& spec, const std::string& section, const std::string& key,
             const std::string& value, const std::string& origin, int line) {
  const std::vector<std::string> toks = split_tokens(value);
  const auto need = [&](std::size_t n) {
    if (toks.size() != n)
      fail(origin, line, section + "." + key + " expects " + std::to_string(n) +
                             " value(s), got " + std::to_string(toks.size()));
  };
  const auto one_double = [&] { need(1); return to_double(toks[0], origin, line); };
  const auto one_int = [&] { need(1); return to_int(toks[0], origin, line); };

  if (section == "mesh") {
    MeshSpec& m = spec.mesh;
    if (key == "source") { need(1); m.source = toks[0]; }
    else if (key == "generator") {
      need(1);
      if (toks[0] != "grid" && toks[0] != "annulus" && toks[0] != "tube")
        fail(origin, line, "unknown generator '" + toks[0] + "'");
      m.generator = toks[0];
    }
    else if (key == "nx") m.grid.nx = one_int();
    else if (key == "ny") m.grid.ny = one_int();
    else if (key == "width") m.grid.width = one_double();
    else if (key == "height") { const double v = one_double(); m.grid.height = v; m.tube.height = v; }
    else if (key == "plane") {
      need(1);
      if (toks[0] == "xy") m.grid.plane = GridPlane::XY;
      else if (toks[0] == "xz") m.grid.plane = GridPlane::XZ;
      else if (toks[0] == "yz") m.grid.plane = GridPlane::YZ;
      else fail(origin, line, "plane must be xy, xz or yz");
    }
    else if (key == "origin") { need(3); m.grid.origin = to_vec3(toks, 0, origin, line); }
    else if (key == "kind") {
      need(1);
      if (toks[0] == "quad") m.grid.triangles = false;
      else if (toks[0] == "tri") m.grid.triangles = true;
      else fail(origin, line, "kind must be quad or tri");
    }
    else if (key == "jitter") m.grid.jitter = one_double();
    else if (key == "rings") m.annulus.rings = one_int();
    else if (key == "sectors") m.annulus.sectors = one_int();
    else if (key == "inner_radius") m.annulus.inner_radius = one_double();
    else if (key == "outer_radius") m.annulus.outer_radius = one_double();
    else if (key == "around") m.tube.around = one_int();
    else if (key == "levels") m.tube.levels = one_int();
    else if (key == "semi_x") m.tube.semi_x = one_double();
    else if (key == "semi_y") m.tube.semi_y = one_double();
    else if (key == "noise") m.noise = one_double();
    else if (key == "seed") { need(1); m.seed = to_unsigned(toks[0], origin, line); }
    else if (key == "corners") {
      std::vector<int> ids;
      for (const auto& t : toks) ids.push_back(to_int(t, origin, line));
      m.corners = std::move(ids);
    }
    else fail(origin, line, "unknown key mesh." + key);
  } else if (section == "params") {
    if (key == "rho") spec.params.rho = one_double();
    else if (key == "delta") spec.params.delta = one_double();
    else if (key == "kappa") spec.params.kappa = one_double();
    else if (key == "alpha") spec.params.alpha = one_double();
    else if (key == "beta") spec.params.beta = one_double();
    else fail(origin, line, "unknown key params." + key);
  } else if (section == "integrator") {
    if (key == "dt") spec.integrator.dt = one_double();
    else if (key == "duration") spec.integrator.duration = one_double();
    else if (key == "tolerance") spec.integrator.tolerance = one_double();
    else if (key == "max_iterations") spec.integrator.max_iterations = one_int();
    else fail(origin, line, "unknown key integrator." + key);
  } else if (section == "outputs") {
    if (key == "stride") spec.outputs.stride = one_int();
    else if (key == "trajectory") { need(1); spec.outputs.trajectory = toks[0]; }
    else if (key == "reports") { need(1); spec.outputs.reports = toks[0]; }
    else if (key == "mesh") { need(1); spec.outputs.mesh = toks[0]; }
    else if (key == "resolved") { need(1); spec.outputs.resolved = toks[0]; }
    else fail(origin, line, "unknown key outputs." + key);
  } else if (section == "fit") {
    if (!spec.fit) spec.fit.emplace();
    FitSpec& f = *spec.fit;
    if (key == "reference") { need(1); f.reference = toks[0]; }
    else if (key == "delta0") f.delta0 = one_double();
    else if (key == "alpha0") f.alpha0 = one_double();
    else if (key == "delta_step") f.delta_step = one_double();
    else if (key == "alpha_step") f.alpha_step = one_double();
    else if (key == "delta_min") f.delta_min = one_double();
    else if (key == "delta_max") f.delta_max = one_double();
    else if (key == "alpha_min") f.alpha_min = one_double();
    else if (key == "alpha_max") f.alpha_max = one_double();
    else if (key == "max_iterations") f.max_iterations = one_int();
    else if (key == "diameter_tol") f.diameter_tol = one_double();
    else fail(origin, line, "unknown key fit." + key);
  } else {
    fail(origin, line, "section [" + section + "] has no scalar keys");
  }
}

HandleLine parse_handle_line(const std::vector<std::string>& toks,
                             const std::string& origin, int line) {
  HandleLine h;
  if (toks[0] == "fix") {
    if (toks.size() != 2) fail(origin, line, "usage: fix <node-or-tag>");
    h.kind = HandleLine::Kind::Fix;
    h.target = toks[1];
  } else if (toks[0] == "oscillate") {
    if (toks.size() != 4 && toks.size() != 5)
      fail(origin, line, "usage: oscillate <node-or-tag> <amplitude> <frequency> [drive_end]");
    h.kind = HandleLine::Kind::Oscillate;
    h.target = toks[1];
    h.amplitude = to_double(toks[2], origin, line);
    h.frequency = to_double(toks[3], origin, line);
    if (toks.size() == 5) h.drive_end = to_double(toks[4], origin, line);
  } else if (toks[0] == "script") {
    if (toks.size() < 2) fail(origin, line, "usage: script <node-or-tag> t x y z ; ...");
    h.kind = HandleLine::Kind::Script;
    h.target = toks[1];
    std::vector<std::string> chunk;
    const auto flush = [&] {
      if (chunk.empty()) return;
      if (chunk.size() != 4) fail(origin, line, "script samples need 4 numbers: t x y z");
      h.samples.emplace_back(to_double(chunk[0], origin, line),
                             to_vec3(chunk, 1, origin, line));
      chunk.clear();
    };
    for (std::size_t i = 2; i < toks.size(); ++i) {
      if (toks[i] == ";") flush();
      else chunk.push_back(toks[i]);
    }
    flush();
    if (h.samples.empty()) fail(origin, line, "script needs at least one sample");
  } else {
    fail(origin, line, "unknown handle directive '" + toks[0] + "'");
  }
  return h;
}

Obstacle parse_obstacle_line(const std::vector<std::string>& toks,
                             const std::string& origin, int line) {
  try {
    if (toks[0] == "sphere") {
      if (toks.size() != 5) fail(origin, line, "usage: sphere cx cy cz r");
      return Obstacle::sphere(to_vec3(toks, 1, origin, line),
                              to_double(toks[4], origin, line));
    }
    if (toks[0] == "plane") {
      if (toks.size() != 7) fail(origin, line, "usage: plane px py pz nx ny nz");
      return Obstacle::half_space(to_vec3(toks, 1, origin, line),
                                  to_vec3(toks, 4, origin, line));
    }
    if (toks[0] == "cylinder") {
      if (toks.size() != 8) fail(origin, line, "usage: cylinder px py pz ax ay az r");
      return Obstacle::cylinder(to_vec3(toks, 1, origin, line),
                                to_vec3(toks, 4, origin, line),
                                to_double(toks[7], origin, line));
    }
  } catch (const std::runtime_error& e) {
    std::string what = e.what();
    if (what.rfind(origin, 0) == 0) throw;  // already carries context
    fail(origin, line, what);
  }
  fail(origin, line, "unknown obstacle '" + toks[0] + "'");
}

std::vector<int> resolve_target(const std::string& target,
                                const std::map<std::string, std::vector<int>>& tags,
                                int node_count) {
  const bool numeric = !target.empty() &&
                       target.find_first_not_of("0123456789") == std::string::npos;
  if (numeric) {
    const int node = std::stoi(target);
    if (node >= node_count)
      throw std::runtime_error("handle node " + target + " out of range (mesh has " +
                               std::to_string(node_count) + " nodes)");
    return {node};
  }
  const auto it = tags.find(target);
  if (it == tags.end() || it->second.empty())
    throw std::runtime_error("unknown handle tag '" + target + "'");
  return it->second;
}

}  // namespace

ScenarioSpec parse_scenario(std::istream& in, const std::string& origin) {
  ScenarioSpec spec;
  std::set<std::string> seen;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(origin, line, "malformed section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section != "mesh" && section != "params" && section != "handles" &&
          section != "obstacles" && section != "integrator" && section != "outputs" &&
          section != "fit")
        fail(origin, line, "unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) fail(origin, line, "content before any [section]");
    if (section == "handles") {
      spec.handles.push_back(parse_handle_line(split_tokens(text), origin, line));
      continue;
    }
    if (section == "obstacles") {
      spec.obstacles.push_back(parse_obstacle_line(split_tokens(text), origin, line));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail(origin, line, "empty key");
    if (!seen.insert(section + "." + key).second)
      fail(origin, line, "duplicate key " + section + "." + key);
    set_key(spec, section, key, value, origin, line);
  }
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return parse_scenario(in, path);
}

void apply_override(ScenarioSpec& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("--set expects section.key=value, got '" + assignment + "'");
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw std::runtime_error("--set expects section.key=value, got '" + assignment + "'");
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  if (section == "handles" || section == "obstacles")
    throw std::runtime_error("--set cannot rewrite [" + section + "] lines");
  set_key(spec, section, key, value, "--set " + assignment, 0);
}

std::string render_scenario(const ScenarioSpec& spec) {
  std::ostringstream out;
  const auto num = [](double v) { return format_double(v); };
  const auto vec = [&](const Eigen::Vector3d& v) {
    return num(v.x()) + " " + num(v.y()) + " " + num(v.z());
  };

  out << "[mesh]\n";
  const MeshSpec& m = spec.mesh;
  if (!m.source.empty()) {
    out << "source = " << m.source << "\n";
  } else {
    out << "generator = " << m.generator << "\n";
    if (m.generator == "grid") {
      out << "nx = " << m.grid.nx << "\n"
          << "ny = " << m.grid.ny << "\n"
          << "width = " << num(m.grid.width) << "\n"
          << "height = " << num(m.grid.height) << "\n"
          << "plane = "
          << (m.grid.plane == GridPlane::XY ? "xy"
              : m.grid.plane == GridPlane::XZ ? "xz" : "yz")
          << "\n"
          << "origin = " << vec(m.grid.origin) << "\n"
          << "kind = " << (m.grid.triangles ? "tri" : "quad") << "\n"
          << "jitter = " << num(m.grid.jitter) << "\n";
    } else if (m.generator == "annulus") {
      out << "rings = " << m.annulus.rings << "\n"
          << "sectors = " << m.annulus.sectors << "\n"
          << "inner_radius = " << num(m.annulus.inner_radius) << "\n"
          << "outer_radius = " << num(m.annulus.outer_radius) << "\n";
    } else if (m.generator == "tube") {
      out << "around = " << m.tube.around << "\n"
          << "levels = " << m.tube.levels << "\n"
          << "semi_x = " << num(m.tube.semi_x) << "\n"
          << "semi_y = " << num(m.tube.semi_y) << "\n"
          << "height = " << num(m.tube.height) << "\n";
    }
  }
  out << "noise = " << num(m.noise) << "\n"
      << "seed = " << m.seed << "\n";
  if (m.corners) {
    out << "corners =";
    for (int c : *m.corners) out << " " << c;
    out << "\n";
  }

  out << "\n[params]\n"
      << "rho = " << num(spec.params.rho) << "\n"
      << "delta = " << num(spec.params.delta) << "\n"
      << "kappa = " << num(spec.params.kappa) << "\n"
      << "alpha = " << num(spec.params.alpha) << "\n"
      << "beta = " << num(spec.params.beta) << "\n";

  out << "\n[handles]\n";
  for (const HandleLine& h : spec.handles) {
    switch (h.kind) {
      case HandleLine::Kind::Fix:
        out << "fix " << h.target << "\n";
        break;
      case HandleLine::Kind::Oscillate:
        out << "oscillate " << h.target << " " << num(h.amplitude) << " "
            << num(h.frequency);
        if (std::isfinite(h.drive_end)) out << " " << num(h.drive_end);
        out << "\n";
        break;
      case HandleLine::Kind::Script: {
        out << "script " << h.target;
        bool first = true;
        for (const auto& [t, p] : h.samples) {
          out << (first ? " " : " ; ") << num(t) << " " << vec(p);
          first = false;
        }
        out << "\n";
        break;
      }
    }
  }

  out << "\n[obstacles]\n";
  for (const Obstacle& o : spec.obstacles) {
    switch (o.kind) {
      case Obstacle::Kind::Sphere:
        out << "sphere " << vec(o.point) << " " << num(o.radius) << "\n";
        break;
      case Obstacle::Kind::HalfSpace:
        out << "plane " << vec(o.point) << " " << vec(o.axis) << "\n";
        break;
      case Obstacle::Kind::Cylinder:
        out << "cylinder " << vec(o.point) << " " << vec(o.axis) << " "
            << num(o.radius) << "\n";
        break;
    }
  }

  out << "\n[integrator]\n"
      << "dt = " << num(spec.integrator.dt) << "\n"
      << "duration = " << num(spec.integrator.duration) << "\n"
      << "tolerance = " << num(spec.integrator.tolerance) << "\n"
      << "max_iterations = " << spec.integrator.max_iterations << "\n";

  out << "\n[outputs]\n"
      << "stride = " << spec.outputs.stride << "\n"
      << "trajectory = " << spec.outputs.trajectory << "\n"
      << "reports = " << spec.outputs.reports << "\n"
      << "mesh = " << spec.outputs.mesh << "\n"
      << "resolved = " << spec.outputs.resolved << "\n";

  if (spec.fit) {
    const FitSpec& f = *spec.fit;
    out << "\n[fit]\n"
        << "reference = " << f.reference << "\n"
        << "delta0 = " << num(f.delta0) << "\n"
        << "alpha0 = " << num(f.alpha0) << "\n"
        << "delta_step = " << num(f.delta_step) << "\n"
        << "alpha_step = " << num(f.alpha_step) << "\n"
        << "delta_min = " << num(f.delta_min) << "\n"
        << "delta_max = " << num(f.delta_max) << "\n"
        << "alpha_min = " << num(f.alpha_min) << "\n"
        << "alpha_max = " << num(f.alpha_max) << "\n"
        << "max_iterations = " << f.max_iterations << "\n"
        << "diameter_tol = " << num(f.diameter_tol) << "\n";
  }
  return out.str();
}

BuiltScenario build_scenario(const ScenarioSpec& spec) {
  const MeshSpec& m = spec.mesh;
  if (!m.source.empty() && !m.generator.empty())
    throw std::runtime_error("mesh.source and mesh.generator are exclusive");
  if (m.source.empty() && m.generator.empty())
    throw std::runtime_error("mesh needs either source or generator");

  GeneratedMesh gm;
  if (!m.source.empty()) {
    gm.mesh = load_mesh(m.source);
  } else if (m.generator == "grid") {
    GridSpec g = m.grid;
    g.seed = m.seed;
    gm = generate_grid(g);
  } else if (m.generator == "annulus") {
    gm = generate_annulus(m.annulus);
  } else {
    gm = generate_tube(m.tube);
  }
  if (m.noise > 0.0) gm.mesh = add_position_noise(gm.mesh, m.noise, m.seed + 1);
  if (m.corners) override_corners(gm.mesh, *m.corners);

  if (spec.params.rho <= 0.0) throw std::runtime_error("params.rho must be > 0");
  if (spec.params.delta < 0.0) throw std::runtime_error("params.delta must be >= 0");
  if (spec.params.kappa < 0.0) throw std::runtime_error("params.kappa must be >= 0");
  if (spec.params.alpha < 0.0) throw std::runtime_error("params.alpha must be >= 0");
  if (spec.params.beta < 0.0) throw std::runtime_error("params.beta must be >= 0");
  if (spec.integrator.dt <= 0.0) throw std::runtime_error("integrator.dt must be > 0");
  if (spec.integrator.duration < 0.0)
    throw std::runtime_error("integrator.duration must be >= 0");
  if (spec.integrator.tolerance <= 0.0)
    throw std::runtime_error("integrator.tolerance must be > 0");
  if (spec.integrator.max_iterations < 1)
    throw std::runtime_error("integrator.max_iterations must be >= 1");
  if (spec.outputs.stride < 1) throw std::runtime_error("outputs.stride must be >= 1");

  BuiltScenario built;
  built.tags = gm.tags;
  built.outputs = spec.outputs;
  built.fit = spec.fit;

  Scenario& sc = built.scenario;
  sc.mesh = std::move(gm.mesh);
  sc.params = spec.params;
  sc.obstacles = spec.obstacles;
  sc.dt = spec.integrator.dt;
  sc.duration = spec.integrator.duration;
  sc.tolerance = spec.integrator.tolerance;
  sc.max_iterations = spec.integrator.max_iterations;
  sc.snapshot_stride = spec.outputs.stride;

  const int n = sc.mesh.node_count();
  for (const HandleLine& h : spec.handles) {
    const std::vector<int> nodes = resolve_target(h.target, built.tags, n);
    switch (h.kind) {
      case HandleLine::Kind::Fix:
        for (int node : nodes)
          sc.handles.push_back({node, HandleTrajectory::fixed(sc.mesh.rest_positions[node])});
        break;
      case HandleLine::Kind::Oscillate: {
        if (nodes.size() != 1)
          throw std::runtime_error("oscillate target '" + h.target +
                                   "' must name a single node");
        // Base chosen so the drive starts exactly at the rest position.
        const Eigen::Vector3d rest = sc.mesh.rest_positions[nodes[0]];
        const Eigen::Vector3d base(rest.x() - h.amplitude, rest.y(), rest.z());
        sc.handles.push_back({nodes[0], HandleTrajectory::oscillation(
                                            h.amplitude, h.frequency, base, h.drive_end)});
        break;
      }
      case HandleLine::Kind::Script:
        if (nodes.size() != 1)
          throw std::runtime_error("script target '" + h.target +
                                   "' must name a single node");
        sc.handles.push_back({nodes[0], HandleTrajectory::scripted(h.samples)});
        break;
    }
  }
  return built;
}

}  // namespace cloth
