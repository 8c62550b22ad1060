#include "clothsim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cloth {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trajectory(const std::string& path, const Trajectory& trajectory) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  const int n = trajectory.node_count;
  out << n << ' ' << format_double(trajectory.dt) << '\n';
  std::string line;
  for (size_t f = 0; f < trajectory.frames.size(); ++f) {
    const Eigen::VectorXd& phi = trajectory.frames[f];
    line.clear();
    line += format_double(trajectory.times[f]);
    for (int i = 0; i < n; ++i) {
      line += ' ';
      line += format_double(phi[i]);
      line += ' ';
      line += format_double(phi[n + i]);
      line += ' ';
      line += format_double(phi[2 * n + i]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path);

  Trajectory trajectory;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    const auto fail = [&](const std::string& what) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
    };

    if (!have_header) {
      if (!(ls >> trajectory.node_count >> trajectory.dt)) {
        if (ls.eof() && line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fail("malformed header (want: n dt)");
      }
      if (trajectory.node_count < 1) fail("node count must be positive");
      have_header = true;
      continue;
    }

    double t;
    if (!(ls >> t)) continue;  // blank line
    const int n = trajectory.node_count;
    Eigen::VectorXd phi(3 * n);
    for (int i = 0; i < n; ++i) {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("frame with fewer than 3n coordinates");
      phi[i] = x;
      phi[n + i] = y;
      phi[2 * n + i] = z;
    }
    double extra;
    if (ls >> extra) fail("frame with more than 3n coordinates");
    trajectory.times.push_back(t);
    trajectory.frames.push_back(std::move(phi));
  }
  if (!have_header) throw std::runtime_error(path + ": empty trajectory file");
  return trajectory;
}

}  // namespace cloth
