#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cloth {

// Frame store in the stacked (x | y | z) layout.  The text format is one
// header line "n dt" followed by per-frame lines "t x1 y1 z1 ... xn yn zn"
// (node-interleaved); '#' starts a comment.  Numbers are written with
// shortest round-trip precision so a write/read cycle is bit-exact.
struct Trajectory {
  int node_count = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> frames;
};

void write_trajectory(const std::string& path, const Trajectory& trajectory);
Trajectory read_trajectory(const std::string& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace cloth
