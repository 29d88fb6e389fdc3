#pragma once

#include "core/geometry.hpp"
#include "core/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nqd::commands {

struct RunConfig {
  std::string command;
  geometry::DomainPtr domain;
  double tol = 1e-6;
  std::vector<double> radii;  // empty: command default
  std::vector<double> rho;    // empty: command default
  double grid_h = 1.0 / 32;
  double box = 4.0;
  std::uint64_t seed = 1;
  int count = 16;
  long samples = 100000;
  int axis = 0;
  int jmax = 6;
  double omega = 1.8;
  std::vector<double> direction;  // cone: defaults to the axis
  std::string series = "decay";   // blowup: decay | dyadic | rescale | balayage
  bool closed_forms = true;
};

const std::vector<std::string>& command_names();

/// Runs one pipeline. Throws nqd::Error on invalid input.
report::Report run(const RunConfig& cfg);

}  // namespace nqd::commands
