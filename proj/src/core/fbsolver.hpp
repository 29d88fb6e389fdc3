#pragma once

#include "core/grid.hpp"
#include "core/potential.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nqd::fb {

/// Δ_h u = -1 on {u < 0}, u = 0 elsewhere, u ≤ 0, Dirichlet data on the faces of the box.
struct ObstacleProblem {
  GridField data;  // boundary nodes carry the Dirichlet values; interior values are the start iterate
  double omega = 1.8;
  double tol = 1e-8;
  long max_iter = 500000;
  bool red_black = false;

  /// Box [lo, hi] with spacing h and boundary values taken from `boundary`.
  static ObstacleProblem from_field(const Vec& lo, const Vec& hi, double h, const ScalarField& boundary);
  void validate() const;
};

struct SolveResult {
  GridField u;
  GridMask mask;
  long iterations = 0;
  double final_residual = 0.0;
  double complementarity_gap = 0.0;
  std::vector<std::pair<long, double>> history;  // (sweep, residual) every 10 sweeps
  double tol = 0.0;
};

/// Thrown when max_iter is reached; carries the last iterate.
class SolveError : public ConvergenceError {
public:
  SolveError(const std::string& what, SolveResult best)
      : ConvergenceError(what, best.final_residual), best_(std::move(best)) {}
  [[nodiscard]] const SolveResult& best() const noexcept { return best_; }

private:
  SolveResult best_;
};

/// Projected SOR for the linear complementarity form of the problem.
SolveResult solve_obstacle(const ObstacleProblem& p);

/// max over interior nodes of |min(-u·2n/h², Δ_h u + 1)|.
double complementarity_residual(const GridField& u);

/// {u ≥ -eps_c}; eps_c < 0 selects max(tol, h²).
GridMask coincidence_set(const SolveResult& res, double eps_c = -1.0);

struct ConvexityReport {
  long violations = 0;
  long pairs_tested = 0;
  std::vector<Vec> locations;  // first few offending midpoints
};

/// Seeded pairs of mask nodes whose midpoint is more than one cell away from the mask.
ConvexityReport convexity_violations(const GridMask& mask, long pairs = 20000, std::uint64_t seed = 3);

/// Primitive integer directions with entries in [-max_entry, max_entry], one per ± pair.
std::vector<GridIndex> lattice_directions(int n, int max_entry = 2);

/// max of (u(x+he) - 2u(x) + u(x-he))/(h|e|)² over lattice directions and interior nodes,
/// skipping nodes within `band` cells of the free boundary of `mask` (if given).
double directional_concavity_max(const GridField& u, const std::vector<GridIndex>& directions,
                                 const GridMask* mask = nullptr, int band = 2);

/// Δ_h v = -1 on nodes outside the mask, v = 0 on the mask, same boundary data; no sign constraint.
GridField linear_resolve(const ObstacleProblem& p, const GridMask& mask);

/// Mask nodes with a face neighbour outside the mask.
std::vector<Vec> mask_boundary_points(const GridMask& mask);

/// max_{|x-x0| ≤ r} |u| / r² over free-boundary nodes x0, for each r.
std::vector<double> free_boundary_growth(const SolveResult& res, const std::vector<double>& radii, int max_centers = 64);

// Portable round trip: JSON header plus CSV node values; masks as run-length index lists.
nlohmann::ordered_json result_header(const SolveResult& res, double omega);
std::string values_csv(const GridField& u);
nlohmann::ordered_json mask_rle(const GridMask& mask);
GridMask mask_from_rle(const GridLayout& layout, const nlohmann::json& rle);
GridField field_from_csv(const GridLayout& layout, const std::string& csv);
GridLayout layout_from_json(const nlohmann::json& header);

}  // namespace nqd::fb
