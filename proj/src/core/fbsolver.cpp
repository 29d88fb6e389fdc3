#include "core/fbsolver.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace nqd::fb {

namespace {

constexpr double kPositiveSlack = 1e-10;

std::vector<long> interior_nodes(const GridLayout& g) {
  std::vector<long> out;
  for (long k = 0; k < g.nodes(); ++k)
    if (!g.on_boundary(k)) out.push_back(k);
  return out;
}

double neighbour_sum(const GridField& u, long k) {
  double s = 0.0;
  for (int a = 0; a < u.dim; ++a) {
    const long st = u.stride(a);
    s += u.values[k + st] + u.values[k - st];
  }
  return s;
}

double laplacian_at(const GridField& u, long k) {
  return (neighbour_sum(u, k) - 2.0 * u.dim * u.values[k]) / (u.h * u.h);
}

bool in_range(const GridLayout& g, const GridIndex& m) {
  for (int a = 0; a < g.dim; ++a)
    if (m[a] < 0 || m[a] >= g.count[a]) return false;
  return true;
}

// Nodes of the mask's free boundary: an on-node with an off face neighbour, or vice versa.
std::vector<std::uint8_t> free_boundary_flags(const GridMask& mask) {
  std::vector<std::uint8_t> f(mask.on.size(), 0);
  for (long k = 0; k < mask.size(); ++k) {
    const GridIndex m = mask.multi(k);
    for (int a = 0; a < mask.dim && !f[k]; ++a)
      for (int s : {-1, 1}) {
        GridIndex q = m;
        q[a] += s;
        if (in_range(mask, q) && mask.on[mask.index(q)] != mask.on[k]) {
          f[k] = 1;
          break;
        }
      }
  }
  return f;
}

// Chebyshev dilation of `flags` by `band` cells.
std::vector<std::uint8_t> dilate(const GridLayout& g, std::vector<std::uint8_t> flags, int band) {
  for (int it = 0; it < band; ++it)
    for (int a = 0; a < g.dim; ++a) {
      std::vector<std::uint8_t> next = flags;
      const long st = g.stride(a);
      for (long k = 0; k < g.nodes(); ++k) {
        if (!flags[k]) continue;
        const long m = g.multi(k)[a];
        if (m > 0) next[k - st] = 1;
        if (m + 1 < g.count[a]) next[k + st] = 1;
      }
      flags.swap(next);
    }
  return flags;
}

}  // namespace

ObstacleProblem ObstacleProblem::from_field(const Vec& lo, const Vec& hi, double h, const ScalarField& boundary) {
  ObstacleProblem p;
  const GridLayout layout = GridLayout::box(lo, hi, h);
  NQD_REQUIRE(boundary.dim == layout.dim, ErrorCode::DimensionMismatch, "obstacle: boundary field dimension mismatch");
  p.data.values.clear();
  static_cast<GridLayout&>(p.data) = layout;
  p.data.values.assign(static_cast<std::size_t>(layout.nodes()), 0.0);
  for (long k = 0; k < layout.nodes(); ++k)
    if (layout.on_boundary(k)) p.data.values[k] = boundary(layout.node(k));
  return p;
}

void ObstacleProblem::validate() const {
  data.validate();
  NQD_REQUIRE(omega >= 1.0 && omega < 2.0, ErrorCode::InvalidArgument, "obstacle: relaxation must lie in [1, 2)");
  NQD_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "obstacle: tol must be positive");
  NQD_REQUIRE(max_iter > 0, ErrorCode::InvalidArgument, "obstacle: max_iter must be positive");
  for (int a = 0; a < data.dim; ++a)
    NQD_REQUIRE(data.count[a] >= 3, ErrorCode::InvalidArgument, "obstacle: grid needs an interior node per axis");
  double scale = 1.0;
  for (double v : data.values) scale = std::max(scale, std::abs(v));
  for (long k = 0; k < data.size(); ++k)
    if (data.on_boundary(k))
      NQD_REQUIRE(data.values[k] <= kPositiveSlack * scale, ErrorCode::InvalidArgument,
                  "obstacle: boundary data must be nonpositive");
}

double complementarity_residual(const GridField& u) {
  const double scale = 2.0 * u.dim / (u.h * u.h);
  double r = 0.0;
  for (long k = 0; k < u.size(); ++k) {
    if (u.on_boundary(k)) continue;
    r = std::max(r, std::abs(std::min(-u.values[k] * scale, laplacian_at(u, k) + 1.0)));
  }
  return r;
}

SolveResult solve_obstacle(const ObstacleProblem& p) {
  p.validate();
  SolveResult res;
  res.tol = p.tol;
  res.u = p.data;
  for (double& v : res.u.values) v = std::min(v, 0.0);
  std::vector<long> order = interior_nodes(res.u);
  if (p.red_black) {
    std::stable_partition(order.begin(), order.end(), [&](long k) {
      const GridIndex m = res.u.multi(k);
      long s = 0;
      for (int a = 0; a < res.u.dim; ++a) s += m[a];
      return s % 2 == 0;
    });
  }
  const int n = res.u.dim;
  const double h2 = p.data.h * p.data.h;
  const double inv = 1.0 / (2.0 * n);
  std::vector<long> strides(n);
  for (int a = 0; a < n; ++a) strides[a] = res.u.stride(a);
  double* u = res.u.values.data();
  double resid = complementarity_residual(res.u);
  res.history.emplace_back(0, resid);
  long sweep = 0;
  while (resid > p.tol && sweep < p.max_iter) {
    for (const long k : order) {
      double s = h2;
      for (const long st : strides) s += u[k + st] + u[k - st];
      const double v = u[k] + p.omega * (s * inv - u[k]);
      u[k] = v < 0.0 ? v : 0.0;
    }
    ++sweep;
    if (sweep % 10 == 0) {
      resid = complementarity_residual(res.u);
      res.history.emplace_back(sweep, resid);
    }
  }
  if (sweep % 10 != 0) resid = complementarity_residual(res.u);
  res.iterations = sweep;
  res.final_residual = resid;
  for (long k = 0; k < res.u.size(); ++k)
    if (!res.u.on_boundary(k))
      res.complementarity_gap = std::max(res.complementarity_gap, std::abs(u[k] * (laplacian_at(res.u, k) + 1.0)));
  res.mask = coincidence_set(res);
  if (resid > p.tol)
    throw SolveError("solve_obstacle: no convergence after " + std::to_string(sweep) + " sweeps", std::move(res));
  return res;
}

GridMask coincidence_set(const SolveResult& res, double eps_c) {
  const double eps = eps_c >= 0.0 ? eps_c : std::max(res.tol, res.u.h * res.u.h);
  GridMask m;
  static_cast<GridLayout&>(m) = res.u;
  m.on.resize(res.u.values.size());
  for (long k = 0; k < res.u.size(); ++k) m.on[k] = res.u.values[k] >= -eps ? 1 : 0;
  return m;
}

ConvexityReport convexity_violations(const GridMask& mask, long pairs, std::uint64_t seed) {
  std::vector<long> members;
  for (long k = 0; k < mask.size(); ++k)
    if (mask.on[k]) members.push_back(k);
  NQD_REQUIRE(!members.empty(), ErrorCode::InvalidArgument, "convexity_violations: empty mask");
  ConvexityReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  const int n = mask.dim;
  const long cube = static_cast<long>(std::pow(3, n));
  for (long t = 0; t < pairs; ++t) {
    const GridIndex a = mask.multi(members[pick(rng)]);
    const GridIndex b = mask.multi(members[pick(rng)]);
    GridIndex mid{};
    for (int i = 0; i < n; ++i) mid[i] = (a[i] + b[i]) / 2;
    ++rep.pairs_tested;
    bool near = false;
    for (long c = 0; c < cube && !near; ++c) {
      GridIndex q = mid;
      long r = c;
      for (int i = 0; i < n; ++i) {
        q[i] += r % 3 - 1;
        r /= 3;
      }
      if (in_range(mask, q) && mask.on[mask.index(q)]) near = true;
    }
    if (!near) {
      ++rep.violations;
      if (rep.locations.size() < 16) rep.locations.push_back(mask.node(mask.index(mid)));
    }
  }
  return rep;
}

std::vector<GridIndex> lattice_directions(int n, int max_entry) {
  NQD_REQUIRE(n >= 1 && n <= kMaxDim && max_entry >= 1, ErrorCode::InvalidArgument, "lattice_directions: bad input");
  std::vector<GridIndex> out;
  const int side = 2 * max_entry + 1;
  const long total = static_cast<long>(std::pow(side, n));
  for (long c = 0; c < total; ++c) {
    GridIndex e{};
    long r = c, g = 0;
    for (int i = 0; i < n; ++i) {
      e[i] = r % side - max_entry;
      r /= side;
      g = std::gcd(g, std::abs(e[i]));
    }
    if (g != 1) continue;
    // Keep one of ±e: the first nonzero entry positive.
    int first = 0;
    while (e[first] == 0) ++first;
    if (e[first] > 0) out.push_back(e);
  }
  return out;
}

double directional_concavity_max(const GridField& u, const std::vector<GridIndex>& directions, const GridMask* mask,
                                 int band) {
  NQD_REQUIRE(!directions.empty(), ErrorCode::InvalidArgument, "directional_concavity_max: no directions");
  std::vector<std::uint8_t> skip;
  if (mask) {
    NQD_REQUIRE(mask->same_layout(u), ErrorCode::DimensionMismatch, "directional_concavity_max: mask layout mismatch");
    skip = dilate(u, free_boundary_flags(*mask), band);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < u.size(); ++k) {
    if (!skip.empty() && skip[k]) continue;
    const GridIndex m = u.multi(k);
    for (const GridIndex& e : directions) {
      GridIndex p = m, q = m;
      double len2 = 0.0;
      for (int a = 0; a < u.dim; ++a) {
        p[a] += e[a];
        q[a] -= e[a];
        len2 += static_cast<double>(e[a] * e[a]);
      }
      if (!in_range(u, p) || !in_range(u, q)) continue;
      const double d2 = (u.values[u.index(p)] - 2.0 * u.values[k] + u.values[u.index(q)]) / (u.h * u.h * len2);
      best = std::max(best, d2);
    }
  }
  return best;
}

GridField linear_resolve(const ObstacleProblem& p, const GridMask& mask) {
  p.validate();
  NQD_REQUIRE(mask.same_layout(p.data) && mask.size() == p.data.size(), ErrorCode::DimensionMismatch,
              "linear_resolve: mask layout mismatch");
  GridField v = p.data;
  const int n = v.dim;
  std::vector<long> slot(v.values.size(), -1);
  long unknowns = 0;
  for (long k = 0; k < v.size(); ++k) {
    if (v.on_boundary(k)) continue;
    if (mask.on[k])
      v.values[k] = 0.0;
    else
      slot[k] = unknowns++;
  }
  // -Δ_h v = 1 scaled by h²: (2n) v_k - Σ neighbours = h².
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(unknowns, v.h * v.h);
  for (long k = 0; k < v.size(); ++k) {
    if (slot[k] < 0) continue;
    trip.emplace_back(slot[k], slot[k], 2.0 * n);
    for (int a = 0; a < n; ++a)
      for (long nb : {k - v.stride(a), k + v.stride(a)}) {
        if (slot[nb] >= 0)
          trip.emplace_back(slot[k], slot[nb], -1.0);
        else
          rhs[slot[k]] += v.values[nb];
      }
  }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  NQD_REQUIRE(solver.info() == Eigen::Success, ErrorCode::Singular, "linear_resolve: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  for (long k = 0; k < v.size(); ++k)
    if (slot[k] >= 0) v.values[k] = x[slot[k]];
  return v;
}

std::vector<Vec> mask_boundary_points(const GridMask& mask) {
  const auto flags = free_boundary_flags(mask);
  std::vector<Vec> out;
  for (long k = 0; k < mask.size(); ++k)
    if (flags[k] && mask.on[k]) out.push_back(mask.node(k));
  return out;
}

std::vector<double> free_boundary_growth(const SolveResult& res, const std::vector<double>& radii, int max_centers) {
  const GridField& u = res.u;
  const auto flags = free_boundary_flags(res.mask);
  std::vector<long> centers;
  for (long k = 0; k < u.size(); ++k)
    if (flags[k] && res.mask.on[k]) centers.push_back(k);
  NQD_REQUIRE(!centers.empty(), ErrorCode::InvalidArgument, "free_boundary_growth: no free boundary nodes");
  if (static_cast<long>(centers.size()) > max_centers) {
    std::vector<long> picked;
    const double step = static_cast<double>(centers.size()) / max_centers;
    for (int i = 0; i < max_centers; ++i) picked.push_back(centers[static_cast<std::size_t>(i * step)]);
    centers.swap(picked);
  }
  std::vector<double> out;
  for (double r : radii) {
    NQD_REQUIRE(r > 0.0, ErrorCode::InvalidArgument, "free_boundary_growth: radii must be positive");
    const long reach = static_cast<long>(std::floor(r / u.h + 1e-9));
    double c = 0.0;
    for (long k0 : centers) {
      const GridIndex m0 = u.multi(k0);
      const Vec x0 = u.node(k0);
      GridIndex lo{}, hi{};
      for (int a = 0; a < u.dim; ++a) {
        lo[a] = m0[a] - reach;
        hi[a] = m0[a] + reach;
      }
      NQD_REQUIRE(in_range(u, lo) && in_range(u, hi), ErrorCode::InvalidArgument,
                  "free_boundary_growth: radius reaches outside the box");
      GridIndex m = lo;
      double sup = 0.0;
      for (;;) {
        const long k = u.index(m);
        if ((u.node(k) - x0).norm() <= r + 1e-12) sup = std::max(sup, std::abs(u.values[k]));
        int a = 0;
        while (a < u.dim && ++m[a] > hi[a]) {
          m[a] = lo[a];
          ++a;
        }
        if (a == u.dim) break;
      }
      c = std::max(c, sup / (r * r));
    }
    out.push_back(c);
  }
  return out;
}

// ---- portable format ----------------------------------------------------------------------

namespace {

std::string num12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::ordered_json vec_json(const Vec& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

nlohmann::ordered_json result_header(const SolveResult& res, double omega) {
  nlohmann::ordered_json j;
  j["box"] = {{"lo", vec_json(res.u.lo)}, {"hi", vec_json(res.u.hi())}};
  j["h"] = res.u.h;
  j["tol"] = res.tol;
  j["omega"] = omega;
  j["iterations"] = res.iterations;
  j["final_residual"] = res.final_residual;
  j["complementarity_gap"] = res.complementarity_gap;
  j["coincidence_nodes"] = res.mask.count_on();
  j["mask"] = mask_rle(res.mask);
  return j;
}

std::string values_csv(const GridField& u) {
  std::ostringstream os;
  os << "index";
  for (int a = 0; a < u.dim; ++a) os << ",x" << a + 1;
  os << ",u\n";
  for (long k = 0; k < u.size(); ++k) {
    const Vec x = u.node(k);
    os << k;
    for (int a = 0; a < u.dim; ++a) os << ',' << num12(x[a]);
    os << ',' << num12(u.values[k]) << '\n';
  }
  return os.str();
}

nlohmann::ordered_json mask_rle(const GridMask& mask) {
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  long k = 0;
  while (k < mask.size()) {
    if (!mask.on[k]) {
      ++k;
      continue;
    }
    const long start = k;
    while (k < mask.size() && mask.on[k]) ++k;
    runs.push_back({start, k - start});
  }
  return runs;
}

GridMask mask_from_rle(const GridLayout& layout, const nlohmann::json& rle) {
  NQD_REQUIRE(rle.is_array(), ErrorCode::Parse, "mask: expected an array of [start, length] runs");
  GridMask m;
  static_cast<GridLayout&>(m) = layout;
  m.on.assign(static_cast<std::size_t>(layout.nodes()), 0);
  for (const auto& run : rle) {
    NQD_REQUIRE(run.is_array() && run.size() == 2 && run[0].is_number_integer() && run[1].is_number_integer(),
                ErrorCode::Parse, "mask: malformed run");
    const long s = run[0].get<long>(), len = run[1].get<long>();
    NQD_REQUIRE(s >= 0 && len >= 0 && s + len <= m.size(), ErrorCode::Parse, "mask: run outside the grid");
    std::fill(m.on.begin() + s, m.on.begin() + s + len, 1);
  }
  return m;
}

GridLayout layout_from_json(const nlohmann::json& header) {
  try {
    const auto lo_j = header.at("box").at("lo");
    const auto hi_j = header.at("box").at("hi");
    NQD_REQUIRE(lo_j.size() == hi_j.size() && !lo_j.empty(), ErrorCode::Parse, "grid header: box corners disagree");
    Vec lo(static_cast<Eigen::Index>(lo_j.size())), hi(lo.size());
    for (std::size_t i = 0; i < lo_j.size(); ++i) {
      lo[i] = lo_j[i].get<double>();
      hi[i] = hi_j[i].get<double>();
    }
    return GridLayout::box(lo, hi, header.at("h").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("grid header: ") + e.what());
  }
}

GridField field_from_csv(const GridLayout& layout, const std::string& csv) {
  GridField g;
  static_cast<GridLayout&>(g) = layout;
  g.values.assign(static_cast<std::size_t>(layout.nodes()), 0.0);
  std::istringstream is(csv);
  std::string line;
  NQD_REQUIRE(static_cast<bool>(std::getline(is, line)), ErrorCode::Parse, "grid csv: missing header");
  long seen = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const auto last = line.rfind(',');
    NQD_REQUIRE(comma != std::string::npos, ErrorCode::Parse, "grid csv: malformed row");
    long k = 0;
    double v = 0.0;
    try {
      k = std::stol(line.substr(0, comma));
      v = std::stod(line.substr(last + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "grid csv: malformed row");
    }
    NQD_REQUIRE(k >= 0 && k < g.size(), ErrorCode::Parse, "grid csv: index outside the grid");
    g.values[k] = v;
    ++seen;
  }
  NQD_REQUIRE(seen == g.size(), ErrorCode::Parse, "grid csv: node count does not match the header");
  return g;
}

}  // namespace nqd::fb
