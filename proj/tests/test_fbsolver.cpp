#include "core/fbsolver.hpp"
#include "core/schwarz.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nqd;
using namespace nqd::fb;
using geometry::DomainSpec;
using nqd::testing::load_domain;

namespace {

ScalarField field_of(int n, std::function<double(const Vec&)> f) {
  ScalarField s;
  s.dim = n;
  s.value = std::move(f);
  return s;
}

// Distance from p to the ellipse (a cos t, b sin t): coarse scan, then Newton on t.
double ellipse_distance(const Vec& p, double a, double b) {
  auto d2 = [&](double t) { return std::pow(p[0] - a * std::cos(t), 2) + std::pow(p[1] - b * std::sin(t), 2); };
  double best = 0.0;
  for (int i = 0; i < 720; ++i)
    if (d2(i * std::numbers::pi / 360) < d2(best)) best = i * std::numbers::pi / 360;
  double t = best;
  for (int it = 0; it < 30; ++it) {
    const double c = std::cos(t), s = std::sin(t);
    const double g = (a * a - b * b) * s * c - p[0] * a * s + p[1] * b * c;
    const double dg = (a * a - b * b) * (c * c - s * s) - p[0] * a * c - p[1] * b * s;
    if (dg == 0.0) break;
    t -= g / dg;
  }
  return std::sqrt(std::min(d2(t), d2(best)));
}

double hausdorff_to_ellipse(const std::vector<Vec>& pts, double a, double b) {
  double h = 0.0;
  for (const Vec& p : pts) h = std::max(h, ellipse_distance(p, a, b));
  for (int i = 0; i < 720; ++i) {
    const double t = i * std::numbers::pi / 360;
    const Vec q = make_vec({a * std::cos(t), b * std::sin(t)});
    double m = std::numeric_limits<double>::infinity();
    for (const Vec& p : pts) m = std::min(m, (p - q).norm());
    h = std::max(h, m);
  }
  return h;
}

ObstacleProblem ellipse_problem(double h, double box = 3.0) {
  static const auto s = schwarz::schwarz_from_complement(load_domain("ellipse_exterior.json"), 1e-9);
  auto p = ObstacleProblem::from_field(Vec::Constant(2, -box), Vec::Constant(2, box), h, s.field);
  p.omega = 1.9;
  p.tol = 1e-8;
  return p;
}

double shifted_error(double h, double s) {
  auto exact = [s](const Vec& x) { return -0.5 * std::pow(std::min(x[0] - s, 0.0), 2); };
  auto p = ObstacleProblem::from_field(make_vec({-1}), make_vec({1}), h, field_of(1, exact));
  p.tol = 1e-10;
  const auto res = solve_obstacle(p);
  double e = 0.0;
  for (long k = 0; k < res.u.size(); ++k) e = std::max(e, std::abs(res.u.values[k] - exact(res.u.node(k))));
  return e;
}

}  // namespace

TEST(Obstacle, ZeroDataGivesZero) {
  auto p = ObstacleProblem::from_field(Vec::Constant(2, -1), Vec::Constant(2, 1), 0.125,
                                      field_of(2, [](const Vec&) { return 0.0; }));
  const auto res = solve_obstacle(p);
  for (double v : res.u.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(res.mask.count_on(), res.mask.size());
  EXPECT_EQ(res.iterations, 0);
}

TEST(Obstacle, OneDimensionalOrder) {
  const std::vector<double> hs = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  std::vector<double> err(hs.size(), 0.0);
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (int j = 0; j < 64; ++j) {
      // Golden-ratio shifts put the free boundary at many offsets inside a cell on every grid.
      const double s = 0.5 * std::fmod(0.6180339887498949 * (j + 1), 1.0);
      err[i] = std::max(err[i], shifted_error(hs[i], s));
    }
  for (std::size_t i = 1; i < hs.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.8) << hs[i];
}

TEST(Obstacle, OrderingsAgree) {
  auto p = ellipse_problem(0.125);
  p.tol = 1e-12;
  const auto lex = solve_obstacle(p);
  p.red_black = true;
  const auto rb = solve_obstacle(p);
  double d = 0.0;
  for (long k = 0; k < lex.u.size(); ++k) d = std::max(d, std::abs(lex.u.values[k] - rb.u.values[k]));
  EXPECT_LT(d, 1e-10);
}

TEST(Obstacle, ResidualHistory) {
  const auto res = solve_obstacle(ellipse_problem(0.125));
  ASSERT_GE(res.history.size(), 2u);
  for (std::size_t i = 1; i < res.history.size(); ++i) {
    EXPECT_EQ(res.history[i].first, 10 * static_cast<long>(i));
    EXPECT_LE(res.history[i].second, res.history[i - 1].second);
  }
  EXPECT_LE(res.final_residual, res.tol);
  EXPECT_NEAR(complementarity_residual(res.u), res.final_residual, 1e-15);
  EXPECT_LE(res.complementarity_gap, 1e-6);
}

TEST(Obstacle, CoincidenceSetApproachesEllipse) {
  double prev = 0.0;
  for (double h : {0.125, 0.0625}) {
    const auto res = solve_obstacle(ellipse_problem(h));
    const double d = hausdorff_to_ellipse(mask_boundary_points(res.mask), 2.0, 1.0);
    EXPECT_LE(d, 2 * h) << h;
    if (prev > 0.0) EXPECT_LT(d, prev);
    prev = d;
    EXPECT_EQ(convexity_violations(res.mask).violations, 0) << h;
    EXPECT_LE(directional_concavity_max(res.u, lattice_directions(2), &res.mask, 2), 10 * h) << h;
  }
}

TEST(Obstacle, LinearResolveMatches) {
  const auto p = ellipse_problem(0.125);
  const auto res = solve_obstacle(p);
  const auto v = linear_resolve(p, coincidence_set(res, 0.0));
  double d = 0.0;
  for (long k = 0; k < v.size(); ++k) d = std::max(d, std::abs(v.values[k] - res.u.values[k]));
  EXPECT_LE(d, 10 * p.tol);
}

TEST(Obstacle, GrowthIsQuadratic) {
  const auto res = solve_obstacle(ellipse_problem(0.0625, 4.0));
  const auto g = free_boundary_growth(res, {0.25, 0.5, 1.0});
  ASSERT_EQ(g.size(), 3u);
  // Free-boundary nodes sit up to h off the true boundary, so small radii read high.
  for (double v : g) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_LE(*std::max_element(g.begin(), g.end()) / *std::min_element(g.begin(), g.end()), 2.0);
}

TEST(Obstacle, Validation) {
  auto p = ellipse_problem(0.25);
  p.omega = 2.0;
  EXPECT_THROW(solve_obstacle(p), Error);
  auto q = ObstacleProblem::from_field(Vec::Constant(2, -1), Vec::Constant(2, 1), 0.25,
                                      field_of(2, [](const Vec&) { return 0.1; }));
  EXPECT_THROW(solve_obstacle(q), Error);
  auto r = ellipse_problem(0.125);
  r.max_iter = 3;
  try {
    solve_obstacle(r);
    FAIL();
  } catch (const SolveError& e) {
    EXPECT_EQ(e.best().iterations, 3);
    EXPECT_GT(e.best().final_residual, r.tol);
  }
}

TEST(Convexity, DiscAndLShape) {
  const GridLayout layout = GridLayout::box(Vec::Constant(2, -1), Vec::Constant(2, 1), 1.0 / 16);
  GridMask disc, ell;
  static_cast<GridLayout&>(disc) = layout;
  static_cast<GridLayout&>(ell) = layout;
  disc.on.resize(layout.nodes());
  ell.on.resize(layout.nodes());
  for (long k = 0; k < layout.nodes(); ++k) {
    const Vec x = layout.node(k);
    disc.on[k] = x.norm() < 0.7;
    ell.on[k] = std::abs(x[0]) < 0.8 && std::abs(x[1]) < 0.8 && (x[0] < 0.0 || x[1] < 0.0);
  }
  EXPECT_EQ(convexity_violations(disc).violations, 0);
  const auto rep = convexity_violations(ell);
  EXPECT_GT(rep.violations, 0);
  EXPECT_FALSE(rep.locations.empty());
  EXPECT_EQ(rep.pairs_tested, 20000);
}

TEST(Lattice, Directions) {
  EXPECT_EQ(lattice_directions(2, 1).size(), 4u);   // (1,0) (0,1) (1,1) (1,-1)
  EXPECT_EQ(lattice_directions(2, 2).size(), 8u);
  EXPECT_EQ(lattice_directions(3, 1).size(), 13u);
}

TEST(Portable, RoundTrip) {
  const auto p = ellipse_problem(0.25);
  const auto res = solve_obstacle(p);
  const auto head = result_header(res, p.omega);
  const GridLayout layout = layout_from_json(nlohmann::json::parse(head.dump()));
  EXPECT_TRUE(layout.same_layout(res.u));
  const auto back = mask_from_rle(layout, nlohmann::json::parse(mask_rle(res.mask).dump()));
  EXPECT_EQ(back.on, res.mask.on);
  const auto u = field_from_csv(layout, values_csv(res.u));
  ASSERT_EQ(u.size(), res.u.size());
  for (long k = 0; k < u.size(); ++k) EXPECT_NEAR(u.values[k], res.u.values[k], 1e-11 * (1 + std::abs(u.values[k])));
  EXPECT_THROW(field_from_csv(layout, "1,2,3"), Error);
}
