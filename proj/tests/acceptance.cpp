// Acceptance run: one PASS/FAIL line per criterion, then a summary line.
// Exit status is 0 once all criteria were evaluated; --strict also requires every one to pass.
#include "core/analysis.hpp"
#include "core/fbsolver.hpp"
#include "core/geometry.hpp"
#include "core/kernels.hpp"
#include "core/potential.hpp"
#include "core/quadrature.hpp"
#include "core/schwarz.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>

using namespace nqd;
using geometry::DomainSpec;

namespace {

constexpr double kPi = std::numbers::pi;

geometry::DomainPtr load(const char* name) {
  std::ifstream in(std::string(NQD_TEST_DATA) + "/" + name);
  return geometry::domain_from_json(nlohmann::json::parse(in));
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScalarField field_of(int n, std::function<double(const Vec&)> f) {
  ScalarField s;
  s.dim = n;
  s.value = std::move(f);
  return s;
}

// ---- 1 -----------------------------------------------------------------------------------
Outcome ball_constants() {
  Outcome o;
  for (int n : {2, 3}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double v = potential::eval_v2(Measure::indicator(DomainSpec::ball(Vec::Zero(n), 1.0)), Vec::Zero(n), 1e-8);
    const double t = seconds_since(t0);
    const double want = n == 2 ? 0.25 : 0.5;
    o.check(std::abs(v - want) <= 1e-6 && t < 1.0, fmt("n=%g V2(0)=%.10f (%.3fs)", n, v, t));
  }
  return o;
}

// ---- 2, 3 --------------------------------------------------------------------------------
Outcome verify_fixtures(std::vector<schwarz::NullQDReport>* nulls) {
  Outcome o;
  for (const char* f : {"ellipse_exterior.json", "ellipsoid3_exterior.json"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = schwarz::verify_null_qd(load(f), 1e-6);
    const double t = seconds_since(t0);
    o.check(r.is_null_qd && r.residual <= 1e-5 && t < 60.0,
            std::string(f) + fmt(" residual=%.3g null=%g (%.1fs)", r.residual, r.is_null_qd, t));
    if (r.is_null_qd) nulls->push_back(r);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto sq = schwarz::verify_null_qd(load("square_exterior.json"), 1e-6);
  const double t = seconds_since(t0);
  o.check(!sq.is_null_qd && sq.residual >= 1e-2 && t < 60.0,
          fmt("square residual=%.3g null=%g (%.1fs)", sq.residual, sq.is_null_qd, t));
  const auto hs = schwarz::verify_null_qd(load("halfspace.json"), 1e-6);
  if (hs.is_null_qd) nulls->push_back(hs);
  return o;
}

Outcome trace_identity(const std::vector<schwarz::NullQDReport>& nulls) {
  Outcome o;
  o.check(!nulls.empty(), fmt("%g null-QD fits", static_cast<double>(nulls.size())));
  for (const auto& r : nulls) {
    const double t = 2.0 * r.A.trace();
    o.check(std::abs(t + 1.0) <= 1e-6, fmt("n=%g 2trA=%.10f", static_cast<double>(r.A.rows()), t));
  }
  return o;
}

// ---- 4 -----------------------------------------------------------------------------------
Outcome sign_and_growth() {
  Outcome o;
  const auto ell = schwarz::schwarz_from_complement(load("ellipse_exterior.json"), 1e-6);
  const auto hs = schwarz::halfspace_schwarz(make_vec({0, 1}), 0.0);
  for (const auto& [name, s] : {std::pair{"ellipse", &ell}, std::pair{"halfspace", &hs}}) {
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    double worst = -1e300;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, s->field(make_vec({u(g), u(g)})));
    o.check(worst <= 1e-6, std::string(name) + fmt(" max u=%.3g", worst));
    const auto seq = analysis::dyadic_sup(s->field, 6);
    double lo = 1e300, hi = 0.0;
    for (const auto& e : seq.entries) {
      lo = std::min(lo, e.normalized);
      hi = std::max(hi, e.normalized);
    }
    const double spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    o.check(spread < 4.0, std::string(name) + fmt(" S_j/4^j in [%.3g, %.3g] spread=%.3g", lo, hi, spread));
  }
  return o;
}

// ---- 5 -----------------------------------------------------------------------------------
Outcome acf() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = schwarz::schwarz_from_complement(load("ellipse_exterior.json"), 1e-6);
  const auto grid = GridField::sample(s.field, 5.0, 1.0 / 32);
  const auto rep = analysis::acf_monotone_report(grid, 0, {1, 2, 3, 4});
  std::string rows;
  for (const auto& [r, phi] : rep.rows) rows += fmt(" %.4g", phi);
  o.check(rep.violations == 0, "ellipse phi(1..4)=" + rows + fmt(" violations=%g", rep.violations));
  const double h = 1.0 / 64;
  const auto plus = GridField::sample(field_of(2, [](const Vec& x) { return std::max(x[0], 0.0); }), 1.25, h);
  const auto minus = GridField::sample(field_of(2, [](const Vec& x) { return std::max(-x[0], 0.0); }), 1.25, h);
  const double phi = analysis::acf_phi(plus, minus, 1.0);
  const double rel = std::abs(phi / (kPi * kPi / 4) - 1.0);
  o.check(rel <= 0.01, fmt("half-plane phi=%.6f rel.err=%.2g", phi, rel));
  const double t = seconds_since(t0);
  o.check(t < 120.0, fmt("%.1fs", t));
  return o;
}

// ---- 6 -----------------------------------------------------------------------------------
double ellipse_distance(const Vec& p, double a, double b) {
  auto d2 = [&](double t) { return std::pow(p[0] - a * std::cos(t), 2) + std::pow(p[1] - b * std::sin(t), 2); };
  double best = 0.0;
  for (int i = 0; i < 1440; ++i)
    if (d2(i * kPi / 720) < d2(best)) best = i * kPi / 720;
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

Outcome obstacle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  // 1-D: u = -min(x - s, 0)²/2 on [-1, 1], worst case over shifts of the free boundary.
  std::vector<double> err;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    double e = 0.0;
    for (int j = 0; j < 64; ++j) {
      const double s = 0.5 * std::fmod(0.6180339887498949 * (j + 1), 1.0);
      auto exact = [s](const Vec& x) { return -0.5 * std::pow(std::min(x[0] - s, 0.0), 2); };
      auto p = fb::ObstacleProblem::from_field(make_vec({-1}), make_vec({1}), h, field_of(1, exact));
      p.tol = 1e-10;
      const auto res = fb::solve_obstacle(p);
      for (long k = 0; k < res.u.size(); ++k) e = std::max(e, std::abs(res.u.values[k] - exact(res.u.node(k))));
    }
    err.push_back(e);
  }
  const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
  o.check(p1 >= 1.8 && p2 >= 1.8, fmt("1-D orders %.3f %.3f", p1, p2));

  const double h = 1.0 / 32;
  const auto s = schwarz::schwarz_from_complement(load("ellipse_exterior.json"), 1e-9);
  auto p = fb::ObstacleProblem::from_field(Vec::Constant(2, -3), Vec::Constant(2, 3), h, s.field);
  p.omega = 1.9;
  p.tol = 1e-8;
  const auto res = fb::solve_obstacle(p);
  const auto pts = fb::mask_boundary_points(res.mask);
  double haus = 0.0;
  for (const Vec& x : pts) haus = std::max(haus, ellipse_distance(x, 2.0, 1.0));
  for (int i = 0; i < 1440; ++i) {
    const Vec q = make_vec({2.0 * std::cos(i * kPi / 720), std::sin(i * kPi / 720)});
    double m = std::numeric_limits<double>::infinity();
    for (const Vec& x : pts) m = std::min(m, (x - q).norm());
    haus = std::max(haus, m);
  }
  o.check(haus <= 2 * h, fmt("Hausdorff=%.4f (2h=%.4f)", haus, 2 * h));
  const auto conv = fb::convexity_violations(res.mask);
  o.check(conv.violations == 0, fmt("convexity violations=%g", static_cast<double>(conv.violations)));
  const double dc = fb::directional_concavity_max(res.u, fb::lattice_directions(2), &res.mask, 2);
  o.check(dc <= 10 * h, fmt("concavity max=%.3g (10h=%.3g)", dc, 10 * h));
  const double t = seconds_since(t0);
  o.check(t < 300.0, fmt("%.1fs", t));
  return o;
}

// ---- 7 -----------------------------------------------------------------------------------
Outcome thin_decay() {
  Outcome o;
  const auto ball = analysis::thin_blowup_decay(*DomainSpec::ball(Vec::Zero(3), 1.0), {10, 100});
  const double ratio = ball[1].value / ball[0].value;
  o.check(ratio <= 1.1e-3, fmt("ball n=3 ratio=%.4g", ratio));
  const auto par = analysis::thin_blowup_decay(*load("paraboloid.json"), {4, 16, 64});
  const bool dec = par[1].value < par[0].value && par[2].value < par[1].value;
  o.check(dec, fmt("paraboloid %.4f %.4f %.4f", par[0].value, par[1].value, par[2].value));
  return o;
}

// ---- 8 -----------------------------------------------------------------------------------
Outcome balayage() {
  Outcome o;
  const auto hs = load("halfspace.json");
  const auto r = quadrature::quasi_balayage_bound(*hs, schwarz::halfspace_schwarz(make_vec({0, 1}), 0.0), {1, 10, 100});
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, std::abs(row.constant - 0.5));
  o.check(worst <= 1e-9, fmt("half-space |C-1/2| max=%.2g", worst));
  const auto strip = load("strip_exterior.json");
  const auto rs = quadrature::quasi_balayage_bound(*strip, schwarz::schwarz_from_complement(strip, 1e-6), {1, 10, 100});
  std::string cs;
  bool bounded = true;
  for (const auto& row : rs.rows) {
    cs += fmt(" %.4g", row.constant);
    bounded = bounded && std::isfinite(row.constant) && row.constant <= 0.5 + 1e-6;
  }
  o.check(bounded, "strip C(1,10,100)=" + cs);
  return o;
}

// ---- 9 -----------------------------------------------------------------------------------
Outcome cone_log() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = analysis::log_grid(0, 2, 9);
  const auto sec = analysis::fit_cone_expansion(*load("sector30.json"), make_vec({0, 1}), grid, 1e-10);
  o.check(std::abs(sec.log_coeff) > 5 * sec.log_stderr, fmt("sector log=%.6g stderr=%.2g", sec.log_coeff, sec.log_stderr));
  const auto hs = analysis::fit_cone_expansion(*load("halfspace.json"), make_vec({0, 1}), grid, 1e-10);
  o.check(std::abs(hs.log_coeff) <= 3 * hs.log_stderr, fmt("half-space log=%.3g stderr=%.2g", hs.log_coeff, hs.log_stderr));
  const double t = seconds_since(t0);
  o.check(t < 120.0, fmt("%.1fs", t));
  return o;
}

// ---- 10 ----------------------------------------------------------------------------------
Outcome quadrature_identities() {
  Outcome o;
  double worst_ball = 0.0;
  for (int n : {2, 3}) {
    const Vec c = Vec::Constant(n, 0.1);
    const auto b = DomainSpec::ball(c, 0.8);
    const auto mu = Measure::atom(c, kernels::omega_n(n) / n * std::pow(0.8, n));
    for (const auto& h : quadrature::harmonic_polynomial_basis(n, 4))
      worst_ball = std::max(worst_ball, quadrature::quadrature_identity_residual(*b, mu, h, 1e-10));
  }
  o.check(worst_ball <= 1e-6, fmt("ball mean value max=%.2g", worst_ball));
  const auto ell = load("ellipse_exterior.json");
  double worst_ell = 0.0;
  for (const auto& h : quadrature::harmonic_test_family(2, *geometry::complement_of(ell), 10, 1))
    worst_ell = std::max(worst_ell, quadrature::null_identity_residual(*ell, h, 1e-6));
  o.check(worst_ell <= 5e-6, fmt("ellipse null identity max=%.2g", worst_ell));
  const auto sq = load("square_exterior.json");
  double best_sq = 0.0;
  for (const auto& h : quadrature::harmonic_test_family(2, *geometry::complement_of(sq), 10, 1))
    best_sq = std::max(best_sq, quadrature::null_identity_residual(*sq, h, 1e-6));
  o.check(best_sq >= 1e-3, fmt("square null identity max=%.2g", best_sq));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  std::vector<schwarz::NullQDReport> nulls;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"ball potential constants", ball_constants},
      {"null-QD verification", [&] { return verify_fixtures(&nulls); }},
      {"trace identity", [&] { return trace_identity(nulls); }},
      {"sign and quadratic growth", sign_and_growth},
      {"ACF monotonicity", acf},
      {"obstacle solver", obstacle},
      {"thin-complement decay", thin_decay},
      {"quasi-balayage", balayage},
      {"cone log term", cone_log},
      {"quadrature identities", quadrature_identities},
  };
  int evaluated = 0, passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    ++evaluated;
    passed += o.pass ? 1 : 0;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("criteria evaluated: %d, passed: %d\n", evaluated, passed);
  return strict && passed != evaluated ? 1 : 0;
}
