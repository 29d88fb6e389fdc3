#include "core/commands.hpp"

#include "core/analysis.hpp"
#include "core/cubature.hpp"
#include "core/fbsolver.hpp"
#include "core/quadrature.hpp"
#include "core/schwarz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace nqd::commands {

using geometry::DomainPtr;
using geometry::DomainSpec;
using nlohmann::ordered_json;
using report::num;
using report::Report;

namespace {

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_json(const Mat& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

ordered_json quadratic_json(const QuadraticPolynomial& p) {
  return {{"A", mat_json(p.A)}, {"b", vec_json(p.b)}, {"c", p.c}};
}

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

const DomainSpec& need_domain(const RunConfig& c) {
  NQD_REQUIRE(c.domain != nullptr, ErrorCode::InvalidArgument, c.command + ": --domain is required");
  return *c.domain;
}

schwarz::Options fit_options(const RunConfig& c) {
  schwarz::Options o;
  o.seed = c.seed;
  o.closed_forms = c.closed_forms;
  return o;
}

// Schwarz potential of Ω = domain; half-spaces use the closed form.
schwarz::SchwarzPotential schwarz_of(const RunConfig& c) {
  const DomainPtr omega = c.domain;
  need_domain(c);
  if (const auto* h = std::get_if<geometry::HalfSpace>(&omega->shape())) return schwarz::halfspace_schwarz(h->normal, h->offset);
  return schwarz::schwarz_from_complement(omega, c.tol, fit_options(c));
}

Report header(const RunConfig& c) {
  Report r;
  r.json["command"] = c.command;
  if (c.domain) r.json["domain"] = c.domain->kind();
  return r;
}

Report run_verify(const RunConfig& c) {
  const DomainPtr omega = c.domain;
  need_domain(c);
  Report r = header(c);
  const auto radii = or_default(c.radii, {1, 4, 16, 64});
  const auto rep = schwarz::verify_null_qd(omega, c.tol, radii, fit_options(c));
  r.json["tol"] = c.tol;
  const auto rj = schwarz::report_to_json(rep);
  for (const auto& [k, v] : rj.items()) r.json[k] = v;
  r.json["trace_A"] = rep.A.trace();
  r.table.header = {"domain", "residual", "is_null_qd", "rank", "growth_max_ratio", "trace_A"};
  r.table.add({omega->kind(), num(rep.residual), rep.is_null_qd ? "true" : "false", std::to_string(rep.rank),
               num(rep.growth_max_ratio), num(rep.A.trace())});
  r.verdict = rep.is_null_qd ? 1 : 0;
  return r;
}

Report run_potential(const RunConfig& c) {
  const DomainSpec& d = need_domain(c);
  const int n = d.dim();
  Report r = header(c);
  const Measure mu = Measure::indicator(c.domain);
  const auto pts = geometry::sample_points(geometry::Region::box(Vec::Constant(n, -c.box), Vec::Constant(n, c.box)),
                                           c.count, c.seed);
  for (int i = 0; i < n; ++i) r.table.header.push_back("x" + std::to_string(i + 1));
  r.table.header.push_back("value");
  r.table.header.push_back("tol_achieved");
  ordered_json rows = ordered_json::array();
  for (const Vec& x : pts) {
    const auto e = potential::eval_v2_estimate(mu, x, c.tol);
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) row.push_back(num(x[i]));
    row.push_back(num(e.value));
    row.push_back(num(e.error));
    r.table.add(row);
    rows.push_back({{"x", vec_json(x)}, {"value", e.value}, {"tol_achieved", e.error}});
  }
  r.json["tol"] = c.tol;
  r.json["rows"] = rows;
  return r;
}

Report run_schwarz(const RunConfig& c) {
  need_domain(c);
  Report r = header(c);
  r.table.header = {"form", "i", "j", "value"};
  try {
    const auto s = schwarz_of(c);
    r.json["is_quadratic"] = true;
    r.json["fit_residual"] = s.fit_residual;
    r.json["P"] = quadratic_json(s.P);
    r.json["far_form"] = quadratic_json(s.far_form);
    const int n = s.P.dim();
    for (const auto& [name, p] : {std::pair{"P", &s.P}, std::pair{"far_form", &s.far_form}}) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          r.table.add({std::string(name) + ".A", std::to_string(i), std::to_string(j), num(p->A(i, j))});
      for (int i = 0; i < n; ++i) r.table.add({std::string(name) + ".b", std::to_string(i), "", num(p->b[i])});
      r.table.add({std::string(name) + ".c", "", "", num(p->c)});
    }
    r.verdict = 1;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotQuadratic) throw;
    r.json["is_quadratic"] = false;
    r.json["message"] = e.what();
    r.verdict = 0;
  }
  return r;
}

Report run_quadrature(const RunConfig& c) {
  const DomainSpec& d = need_domain(c);
  const int n = d.dim();
  Report r = header(c);
  r.table.header = {"domain", "test_kind", "alpha", "pole", "residual", "tol"};
  const double cub_tol = 1e-2 * c.tol;
  ordered_json rows = ordered_json::array();
  double worst = 0.0;
  auto emit = [&](const quadrature::HarmonicTestFn& h, double res) {
    worst = std::max(worst, res);
    r.table.add({d.kind(), h.kind_name(), h.alpha_string(), h.pole_string(), num(res), num(cub_tol)});
    rows.push_back({{"test_kind", h.kind_name()}, {"alpha", h.alpha_string()}, {"pole", h.pole_string()},
                    {"residual", res}, {"tol", cub_tol}});
  };
  if (const auto* b = std::get_if<geometry::Ball>(&d.shape())) {
    const double vol = cubature::sphere_area(n) / n * std::pow(b->radius, n);
    const Measure mu = Measure::atom(b->center, vol);
    for (const auto& h : quadrature::harmonic_polynomial_basis(n, 4))
      emit(h, quadrature::quadrature_identity_residual(d, mu, h, cub_tol));
  } else {
    const DomainPtr comp = geometry::complement_of(c.domain);
    for (const auto& h : quadrature::harmonic_test_family(n, *comp, c.count, c.seed))
      emit(h, quadrature::null_identity_residual(d, h, cub_tol));
  }
  r.json["max_residual"] = worst;
  r.json["threshold"] = c.tol;
  r.json["rows"] = rows;
  r.verdict = worst <= c.tol ? 1 : 0;
  return r;
}

Report run_acf(const RunConfig& c) {
  need_domain(c);
  Report r = header(c);
  const auto s = schwarz_of(c);
  const auto grid = GridField::sample(s.field, c.box, c.grid_h);
  const auto rep = analysis::acf_monotone_report(grid, c.axis, or_default(c.radii, {1, 2, 3, 4}));
  r.table.header = {"r", "phi"};
  ordered_json rows = ordered_json::array();
  for (const auto& [radius, phi] : rep.rows) {
    r.table.add({num(radius), num(phi)});
    rows.push_back({{"r", radius}, {"phi", phi}});
  }
  r.json["axis"] = c.axis;
  r.json["grid_h"] = c.grid_h;
  r.json["box"] = c.box;
  r.json["tol_mono"] = rep.tol_mono;
  r.json["violations"] = rep.violations;
  r.json["rows"] = rows;
  r.verdict = rep.violations == 0 ? 1 : 0;
  return r;
}

Report run_blowup(const RunConfig& c) {
  const DomainSpec& d = need_domain(c);
  Report r = header(c);
  r.json["series"] = c.series;
  ordered_json rows = ordered_json::array();
  if (c.series == "decay") {
    r.table.header = {"rho", "decay", "decay_mod_h2", "density"};
    const auto out = analysis::thin_blowup_decay(d, or_default(c.rho, {4, 16, 64}), c.seed, 24, c.tol);
    bool decreasing = true;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto& row = out[k];
      if (k > 0 && !(row.value < out[k - 1].value)) decreasing = false;
      r.table.add({num(row.rho), num(row.value), num(row.modulo_h2), num(row.density)});
      rows.push_back({{"rho", row.rho}, {"decay", row.value}, {"decay_mod_h2", row.modulo_h2}, {"density", row.density}});
    }
    r.json["strictly_decreasing"] = decreasing;
    r.verdict = decreasing ? 1 : 0;
  } else if (c.series == "dyadic") {
    r.table.header = {"j", "S_j", "normalized"};
    const auto s = schwarz_of(c);
    const auto seq = analysis::dyadic_sup(s.field, c.jmax, c.seed);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& e : seq.entries) {
      lo = std::min(lo, e.normalized);
      hi = std::max(hi, e.normalized);
      r.table.add({std::to_string(e.j), num(e.sup), num(e.normalized)});
      rows.push_back({{"j", e.j}, {"S_j", e.sup}, {"normalized", e.normalized}});
    }
    r.json["spread"] = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  } else if (c.series == "rescale") {
    r.table.header = {"rho", "sup_deviation"};
    const auto s = schwarz_of(c);
    const int n = s.P.dim();
    const Mat a = s.far_form.A;
    auto pts = geometry::sample_points(geometry::Region::ball(n, 1.0), 4 * c.count, c.seed);
    const auto shell = geometry::sample_points(geometry::Region::sphere(n, 1.0), 4 * c.count, c.seed + 1);
    pts.insert(pts.end(), shell.begin(), shell.end());
    for (double rho : or_default(c.rho, {4, 16, 64})) {
      const auto ur = analysis::blowup_rescale(s.field, rho);
      double dev = 0.0;
      for (const Vec& x : pts) dev = std::max(dev, std::abs(ur(x) - x.dot(a * x)));
      r.table.add({num(rho), num(dev)});
      rows.push_back({{"rho", rho}, {"sup_deviation", dev}});
    }
  } else if (c.series == "balayage") {
    r.table.header = {"rho", "density", "constant", "applicable"};
    const auto s = schwarz_of(c);
    const auto rep = quadrature::quasi_balayage_bound(d, s, or_default(c.rho, {1, 10, 100}), c.seed);
    for (const auto& row : rep.rows) {
      r.table.add({num(row.rho), num(row.density), num(row.constant), row.applicable ? "true" : "false"});
      rows.push_back({{"rho", row.rho}, {"density", row.density}, {"constant", row.constant}, {"applicable", row.applicable}});
    }
    r.json["c0_est"] = rep.c0_est;
    r.json["max_constant"] = rep.max_constant;
    r.json["non_increasing"] = rep.non_increasing;
  } else {
    throw Error(ErrorCode::InvalidArgument, "blowup: --series must be decay, dyadic, rescale or balayage");
  }
  r.json["rows"] = rows;
  return r;
}

Report run_density(const RunConfig& c) {
  const DomainSpec& d = need_domain(c);
  Report r = header(c);
  r.table.header = {"rho", "value", "stderr"};
  ordered_json rows = ordered_json::array();
  geometry::SamplerConfig cfg;
  cfg.samples = c.samples;
  cfg.seed = c.seed;
  for (double rho : or_default(c.rho, {1, 10, 100})) {
    const auto e = geometry::density_ratio(d, rho, cfg);
    r.table.add({num(rho), num(e.value), num(e.stderr_)});
    rows.push_back({{"rho", rho}, {"value", e.value}, {"stderr", e.stderr_}});
  }
  r.json["samples"] = c.samples;
  r.json["seed"] = c.seed;
  r.json["rows"] = rows;
  return r;
}

Report run_obstacle(const RunConfig& c) {
  const DomainSpec& d = need_domain(c);
  const int n = d.dim();
  Report r = header(c);
  const auto s = schwarz_of(c);
  auto p = fb::ObstacleProblem::from_field(Vec::Constant(n, -c.box), Vec::Constant(n, c.box), c.grid_h, s.field);
  p.tol = c.tol;
  p.omega = c.omega;
  const auto res = fb::solve_obstacle(p);
  const auto hj = fb::result_header(res, p.omega);
  for (const auto& [k, v] : hj.items()) r.json[k] = v;
  const auto conv = fb::convexity_violations(res.mask, 20000, c.seed);
  r.json["convexity_violations"] = conv.violations;
  r.json["concavity_max"] = fb::directional_concavity_max(res.u, fb::lattice_directions(n), &res.mask, 2);
  r.json["coincidence_volume"] = static_cast<double>(res.mask.count_on()) * std::pow(res.u.h, n);
  r.table.header = {"index"};
  for (int a = 0; a < n; ++a) r.table.header.push_back("x" + std::to_string(a + 1));
  r.table.header.push_back("u");
  for (long k = 0; k < res.u.size(); ++k) {
    const Vec x = res.u.node(k);
    std::vector<std::string> row{std::to_string(k)};
    for (int a = 0; a < n; ++a) row.push_back(num(x[a]));
    row.push_back(num(res.u.values[k]));
    r.table.add(std::move(row));
  }
  r.verdict = conv.violations == 0 ? 1 : 0;
  return r;
}

Report run_cone(const RunConfig& c) {
  const DomainSpec& d = need_domain(c);
  const int n = d.dim();
  Report r = header(c);
  Vec x0(n);
  if (!c.direction.empty()) {
    NQD_REQUIRE(static_cast<int>(c.direction.size()) == n, ErrorCode::DimensionMismatch,
                "cone: --direction has the wrong dimension");
    for (int i = 0; i < n; ++i) x0[i] = c.direction[i];
    x0.normalize();
  } else if (const auto* k = std::get_if<geometry::Cone>(&d.shape())) {
    x0 = k->axis;
  } else if (const auto* h = std::get_if<geometry::HalfSpace>(&d.shape())) {
    x0 = h->normal;
  }
  const auto fit = analysis::fit_cone_expansion(d, x0, or_default(c.rho, analysis::log_grid(0, 2, 9)), 1e-4 * c.tol);
  static const char* names[] = {"log_rho", "one", "inv_rho", "inv_rho2"};
  r.table.header = {"term", "coeff", "stderr"};
  ordered_json coeffs = ordered_json::object();
  for (int j = 0; j < 4; ++j) {
    r.table.add({names[j], num(fit.coeffs[j]), num(fit.stderrs[j])});
    coeffs[names[j]] = {{"value", fit.coeffs[j]}, {"stderr", fit.stderrs[j]}};
  }
  r.json["direction"] = vec_json(x0);
  r.json["log_coeff"] = fit.log_coeff;
  r.json["log_stderr"] = fit.log_stderr;
  r.json["quad_coeff"] = fit.quad_coeff;
  r.json["quad_stderr"] = fit.quad_stderr;
  r.json["fit_residual"] = fit.fit_residual;
  r.json["coefficients"] = coeffs;
  ordered_json samples = ordered_json::array();
  for (const auto& [rho, y] : fit.samples) samples.push_back({{"rho", rho}, {"value", y}});
  r.json["samples"] = samples;
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify", "potential", "schwarz", "quadrature", "acf",
                                              "blowup", "density",   "obstacle", "cone"};
  return names;
}

report::Report run(const RunConfig& cfg) {
  NQD_REQUIRE(cfg.tol > 0.0 && std::isfinite(cfg.tol), ErrorCode::InvalidArgument, "tol must be positive");
  NQD_REQUIRE(cfg.grid_h > 0.0 && cfg.box > 0.0, ErrorCode::InvalidArgument, "grid-h and box must be positive");
  NQD_REQUIRE(cfg.count >= 0 && cfg.samples >= 2, ErrorCode::InvalidArgument, "count and samples must be positive");
  static const std::map<std::string, std::function<Report(const RunConfig&)>> table{
      {"verify", run_verify},   {"potential", run_potential}, {"schwarz", run_schwarz},
      {"quadrature", run_quadrature}, {"acf", run_acf},       {"blowup", run_blowup},
      {"density", run_density}, {"obstacle", run_obstacle},   {"cone", run_cone}};
  const auto it = table.find(cfg.command);
  NQD_REQUIRE(it != table.end(), ErrorCode::InvalidArgument, "unknown command: " + cfg.command);
  return it->second(cfg);
}

}  // namespace nqd::commands
