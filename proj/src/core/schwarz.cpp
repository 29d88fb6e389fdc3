#include "core/schwarz.hpp"

#include <algorithm>
#include <cmath>

namespace nqd::schwarz {

using geometry::DomainPtr;
using geometry::DomainSpec;

int min_fit_samples(int n) { return (n + 1) * (n + 2) / 2 + 5; }

FitResult fit_internal_quadratic(const DomainSpec& d, const std::vector<Vec>& samples, double tol, bool closed_forms) {
  const int n = d.dim();
  NQD_REQUIRE(static_cast<int>(samples.size()) >= min_fit_samples(n), ErrorCode::InvalidArgument,
              "fit_internal_quadratic: need at least " + std::to_string(min_fit_samples(n)) + " samples");
  for (const Vec& x : samples)
    NQD_REQUIRE(d.contains(x), ErrorCode::InvalidArgument, "fit_internal_quadratic: sample outside the set");
  potential::Evaluator ev(Measure::indicator(std::make_shared<DomainSpec>(d)), tol, closed_forms);
  std::vector<double> vals;
  vals.reserve(samples.size());
  for (const Vec& x : samples) vals.push_back(ev.value(x));
  FitResult out;
  out.P = potential::fit_quadratic(samples, vals, false, &out.residual);
  return out;
}

namespace {

// Fit and field without the verdict gate; verify_null_qd needs u even when the fit fails.
SchwarzPotential build_schwarz(const DomainPtr& omega, double tol, const Options& opt) {
  NQD_REQUIRE(omega != nullptr, ErrorCode::InvalidArgument, "schwarz: domain missing");
  const DomainPtr d = geometry::complement_of(omega);
  const int n = d->dim();
  const auto pts = geometry::interior_samples(*d, std::max(opt.samples, min_fit_samples(n)), opt.seed);
  auto fit = fit_internal_quadratic(*d, pts, tol, opt.closed_forms);
  SchwarzPotential s;
  s.omega = omega;
  s.P = fit.P;
  s.fit_residual = fit.residual;
  s.far_form = fit.P;
  if (d->bounded()) {
    const auto cor = potential::taylor_correction(*d, 1e-3 * tol);
    s.far_form = QuadraticPolynomial(fit.P.A + cor.A, fit.P.b + cor.b, fit.P.c + cor.c);
  }
  auto ev = std::make_shared<potential::Evaluator>(Measure::indicator(d), tol, opt.closed_forms);
  const QuadraticPolynomial P = fit.P;
  s.field.dim = n;
  s.field.value = [ev, P](const Vec& x) { return P(x) - ev->value(x); };
  s.field.grad = [ev, P](const Vec& x) -> Vec { return P.gradient(x) - ev->gradient(x); };
  s.field.tag = "schwarz";
  return s;
}

}  // namespace

SchwarzPotential schwarz_from_complement(const DomainPtr& omega, double tol, const Options& opt) {
  SchwarzPotential s = build_schwarz(omega, tol, opt);
  if (s.fit_residual > kVerdictFactor * tol)
    throw Error(ErrorCode::NotQuadratic, "schwarz_from_complement: internal potential is not quadratic (residual " +
                                             std::to_string(s.fit_residual) + ")");
  return s;
}

SchwarzPotential halfspace_schwarz(const Vec& a, double b) {
  NQD_REQUIRE(std::abs(a.norm() - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "halfspace_schwarz: a must be a unit vector");
  const int n = static_cast<int>(a.size());
  SchwarzPotential s;
  s.omega = DomainSpec::half_space(a, b);
  s.P = QuadraticPolynomial(-0.5 * (a * a.transpose()), b * a, -0.5 * b * b);
  s.far_form = s.P;
  s.field.dim = n;
  s.field.value = [a, b](const Vec& x) {
    const double t = x.dot(a) - b;
    return t > 0.0 ? -0.5 * t * t : 0.0;
  };
  s.field.grad = [a, b](const Vec& x) -> Vec {
    const double t = x.dot(a) - b;
    return t > 0.0 ? Vec(-t * a) : Vec(Vec::Zero(a.size()));
  };
  s.field.tag = "halfspace";
  return s;
}

FormAnalysis quadratic_form_analysis(const QuadraticPolynomial& P, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(P.A, Eigen::EigenvaluesOnly);
  FormAnalysis f;
  f.negative_semidefinite = true;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()[i];
    f.eigenvalues.push_back(l);
    if (std::abs(l) > tol) ++f.rank;
    if (l > tol) f.negative_semidefinite = false;
  }
  return f;
}

NullQDReport verify_null_qd(const DomainPtr& omega, double tol, const std::vector<double>& radii,
                            const Options& opt) {
  NQD_REQUIRE(omega != nullptr, ErrorCode::InvalidArgument, "verify_null_qd: domain missing");
  NQD_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "verify_null_qd: tol must be positive");
  const DomainPtr d = geometry::complement_of(omega);
  NQD_REQUIRE(!d->is_empty(), ErrorCode::InvalidArgument, "verify_null_qd: complement has empty interior");
  SchwarzPotential s;
  if (const auto* h = std::get_if<geometry::HalfSpace>(&omega->shape())) {
    s = halfspace_schwarz(h->normal, h->offset);
  } else if (const auto* hc = std::get_if<geometry::HalfSpace>(&d->shape())) {
    // Ω = {x·a <= b}; its interior {x·(-a) > -b} carries the same potential.
    s = halfspace_schwarz(-hc->normal, -hc->offset);
  } else {
    s = build_schwarz(omega, tol, opt);
  }
  NullQDReport r;
  r.residual = s.fit_residual;
  const int n = omega->dim();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    NQD_REQUIRE(radii[k] > 0.0, ErrorCode::InvalidArgument, "verify_null_qd: radii must be positive");
    for (const Vec& x : geometry::sample_points(geometry::Region::sphere(n, radii[k]), 16, opt.seed + 101 + k)) {
      const double rad = x.norm();
      r.growth_max_ratio =
          std::max(r.growth_max_ratio, std::abs(s.field(x)) / (std::pow(1.0 + rad, 2) * std::log(2.0 + rad)));
    }
  }
  const auto form = quadratic_form_analysis(s.P, 100.0 * tol);
  r.A = s.P.A;
  r.rank = form.rank;
  r.eigenvalues = form.eigenvalues;
  r.is_null_qd = r.residual <= kVerdictFactor * tol && std::isfinite(r.growth_max_ratio);
  return r;
}

nlohmann::ordered_json report_to_json(const NullQDReport& r) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.A.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < r.A.cols(); ++j) row.push_back(r.A(i, j));
    a.push_back(row);
  }
  nlohmann::ordered_json out;
  out["residual"] = r.residual;
  out["is_null_qd"] = r.is_null_qd;
  out["A"] = a;
  out["rank"] = r.rank;
  out["eigenvalues"] = r.eigenvalues;
  out["growth_max_ratio"] = r.growth_max_ratio;
  return out;
}

}  // namespace nqd::schwarz
