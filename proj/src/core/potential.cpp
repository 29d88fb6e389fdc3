#include "core/potential.hpp"

#include "core/cubature.hpp"
#include "core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace nqd {

using geometry::DomainSpec;
using geometry::IntervalSet;

// ---- QuadraticPolynomial / ScalarField -----------------------------------------------------

QuadraticPolynomial::QuadraticPolynomial(Mat a, Vec b_, double c_) : A(std::move(a)), b(std::move(b_)), c(c_) {
  NQD_REQUIRE(A.rows() == A.cols() && A.rows() == b.size(), ErrorCode::DimensionMismatch,
              "quadratic polynomial: A and b disagree in dimension");
  // Keep the stored matrix exactly symmetric (upper triangle wins).
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = i + 1; j < A.cols(); ++j) A(j, i) = A(i, j);
}

QuadraticPolynomial QuadraticPolynomial::zero(int n) { return {Mat::Zero(n, n), Vec::Zero(n), 0.0}; }

double QuadraticPolynomial::operator()(const Vec& x) const { return x.dot(A * x) + b.dot(x) + c; }

Vec QuadraticPolynomial::gradient(const Vec& x) const { return 2.0 * (A * x) + b; }

Vec ScalarField::gradient(const Vec& x) const {
  if (grad) return grad(x);
  // Central differences as a fallback.
  const double h = 1e-5 * std::max(1.0, x.norm());
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (value(p) - value(m)) / (2.0 * h);
  }
  return g;
}

namespace potential {

namespace {

constexpr double kPi = std::numbers::pi;

double omega(int n) { return kernels::omega_n(n); }

// Primitive of s ↦ J(sθ) s^{n-1}.
double radial_primitive(int n, double s) {
  if (s <= 0.0) return 0.0;
  if (n == 2) return -(0.5 * s * s * std::log(s) - 0.25 * s * s) / (2.0 * kPi);
  return s * s / (2.0 * (n - 2) * omega(n));
}

// ∫_a^b r^{1-k} dr.
double moment(int k, double a, double b) {
  switch (k) {
    case 0:
      return 0.5 * (b * b - a * a);
    case 1:
      return b - a;
    case 2:
      return std::log(b / a);
    default: {
      const double tail = std::isinf(b) ? 0.0 : std::pow(b, 2.0 - k);
      return (std::pow(a, 2.0 - k) - tail) / (k - 2);
    }
  }
}

// ∫_a^b J(rθ) r^{n-1} dr for n = 2 (the k = 0 term of the log expansion).
double log_moment(double a, double b) {
  auto F = [](double r) { return r > 0.0 ? 0.5 * r * r * std::log(r) - 0.25 * r * r : 0.0; };
  return -(F(b) - F(a)) / (2.0 * kPi);
}

// Gegenbauer / Chebyshev zonal harmonics Z_k(x; θ) = |x|^k C_k^λ(x̂·θ), with T_k = coef_k r^{2-n-k} Z_k
// the degree-k term of J(x - rθ) for r > |x|.
struct Zonal {
  int n;
  double lambda;

  explicit Zonal(int dim) : n(dim), lambda(0.5 * (dim - 2)) {}

  [[nodiscard]] double coef(int k) const {
    if (n == 2) return k == 0 ? 0.0 : 1.0 / (2.0 * kPi * k);  // k = 0 handled by log_moment
    return 1.0 / ((n - 2) * omega(n));
  }

  void values(const Vec& x, const Vec& th, int kmax, std::vector<double>& z) const {
    z.assign(kmax + 1, 0.0);
    const double t = x.dot(th), x2 = x.squaredNorm();
    z[0] = 1.0;
    if (kmax == 0) return;
    if (n == 2) {
      z[1] = t;
      for (int k = 2; k <= kmax; ++k) z[k] = 2.0 * t * z[k - 1] - x2 * z[k - 2];
      return;
    }
    z[1] = 2.0 * lambda * t;
    for (int k = 2; k <= kmax; ++k)
      z[k] = (2.0 * (k + lambda - 1.0) * t * z[k - 1] - (k + 2.0 * lambda - 2.0) * x2 * z[k - 2]) / k;
  }

  void gradients(const Vec& x, const Vec& th, int kmax, std::vector<double>& z, std::vector<Vec>& g) const {
    values(x, th, kmax, z);
    const int dim = static_cast<int>(x.size());
    g.assign(kmax + 1, Vec::Zero(dim));
    if (kmax == 0) return;
    const double t = x.dot(th), x2 = x.squaredNorm();
    if (n == 2) {
      g[1] = th;
      for (int k = 2; k <= kmax; ++k)
        g[k] = 2.0 * (th * z[k - 1] + t * g[k - 1]) - (2.0 * x * z[k - 2] + x2 * g[k - 2]);
      return;
    }
    g[1] = 2.0 * lambda * th;
    for (int k = 2; k <= kmax; ++k)
      g[k] = (2.0 * (k + lambda - 1.0) * (th * z[k - 1] + t * g[k - 1]) -
              (k + 2.0 * lambda - 2.0) * (2.0 * x * z[k - 2] + x2 * g[k - 2])) /
             k;
  }

  // C_k^λ(1), the sup of |Z_k| over |x| = 1.
  [[nodiscard]] double peak(int k) const {
    if (n == 2) return 1.0;
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c *= (j + 2.0 * lambda - 1.0) / j;
    return c;
  }
};

struct Plan {
  int n = 2;
  double rho = 1.0;
  bool bounded = false;
  std::optional<cubature::Cap> cap;
  int kmax = 2;
};

Plan make_plan(const DomainSpec& d, const Vec& x) {
  Plan p;
  p.n = d.dim();
  if (auto bb = d.bounding_ball()) {
    p.bounded = true;
    p.rho = std::max(1.0, bb->first.norm() + bb->second);
    const Vec to_c = bb->first - x;
    const double dist = to_c.norm();
    if (bb->second > 0.0 && dist > bb->second * (1.0 + 1e-9))
      p.cap = cubature::Cap{to_c / dist, std::asin(std::min(1.0, bb->second / dist))};
    return p;
  }
  p.rho = std::max(1.0, 2.0 * x.norm());
  const double q = x.norm() / p.rho;
  const Zonal z(p.n);
  int k = 3;
  if (q > 0.0) {
    while (k < 200 && std::pow(q, k) * z.peak(k) > 1e-17) ++k;
  }
  p.kmax = std::max(3, k);
  return p;
}

// Points where ∂D crosses the circle |y - c| = r (plane only). Angular integrands built from
// clipped rays have kinks in the directions of these points.
std::vector<Vec> circle_crossings(const DomainSpec& d, const Vec& c, double r) {
  constexpr int kSamples = 1024;
  std::vector<Vec> out;
  auto at = [&](double t) { return Vec(c + r * make_vec({std::cos(t), std::sin(t)})); };
  const double step = 2.0 * kPi / kSamples;
  bool prev = d.contains(at(0.0));
  for (int i = 1; i <= kSamples; ++i) {
    const bool cur = d.contains(at(i * step));
    if (cur != prev) {
      double lo = (i - 1) * step, hi = i * step;
      for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (d.contains(at(mid)) == prev ? lo : hi) = mid;
      }
      out.push_back(at(0.5 * (lo + hi)));
    }
    prev = cur;
  }
  return out;
}

cubature::Options kernel_options(const DomainSpec& d, const Plan& p, const Vec& x) {
  cubature::Options o;
  if (p.n != 2 || p.bounded) return o;
  for (const Vec& y : circle_crossings(d, Vec::Zero(2), p.rho))
    if ((y - x).norm() > 0.0) o.break_directions.push_back(y - x);
  return o;
}

cubature::Options series_options(const DomainSpec& d, const Plan& p) {
  cubature::Options o;
  if (p.n != 2) return o;
  o.break_directions = circle_crossings(d, Vec::Zero(2), 1.0);
  if (!p.bounded)
    for (const Vec& y : circle_crossings(d, Vec::Zero(2), p.rho)) o.break_directions.push_back(y);
  return o;
}

IntervalSet near_rays(const DomainSpec& d, const Plan& p, const Vec& x, const Vec& th) {
  IntervalSet s = d.ray(x, th);
  if (!p.bounded)
    s = s.intersect(IntervalSet::quadratic_negative(1.0, 2.0 * th.dot(x), x.squaredNorm() - p.rho * p.rho));
  return s;
}

// ∫_{D ∩ B_ρ} J(x - y) dy in polar coordinates about x (radial part exact).
cubature::Result<double> kernel_part(const DomainSpec& d, const Plan& p, const Vec& x, double tol) {
  const int n = p.n;
  auto f = [&](const Vec& th) {
    double s = 0.0;
    const IntervalSet segs = near_rays(d, p, x, th);
    for (const auto& piece : segs.pieces())
      s += radial_primitive(n, piece.hi) - radial_primitive(n, piece.lo);
    return s;
  };
  return cubature::integrate_sphere(n, f, tol, p.cap, kernel_options(d, p, x));
}

cubature::Result<Vec> kernel_part_gradient(const DomainSpec& d, const Plan& p, const Vec& x, double tol) {
  const int n = p.n;
  const double w = 1.0 / omega(n);
  auto f = [&](const Vec& th) -> Vec { return (w * near_rays(d, p, x, th).total_length()) * th; };
  return cubature::integrate_sphere<Vec>(n, f, tol, Vec::Zero(n), p.cap, kernel_options(d, p, x));
}

// -∫_{D ∩ B_ρ ∖ B_1} Σ_{k≤2} T_k + ∫_{D ∖ B_ρ} Σ_{k≥3} T_k, by rays from the origin.
cubature::Result<double> series_part(const DomainSpec& d, const Plan& p, const Vec& x, double tol) {
  const int n = p.n;
  const Zonal zon(n);
  const Vec origin = Vec::Zero(n);
  thread_local std::vector<double> z;
  auto f = [&](const Vec& th) {
    const IntervalSet all = d.ray(origin, th);
    const IntervalSet near = all.clip(1.0, p.bounded ? IntervalSet::kInf : p.rho);
    const IntervalSet far = p.bounded ? IntervalSet{} : all.clip(p.rho, IntervalSet::kInf);
    if (near.empty() && far.empty()) return 0.0;
    zon.values(x, th, p.bounded ? 2 : p.kmax, z);
    double s = 0.0;
    for (const auto& pc : near.pieces()) {
      for (int k = 0; k <= 2; ++k) {
        if (n == 2 && k == 0)
          s -= log_moment(pc.lo, pc.hi);
        else
          s -= zon.coef(k) * z[k] * moment(k, pc.lo, pc.hi);
      }
    }
    for (const auto& pc : far.pieces())
      for (int k = 3; k <= p.kmax; ++k) s += zon.coef(k) * z[k] * moment(k, pc.lo, pc.hi);
    return s;
  };
  return cubature::integrate_sphere(n, f, tol, std::nullopt, series_options(d, p));
}

cubature::Result<Vec> series_part_gradient(const DomainSpec& d, const Plan& p, const Vec& x, double tol) {
  const int n = p.n;
  const Zonal zon(n);
  const Vec origin = Vec::Zero(n);
  thread_local std::vector<double> z;
  thread_local std::vector<Vec> g;
  auto f = [&](const Vec& th) -> Vec {
    Vec s = Vec::Zero(n);
    const IntervalSet all = d.ray(origin, th);
    const IntervalSet near = all.clip(1.0, p.bounded ? IntervalSet::kInf : p.rho);
    const IntervalSet far = p.bounded ? IntervalSet{} : all.clip(p.rho, IntervalSet::kInf);
    if (near.empty() && far.empty()) return s;
    zon.gradients(x, th, p.bounded ? 2 : p.kmax, z, g);
    for (const auto& pc : near.pieces())
      for (int k = 1; k <= 2; ++k) s -= (zon.coef(k) * moment(k, pc.lo, pc.hi)) * g[k];
    for (const auto& pc : far.pieces())
      for (int k = 3; k <= p.kmax; ++k) s += (zon.coef(k) * moment(k, pc.lo, pc.hi)) * g[k];
    return s;
  };
  return cubature::integrate_sphere<Vec>(n, f, tol, Vec::Zero(n), std::nullopt, series_options(d, p));
}

void require_point(const Measure& mu, const Vec& x) {
  mu.validate();
  NQD_REQUIRE(x.size() == mu.dim, ErrorCode::DimensionMismatch, "potential: point has the wrong dimension");
}

double atoms_value(const Measure& mu, const Vec& x) {
  double s = 0.0;
  for (const auto& [p, m] : mu.atoms) {
    NQD_REQUIRE((x - p).squaredNorm() > 0.0, ErrorCode::Singular, "potential evaluated at an atom");
    s += m * (p.squaredNorm() > 0.0 ? kernels::j2_kernel(mu.dim, x, p) : kernels::newton_kernel(mu.dim, x));
  }
  return s;
}

Vec atoms_gradient(const Measure& mu, const Vec& x) {
  Vec s = Vec::Zero(mu.dim);
  for (const auto& [p, m] : mu.atoms) {
    NQD_REQUIRE((x - p).squaredNorm() > 0.0, ErrorCode::Singular, "potential evaluated at an atom");
    Vec g = kernels::kernel_gradient(mu.dim, x - p);
    if (p.squaredNorm() > 1.0) g -= -kernels::kernel_gradient(mu.dim, p) + kernels::kernel_hessian(mu.dim, p) * x;
    s += m * g;
  }
  return s;
}

bool no_density(const Measure& mu) { return mu.density == 0.0 || mu.support->is_empty(); }

}  // namespace

double ball_constant(int n) { return n == 2 ? 0.25 : 1.0 / (2.0 * (n - 2)); }

Estimate eval_v2_estimate(const Measure& mu, const Vec& x, double tol) {
  require_point(mu, x);
  NQD_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "eval_v2: tol must be positive");
  Estimate e{atoms_value(mu, x), 0.0};
  if (no_density(mu)) return e;
  const DomainSpec& d = *mu.support;
  const Plan plan = make_plan(d, x);
  const double t = 0.5 * tol / std::abs(mu.density);
  auto a = kernel_part(d, plan, x, t);
  auto b = series_part(d, plan, x, t);
  const double err = std::abs(mu.density) * (a.error + b.error);
  if (!a.converged || !b.converged) throw ConvergenceError("eval_v2: cubature budget exhausted", err);
  e.value += mu.density * (a.value + b.value);
  e.error = err;
  return e;
}

double eval_v2(const Measure& mu, const Vec& x, double tol) { return eval_v2_estimate(mu, x, tol).value; }

Vec eval_v2_gradient(const Measure& mu, const Vec& x, double tol) {
  require_point(mu, x);
  NQD_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "eval_v2_gradient: tol must be positive");
  Vec g = atoms_gradient(mu, x);
  if (no_density(mu)) return g;
  const DomainSpec& d = *mu.support;
  const Plan plan = make_plan(d, x);
  const double t = 0.5 * tol / std::abs(mu.density);
  auto a = kernel_part_gradient(d, plan, x, t);
  auto b = series_part_gradient(d, plan, x, t);
  if (!a.converged || !b.converged)
    throw ConvergenceError("eval_v2_gradient: cubature budget exhausted",
                           std::abs(mu.density) * (a.error + b.error));
  return g + mu.density * (a.value + b.value);
}

double eval_newton(const Measure& mu, const Vec& x, double tol) {
  require_point(mu, x);
  double s = 0.0;
  for (const auto& [p, m] : mu.atoms) s += m * kernels::newton_kernel(mu.dim, x - p);
  if (no_density(mu)) return s;
  NQD_REQUIRE(mu.support->bounded(), ErrorCode::InvalidArgument, "eval_newton: support must be bounded");
  const Plan plan = make_plan(*mu.support, x);
  auto a = kernel_part(*mu.support, plan, x, tol / std::abs(mu.density));
  if (!a.converged) throw ConvergenceError("eval_newton: cubature budget exhausted", a.error);
  return s + mu.density * a.value;
}

// ---- closed forms --------------------------------------------------------------------------

double ball_potential_closed(int n, const Vec& center, double radius, const Vec& x) {
  NQD_REQUIRE(n >= 2 && center.size() == n && x.size() == n, ErrorCode::DimensionMismatch,
              "ball_potential_closed: dimension mismatch");
  NQD_REQUIRE(radius > 0.0, ErrorCode::InvalidArgument, "ball_potential_closed: radius must be positive");
  const Vec d = x - center;
  const double r2 = d.squaredNorm(), a2 = radius * radius;
  if (r2 < a2) {
    if (n == 2) return 0.25 * a2 - 0.5 * a2 * std::log(radius) - 0.25 * r2;
    return a2 / (2.0 * (n - 2)) - r2 / (2.0 * n);
  }
  return omega(n) * std::pow(radius, n) / n * kernels::newton_kernel(n, d);
}

Vec ball_potential_gradient(int n, const Vec& center, double radius, const Vec& x) {
  const Vec d = x - center;
  if (d.squaredNorm() < radius * radius) return -d / n;
  return (omega(n) * std::pow(radius, n) / n) * kernels::kernel_gradient(n, d);
}

EllipsoidCoefficients ellipsoid_coefficients(const Vec& semi_axes, const Vec& x) {
  const int n = static_cast<int>(semi_axes.size());
  NQD_REQUIRE(n >= 2 && x.size() == n, ErrorCode::DimensionMismatch, "ellipsoid: dimension mismatch");
  NQD_REQUIRE((semi_axes.array() > 0.0).all(), ErrorCode::InvalidArgument, "ellipsoid: semi-axes must be positive");
  const Vec a2 = semi_axes.array().square();
  auto confocal = [&](double lam) { return (x.array().square() / (a2.array() + lam)).sum(); };
  EllipsoidCoefficients out;
  out.a = Vec::Zero(n);
  if (confocal(0.0) > 1.0) {
    double lo = 0.0, hi = x.squaredNorm();
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (confocal(mid) > 1.0 ? lo : hi) = mid;
    }
    out.lambda = 0.5 * (lo + hi);
  }
  const double lam = out.lambda;
  const double prod = semi_axes.prod();
  if (n == 2) {
    const double p = std::sqrt(a2[0] + lam), q = std::sqrt(a2[1] + lam);
    out.a0 = 0.25 * prod * (1.0 + 2.0 * std::log(2.0) - 2.0 * std::log(p + q));
    out.a[0] = 0.5 * prod / (p * (p + q));
    out.a[1] = 0.5 * prod / (q * (p + q));
    return out;
  }
  // s = λ + m (t^{-2} - 1) maps [λ, ∞) onto (0, 1] and removes the slow algebraic tail.
  const double m = a2.maxCoeff() + lam;
  auto s_of = [&](double t) { return lam + m * (1.0 / (t * t) - 1.0); };
  auto root_prod = [&](double s) { return std::sqrt((a2.array() + s).prod()); };
  auto jac = [&](double t) { return 2.0 * m / (t * t * t); };
  const double scale = 0.25 * prod;
  auto f0 = [&](double t) {
    const double s = s_of(t);
    return jac(t) / root_prod(s);
  };
  out.a0 = scale * cubature::integrate(f0, 0.0, 1.0, 1e-14 * std::max(1.0, a2.maxCoeff())).value;
  for (int i = 0; i < n; ++i) {
    auto fi = [&](double t) {
      const double s = s_of(t);
      return jac(t) / ((a2[i] + s) * root_prod(s));
    };
    out.a[i] = scale * cubature::integrate(fi, 0.0, 1.0, 1e-15).value;
  }
  return out;
}

double ellipsoid_internal_closed(const Vec& semi_axes, const Vec& x) {
  NQD_REQUIRE(x.size() == semi_axes.size(), ErrorCode::DimensionMismatch, "ellipsoid: dimension mismatch");
  NQD_REQUIRE(x.cwiseQuotient(semi_axes).squaredNorm() < 1.0, ErrorCode::InvalidArgument,
              "ellipsoid_internal_closed: point is not inside the ellipsoid");
  const auto c = ellipsoid_coefficients(semi_axes, x);
  return c.a0 - (c.a.array() * x.array().square()).sum();
}

double ellipsoid_potential(const Vec& center, const Vec& semi_axes, const Vec& x) {
  const Vec d = x - center;
  const auto c = ellipsoid_coefficients(semi_axes, d);
  return c.a0 - (c.a.array() * d.array().square()).sum();
}

Vec ellipsoid_potential_gradient(const Vec& center, const Vec& semi_axes, const Vec& x) {
  const Vec d = x - center;
  const auto c = ellipsoid_coefficients(semi_axes, d);
  return -2.0 * c.a.cwiseProduct(d);
}

QuadraticPolynomial taylor_correction(const DomainSpec& d, double tol) {
  const int n = d.dim();
  NQD_REQUIRE(d.bounded(), ErrorCode::InvalidArgument, "taylor_correction: set must be bounded");
  const Vec origin = Vec::Zero(n);
  const double g = -1.0 / omega(n);
  const int len = 1 + n + n * n;
  auto f = [&](const Vec& th) -> Eigen::VectorXd {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(len);
    const IntervalSet segs = d.ray(origin, th).clip(1.0, IntervalSet::kInf);
    for (const auto& pc : segs.pieces()) {
      v[0] += n == 2 ? log_moment(pc.lo, pc.hi)
                     : moment(0, pc.lo, pc.hi) / ((n - 2) * omega(n));
      for (int i = 0; i < n; ++i) v[1 + i] += g * th[i] * moment(1, pc.lo, pc.hi);
      const double lg = moment(2, pc.lo, pc.hi);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          v[1 + n + i * n + j] += g * ((i == j ? 1.0 : 0.0) - n * th[i] * th[j]) * lg;
    }
    return v;
  };
  auto r = cubature::integrate_sphere<Eigen::VectorXd>(n, f, tol, Eigen::VectorXd::Zero(len));
  Mat h(n, n);
  Vec grad(n);
  for (int i = 0; i < n; ++i) {
    grad[i] = r.value[1 + i];
    for (int j = 0; j < n; ++j) h(i, j) = r.value[1 + n + i * n + j];
  }
  h = 0.5 * (h + h.transpose()).eval();
  // ∫ [J(y) - x·∇J(y) + ½ xᵀ∇²J(y) x] dy
  return {0.5 * h, -grad, r.value[0]};
}

// ---- Evaluator -----------------------------------------------------------------------------

Evaluator::Evaluator(Measure mu, double tol, bool closed_forms)
    : mu_(std::move(mu)), tol_(tol), route_(Route::Generic) {
  mu_.validate();
  NQD_REQUIRE(tol > 0.0 && std::isfinite(tol), ErrorCode::InvalidArgument, "potential: tol must be positive");
  const int n = mu_.dim;
  correction_ = QuadraticPolynomial::zero(n);
  const DomainSpec& d = *mu_.support;
  if (no_density(mu_)) {
    route_ = Route::Zero;
  } else if (d.is_whole_space()) {
    route_ = Route::Whole;
  } else if (closed_forms && std::holds_alternative<geometry::Ball>(d.shape())) {
    route_ = Route::Ball;
  } else if (closed_forms && std::holds_alternative<geometry::Ellipsoid>(d.shape())) {
    route_ = Route::Ellipsoid;
  } else if (const auto* c = std::get_if<geometry::Complement>(&d.shape()); c && c->inner->bounded()) {
    route_ = Route::ComplementOfBounded;
    inner_ = std::make_shared<Evaluator>(Measure::indicator(c->inner), tol, closed_forms);
  } else if (d.bounded()) {
    route_ = Route::BoundedCubature;
  }
  if (route_ == Route::Ball || route_ == Route::Ellipsoid || route_ == Route::BoundedCubature)
    correction_ = taylor_correction(d, 1e-3 * tol);
}

double Evaluator::density_value(const Vec& x) const {
  const DomainSpec& d = *mu_.support;
  const int n = mu_.dim;
  switch (route_) {
    case Route::Zero:
      return 0.0;
    case Route::Whole:
      return ball_constant(n) - x.squaredNorm() / (2.0 * n);
    case Route::Ball: {
      const auto& b = std::get<geometry::Ball>(d.shape());
      return ball_potential_closed(n, b.center, b.radius, x) - correction_(x);
    }
    case Route::Ellipsoid: {
      const auto& e = std::get<geometry::Ellipsoid>(d.shape());
      return ellipsoid_potential(e.center, e.semi_axes, x) - correction_(x);
    }
    case Route::ComplementOfBounded:
      return ball_constant(n) - x.squaredNorm() / (2.0 * n) - inner_->density_value(x);
    case Route::BoundedCubature:
      return eval_newton(Measure::indicator(mu_.support), x, tol_ / std::abs(mu_.density)) - correction_(x);
    case Route::Generic:
      return eval_v2(Measure::indicator(mu_.support), x, tol_ / std::abs(mu_.density));
  }
  return 0.0;
}

Vec Evaluator::density_gradient(const Vec& x) const {
  const DomainSpec& d = *mu_.support;
  const int n = mu_.dim;
  switch (route_) {
    case Route::Zero:
      return Vec::Zero(n);
    case Route::Whole:
      return -x / n;
    case Route::Ball: {
      const auto& b = std::get<geometry::Ball>(d.shape());
      return ball_potential_gradient(n, b.center, b.radius, x) - correction_.gradient(x);
    }
    case Route::Ellipsoid: {
      const auto& e = std::get<geometry::Ellipsoid>(d.shape());
      return ellipsoid_potential_gradient(e.center, e.semi_axes, x) - correction_.gradient(x);
    }
    case Route::ComplementOfBounded:
      return -x / n - inner_->density_gradient(x);
    case Route::BoundedCubature: {
      const Plan plan = make_plan(d, x);
      auto a = kernel_part_gradient(d, plan, x, tol_ / std::abs(mu_.density));
      if (!a.converged) throw ConvergenceError("gradient: cubature budget exhausted", a.error);
      return a.value - correction_.gradient(x);
    }
    case Route::Generic:
      return eval_v2_gradient(Measure::indicator(mu_.support), x, tol_ / std::abs(mu_.density));
  }
  return Vec::Zero(n);
}

double Evaluator::value(const Vec& x) const {
  NQD_REQUIRE(x.size() == mu_.dim, ErrorCode::DimensionMismatch, "potential: point has the wrong dimension");
  double v = atoms_value(mu_, x);
  if (route_ != Route::Zero) v += mu_.density * density_value(x);
  return v;
}

Vec Evaluator::gradient(const Vec& x) const {
  NQD_REQUIRE(x.size() == mu_.dim, ErrorCode::DimensionMismatch, "potential: point has the wrong dimension");
  Vec g = atoms_gradient(mu_, x);
  if (route_ != Route::Zero) g += mu_.density * density_gradient(x);
  return g;
}

ScalarField Evaluator::field() const {
  auto self = std::make_shared<Evaluator>(*this);
  ScalarField f;
  f.dim = mu_.dim;
  f.value = [self](const Vec& x) { return self->value(x); };
  f.grad = [self](const Vec& x) { return self->gradient(x); };
  f.tag = "V2";
  return f;
}

// ---- fits ----------------------------------------------------------------------------------

QuadraticPolynomial fit_quadratic(const std::vector<Vec>& pts, const std::vector<double>& vals, bool harmonic,
                                  double* max_residual) {
  NQD_REQUIRE(!pts.empty() && pts.size() == vals.size(), ErrorCode::InvalidArgument,
              "fit_quadratic: need matching, nonempty samples");
  const int n = static_cast<int>(pts.front().size());
  // Basis: 1, x_i, x_i x_j (i<j), and x_i² (full) or x_i² - x_{n-1}² (harmonic).
  struct Term {
    int i, j;
  };
  std::vector<Term> quad;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) quad.push_back({i, j});
  const int diag = harmonic ? n - 1 : n;
  const int cols = 1 + n + static_cast<int>(quad.size()) + diag;
  const int rows = static_cast<int>(pts.size());
  NQD_REQUIRE(rows >= cols, ErrorCode::RankDeficient, "fit_quadratic: fewer samples than basis functions");
  Mat M(rows, cols);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const Vec& x = pts[r];
    NQD_REQUIRE(x.size() == n, ErrorCode::DimensionMismatch, "fit_quadratic: mixed sample dimensions");
    int c = 0;
    M(r, c++) = 1.0;
    for (int i = 0; i < n; ++i) M(r, c++) = x[i];
    for (const auto& t : quad) M(r, c++) = x[t.i] * x[t.j];
    for (int i = 0; i < diag; ++i) M(r, c++) = harmonic ? x[i] * x[i] - x[n - 1] * x[n - 1] : x[i] * x[i];
    y[r] = vals[r];
  }
  // Column scaling keeps the QR rank decision independent of the sample window.
  Eigen::VectorXd scale = M.colwise().norm().transpose();
  for (int c = 0; c < cols; ++c) scale[c] = scale[c] > 0.0 ? scale[c] : 1.0;
  Mat Ms = M * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Mat> qr(Ms);
  qr.setThreshold(1e-12);
  NQD_REQUIRE(qr.rank() == cols, ErrorCode::RankDeficient, "fit_quadratic: design matrix is rank deficient");
  Eigen::VectorXd beta = qr.solve(y).cwiseQuotient(scale);
  if (max_residual) *max_residual = (M * beta - y).cwiseAbs().maxCoeff();
  Mat A = Mat::Zero(n, n);
  Vec b(n);
  int c = 0;
  const double c0 = beta[c++];
  for (int i = 0; i < n; ++i) b[i] = beta[c++];
  for (const auto& t : quad) {
    A(t.i, t.j) = 0.5 * beta[c];
    A(t.j, t.i) = 0.5 * beta[c++];
  }
  for (int i = 0; i < diag; ++i) {
    A(i, i) += beta[c];
    if (harmonic) A(n - 1, n - 1) -= beta[c];
    ++c;
  }
  return {A, b, c0};
}

double complementary_residual(const geometry::DomainPtr& a, const std::vector<Vec>& samples, double tol,
                              QuadraticPolynomial* fitted) {
  NQD_REQUIRE(a != nullptr, ErrorCode::InvalidArgument, "complementary_residual: domain missing");
  const int n = a->dim();
  const Measure ma = Measure::indicator(a);
  const Measure mc = Measure::indicator(geometry::complement_of(a));
  std::vector<double> vals;
  vals.reserve(samples.size());
  for (const Vec& x : samples) vals.push_back(eval_v2(ma, x, tol) + eval_v2(mc, x, tol) + x.squaredNorm() / (2.0 * n));
  double res = 0.0;
  auto h = fit_quadratic(samples, vals, true, &res);
  if (fitted) *fitted = h;
  return res;
}

GrowthReport growth_ratio(const Measure& mu, const std::vector<double>& radii, std::uint64_t seed, int per_sphere,
                          double tol) {
  mu.validate();
  GrowthReport rep;
  const double sup = std::abs(mu.density);
  std::optional<Evaluator> ev;
  if (sup > 0.0) ev.emplace(mu, tol);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    NQD_REQUIRE(radii[k] > 0.0, ErrorCode::InvalidArgument, "growth_ratio: radii must be positive");
    for (const Vec& x : geometry::sample_points(geometry::Region::sphere(mu.dim, radii[k]), per_sphere, seed + k)) {
      double ratio = 0.0;
      if (ev) {
        const double r = x.norm();
        ratio = std::abs(ev->value(x)) / (sup * std::pow(1.0 + r, 2) * std::log(2.0 + r));
      }
      rep.samples.emplace_back(radii[k], ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
  }
  return rep;
}

// ---- JSON ----------------------------------------------------------------------------------

nlohmann::json measure_to_json(const Measure& mu) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& [p, m] : mu.atoms) {
    nlohmann::json pt = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) pt.push_back(p[i]);
    atoms.push_back(nlohmann::json::array({pt, m}));
  }
  return {{"density", mu.density}, {"support", geometry::domain_to_json(*mu.support)}, {"atoms", atoms}};
}

Measure measure_from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& path, const std::string& msg) { throw Error(ErrorCode::Parse, path + ": " + msg); };
  if (!doc.is_object()) fail("$", "expected an object");
  Measure mu;
  if (!doc.contains("support")) fail("$.support", "missing field");
  mu.support = geometry::domain_from_json(doc["support"]);
  mu.dim = mu.support->dim();
  if (doc.contains("density")) {
    if (!doc["density"].is_number()) fail("$.density", "expected a number");
    mu.density = doc["density"].get<double>();
    if (!std::isfinite(mu.density)) fail("$.density", "must be finite");
  }
  if (doc.contains("atoms")) {
    const auto& atoms = doc["atoms"];
    if (!atoms.is_array()) fail("$.atoms", "expected an array");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string path = "$.atoms[" + std::to_string(k) + "]";
      const auto& a = atoms[k];
      if (!a.is_array() || a.size() != 2 || !a[0].is_array() || !a[1].is_number())
        fail(path, "expected [point, mass]");
      if (static_cast<int>(a[0].size()) != mu.dim) fail(path + "[0]", "point has the wrong dimension");
      Vec p(mu.dim);
      for (int i = 0; i < mu.dim; ++i) {
        if (!a[0][i].is_number()) fail(path + "[0]", "expected numbers");
        p[i] = a[0][i].get<double>();
      }
      mu.atoms.emplace_back(p, a[1].get<double>());
    }
  }
  mu.validate();
  return mu;
}

}  // namespace potential
}  // namespace nqd
