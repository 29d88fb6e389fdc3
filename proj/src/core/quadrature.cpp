#include "core/quadrature.hpp"

#include "core/cubature.hpp"
#include "core/search.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace nqd::quadrature {

using geometry::DomainSpec;

double HarmonicTestFn::operator()(const Vec& x) const {
  NQD_REQUIRE(x.size() == dim, ErrorCode::DimensionMismatch, "test function: point has the wrong dimension");
  if (kind == Kind::KernelDerivative) return kernels::kernel_derivative(dim, alpha, x - pole);
  double s = 0.0;
  for (const auto& t : terms) {
    double m = t.coeff;
    for (int i = 0; i < dim; ++i) m *= std::pow(x[i], t.powers.entries[i]);
    s += m;
  }
  return s;
}

int HarmonicTestFn::degree() const {
  if (kind == Kind::KernelDerivative) return alpha.order();
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.powers.order());
  return d;
}

std::string HarmonicTestFn::kind_name() const {
  return kind == Kind::KernelDerivative ? "kernelDerivative" : "harmonicPolynomial";
}

std::string HarmonicTestFn::alpha_string() const {
  if (kind == Kind::KernelDerivative) return alpha.to_string();
  std::ostringstream os;
  os << "deg" << degree();
  return os.str();
}

std::string HarmonicTestFn::pole_string() const {
  if (kind != Kind::KernelDerivative) return "";
  std::ostringstream os;
  os.precision(12);
  for (Eigen::Index i = 0; i < pole.size(); ++i) os << (i ? " " : "") << pole[i];
  return os.str();
}

HarmonicTestFn HarmonicTestFn::polynomial(int n, std::vector<Monomial> terms) {
  HarmonicTestFn h;
  h.kind = Kind::HarmonicPolynomial;
  h.dim = n;
  h.terms = std::move(terms);
  for (const auto& t : h.terms)
    NQD_REQUIRE(t.powers.dim == n, ErrorCode::DimensionMismatch, "test function: monomial dimension mismatch");
  return h;
}

HarmonicTestFn HarmonicTestFn::kernel(const kernels::MultiIndex& alpha, const Vec& pole) {
  NQD_REQUIRE(alpha.dim == pole.size(), ErrorCode::DimensionMismatch, "test function: alpha and pole disagree");
  NQD_REQUIRE(alpha.order() <= 3, ErrorCode::InvalidArgument, "test function: order above 3 is not supported");
  HarmonicTestFn h;
  h.kind = Kind::KernelDerivative;
  h.dim = alpha.dim;
  h.alpha = alpha;
  h.pole = pole;
  return h;
}

std::vector<HarmonicTestFn> harmonic_polynomial_basis(int n, int max_degree) {
  NQD_REQUIRE(n >= 2 && n <= kMaxDim, ErrorCode::InvalidArgument, "harmonic basis: unsupported dimension");
  NQD_REQUIRE(max_degree >= 0 && max_degree <= 4, ErrorCode::InvalidArgument, "harmonic basis: degree must be 0..4");
  std::vector<HarmonicTestFn> out;
  kernels::MultiIndex zero;
  zero.dim = n;
  out.push_back(HarmonicTestFn::polynomial(n, {{1.0, zero}}));
  auto binom = [](int k, int m) {
    double r = 1.0;
    for (int j = 1; j <= m; ++j) r = r * (k - m + j) / j;
    return r;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 1; k <= max_degree; ++k) {
        // (x_i + i x_j)^k = Σ_m C(k,m) x_i^{k-m} i^m x_j^m
        std::vector<Monomial> re, im;
        for (int m = 0; m <= k; ++m) {
          kernels::MultiIndex p;
          p.dim = n;
          p.entries[i] = k - m;
          p.entries[j] = m;
          const double sign = (m / 2) % 2 == 0 ? 1.0 : -1.0;
          (m % 2 == 0 ? re : im).push_back({sign * binom(k, m), p});
        }
        out.push_back(HarmonicTestFn::polynomial(n, re));
        out.push_back(HarmonicTestFn::polynomial(n, im));
      }
  return out;
}

std::vector<HarmonicTestFn> harmonic_test_family(int n, const DomainSpec& d, int count, std::uint64_t seed,
                                                 bool with_polynomials) {
  NQD_REQUIRE(d.dim() == n, ErrorCode::DimensionMismatch, "harmonic_test_family: dimension mismatch");
  NQD_REQUIRE(count >= 0, ErrorCode::InvalidArgument, "harmonic_test_family: count must be nonnegative");
  std::vector<HarmonicTestFn> out;
  if (with_polynomials) out = harmonic_polynomial_basis(n, 4);
  if (count == 0) return out;
  const auto poles = geometry::interior_samples(d, count, seed, 4.0, 0.05);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> axis(0, n - 1);
  for (int k = 0; k < count; ++k) {
    kernels::MultiIndex a;
    a.dim = n;
    for (int c = 0; c < 3; ++c) ++a.entries[axis(rng)];
    out.push_back(HarmonicTestFn::kernel(a, poles[k]));
  }
  return out;
}

double quadrature_identity_residual(const DomainSpec& ball, const Measure& mu, const HarmonicTestFn& h, double tol) {
  const auto* b = std::get_if<geometry::Ball>(&ball.shape());
  NQD_REQUIRE(b != nullptr, ErrorCode::InvalidArgument, "quadrature identity: domain must be a ball");
  const int n = ball.dim();
  NQD_REQUIRE(h.dim == n && mu.dim == n, ErrorCode::DimensionMismatch, "quadrature identity: dimension mismatch");
  const double vol = cubature::sphere_area(n) / n * std::pow(b->radius, n);
  NQD_REQUIRE(mu.atoms.size() == 1 && mu.density == 0.0, ErrorCode::InvalidArgument,
              "quadrature identity: measure must be a single atom");
  NQD_REQUIRE((mu.atoms[0].first - b->center).norm() <= 1e-12 * std::max(1.0, b->radius) &&
                  std::abs(mu.atoms[0].second - vol) <= 1e-9 * vol,
              ErrorCode::InvalidArgument, "quadrature identity: atom must be |B| at the center");
  if (h.kind == HarmonicTestFn::Kind::KernelDerivative)
    NQD_REQUIRE((h.pole - b->center).norm() > b->radius, ErrorCode::Singular,
                "quadrature identity: test function is singular in the closed ball");
  const double h0 = h(b->center);
  // ∫_B (h - h(c)) dx; identically zero for constants.
  auto f = [&](const Vec& th) {
    auto radial = [&](double s) { return (h(Vec(b->center + s * th)) - h0) * std::pow(s, n - 1); };
    return cubature::integrate(radial, 0.0, b->radius, 0.1 * tol / cubature::sphere_area(n)).value;
  };
  auto r = cubature::integrate_sphere(n, f, tol);
  if (!r.converged) throw ConvergenceError("quadrature identity: cubature budget exhausted", r.error);
  return std::abs(r.value);
}

double null_identity_residual(const DomainSpec& omega, const HarmonicTestFn& h, double tol) {
  NQD_REQUIRE(h.kind == HarmonicTestFn::Kind::KernelDerivative && h.alpha.order() == 3, ErrorCode::InvalidArgument,
              "null identity: only third-order kernel derivatives are integrable at infinity");
  const int n = omega.dim();
  NQD_REQUIRE(h.dim == n, ErrorCode::DimensionMismatch, "null identity: dimension mismatch");
  const auto comp = geometry::complement_of(std::make_shared<DomainSpec>(omega));
  NQD_REQUIRE(comp->bounded(), ErrorCode::InvalidArgument, "null identity: complement must be bounded");
  NQD_REQUIRE(geometry::depth(*comp, h.pole) > 0.0, ErrorCode::InvalidArgument,
              "null identity: pole must lie inside the complement");
  // With y = pole + sθ, ∂^αJ(sθ) s^{n-1} = s^{-2} ∂^αJ(θ): the radial part is Σ (1/a - 1/b).
  auto f = [&](const Vec& th) {
    double w = 0.0;
    const auto segs = omega.ray(h.pole, th);
    for (const auto& p : segs.pieces()) {
      NQD_REQUIRE(p.lo > 0.0, ErrorCode::Singular, "null identity: pole on the domain");
      w += 1.0 / p.lo - (std::isinf(p.hi) ? 0.0 : 1.0 / p.hi);
    }
    return w == 0.0 ? 0.0 : w * kernels::kernel_derivative(n, h.alpha, th);
  };
  auto r = cubature::integrate_sphere(n, f, tol);
  if (!r.converged) throw ConvergenceError("null identity: cubature budget exhausted", r.error);
  return std::abs(r.value);
}

BalayageReport quasi_balayage_bound(const DomainSpec& omega, const schwarz::SchwarzPotential& u,
                                    const std::vector<double>& radii, std::uint64_t seed, int samples) {
  NQD_REQUIRE(!radii.empty(), ErrorCode::InvalidArgument, "quasi_balayage_bound: radii missing");
  const int n = omega.dim();
  const auto comp = geometry::complement_of(std::make_shared<DomainSpec>(omega));
  BalayageReport rep;
  rep.c0_est = 1.0;
  auto absu = [&](const Vec& x) { return std::abs(u.field(x)); };
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double rho = radii[k];
    NQD_REQUIRE(rho > 0.0, ErrorCode::InvalidArgument, "quasi_balayage_bound: radii must be positive");
    BalayageRow row;
    row.rho = rho;
    row.density = geometry::density_ratio_raycast(*comp, rho, 1e-9);
    row.applicable = row.density >= kBalayageThreshold;
    row.constant = search::sphere_max(absu, n, rho, samples, seed + k).value / (rho * rho);
    rep.c0_est = std::min(rep.c0_est, row.density);
    rep.max_constant = std::max(rep.max_constant, row.constant);
    if (!rep.rows.empty() && row.constant > rep.rows.back().constant * (1.0 + 1e-9)) rep.non_increasing = false;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace nqd::quadrature
