#include "core/kernels.hpp"

#include "core/cubature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nqd::kernels {

double omega_n(int n) { return cubature::sphere_area(n); }

MultiIndex::MultiIndex(int n, std::initializer_list<int> e) : dim(n) {
  NQD_REQUIRE(n >= 1 && n <= kMaxDim && static_cast<int>(e.size()) == n, ErrorCode::DimensionMismatch,
              "multi-index has the wrong length");
  int i = 0;
  for (int v : e) {
    NQD_REQUIRE(v >= 0, ErrorCode::InvalidArgument, "multi-index entries must be nonnegative");
    entries[i++] = v;
  }
}

MultiIndex MultiIndex::from_axes(int n, std::initializer_list<int> axes) {
  MultiIndex m;
  m.dim = n;
  for (int a : axes) {
    NQD_REQUIRE(a >= 0 && a < n, ErrorCode::InvalidArgument, "multi-index axis out of range");
    ++m.entries[a];
  }
  return m;
}

int MultiIndex::order() const {
  int s = 0;
  for (int i = 0; i < dim; ++i) s += entries[i];
  return s;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  for (int i = 0; i < dim; ++i) os << (i ? " " : "") << entries[i];
  return os.str();
}

namespace {

void require_nonzero(const Vec& x) {
  NQD_REQUIRE(x.squaredNorm() > 0.0, ErrorCode::Singular, "kernel evaluated at its pole");
}

}  // namespace

double newton_kernel(int n, const Vec& x) {
  NQD_REQUIRE(n >= 2 && x.size() == n, ErrorCode::DimensionMismatch, "newton_kernel: dimension mismatch");
  require_nonzero(x);
  const double r = x.norm();
  if (n == 2) return -std::log(r) / (2.0 * std::numbers::pi);
  return 1.0 / ((n - 2) * omega_n(n) * std::pow(r, n - 2));
}

double kernel_derivative(int n, const MultiIndex& alpha, const Vec& x) {
  NQD_REQUIRE(alpha.dim == n && x.size() == n, ErrorCode::DimensionMismatch, "kernel_derivative: dimension mismatch");
  const int m = alpha.order();
  NQD_REQUIRE(m <= 3, ErrorCode::InvalidArgument, "kernel_derivative: order above 3 is not supported");
  if (m == 0) return newton_kernel(n, x);
  require_nonzero(x);
  std::array<int, 3> ax{};
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < alpha.entries[i]; ++c) ax[k++] = i;
  const double g = -1.0 / omega_n(n);
  const double r2 = x.squaredNorm();
  const double rn = std::pow(r2, -0.5 * n);
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  if (m == 1) return g * x[ax[0]] * rn;
  if (m == 2) return g * (d(ax[0], ax[1]) - n * x[ax[0]] * x[ax[1]] / r2) * rn;
  const int i = ax[0], j = ax[1], l = ax[2];
  const double lin = d(i, j) * x[l] + d(i, l) * x[j] + d(j, l) * x[i];
  return g * rn / r2 * (-n * lin + n * (n + 2.0) * x[i] * x[j] * x[l] / r2);
}

Vec kernel_gradient(int n, const Vec& x) {
  require_nonzero(x);
  return (-1.0 / omega_n(n)) * std::pow(x.squaredNorm(), -0.5 * n) * x;
}

Mat kernel_hessian(int n, const Vec& x) {
  require_nonzero(x);
  const double r2 = x.squaredNorm();
  const double g = -std::pow(r2, -0.5 * n) / omega_n(n);
  Mat h = Mat::Identity(n, n) - (n / r2) * (x * x.transpose());
  return g * h;
}

double j2_kernel(int n, const Vec& x, const Vec& y) {
  NQD_REQUIRE(x.size() == n && y.size() == n, ErrorCode::DimensionMismatch, "j2_kernel: dimension mismatch");
  require_nonzero(y);
  NQD_REQUIRE((x - y).squaredNorm() > 0.0, ErrorCode::Singular, "j2_kernel: x coincides with y");
  const double direct = newton_kernel(n, x - y);
  if (y.squaredNorm() <= 1.0) return direct;
  const double taylor = newton_kernel(n, y) - x.dot(kernel_gradient(n, y)) +
                        0.5 * x.dot(kernel_hessian(n, y) * x);
  return direct - taylor;
}

namespace {

// ∫ over the ray pieces of r^{n-1}/(1+r^{n+1}) dr; the part beyond r = 1 is mapped by r = 1/s,
// which turns it into ∫ ds/(1+s^{n+1}) on a finite interval.
double radial_weight(int n, const geometry::IntervalSet& pieces, double tol) {
  double total = 0.0;
  auto near = [n](double r) { return std::pow(r, n - 1) / (1.0 + std::pow(r, n + 1)); };
  auto far = [n](double s) { return 1.0 / (1.0 + std::pow(s, n + 1)); };
  for (const auto& p : pieces.pieces()) {
    if (p.lo < 1.0) total += cubature::integrate(near, p.lo, std::min(p.hi, 1.0), tol).value;
    if (p.hi > 1.0) {
      const double s_lo = std::isinf(p.hi) ? 0.0 : 1.0 / p.hi;
      const double s_hi = 1.0 / std::max(p.lo, 1.0);
      total += cubature::integrate(far, s_lo, s_hi, tol).value;
    }
  }
  return total;
}

}  // namespace

double l_norm(const Measure& mu, double tol) {
  mu.validate();
  NQD_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "l_norm: tol must be positive");
  const int n = mu.dim;
  double atoms = 0.0;
  for (const auto& [p, m] : mu.atoms) atoms += std::abs(m) / (1.0 + std::pow(p.norm(), n + 1));
  double cont = 0.0;
  if (mu.density != 0.0 && !mu.support->is_empty()) {
    const Vec origin = Vec::Zero(n);
    const double whole = omega_n(n);  // crude upper bound on the radial weight integral per unit density
    auto pass = [&](double abs_tol) {
      auto f = [&](const Vec& th) {
        return radial_weight(n, mu.support->ray(origin, th), 0.05 * abs_tol / whole);
      };
      auto r = cubature::integrate_sphere(n, f, abs_tol);
      return r;
    };
    auto coarse = pass(1e-4 * whole);
    const double scale = std::max(std::abs(coarse.value), 1e-12 * whole);
    auto fine = pass(tol * scale);
    if (!fine.converged) throw ConvergenceError("l_norm: cubature budget exhausted", fine.error / scale);
    cont = std::abs(mu.density) * fine.value;
  }
  return cont + atoms;
}

}  // namespace nqd::kernels
