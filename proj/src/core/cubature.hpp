#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration on intervals, and nested
// hyperspherical integration over S^{n-1}, optionally restricted to a cap.

#include "core/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

namespace nqd::cubature {

struct GK15 {
  static const std::array<double, 8> xgk;
  static const std::array<double, 8> wgk;
  static const std::array<double, 4> wg;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

struct Options {
  int initial_panels = 8;
  long max_evaluations = 200000;
  /// Panels narrower than this fraction of the range are never split.
  double min_width_fraction = 1e-13;
  /// Extra panel edges inside (a, b); integrands with kinks there converge far faster.
  std::vector<double> breaks;
  /// For integrate_sphere with n = 2: directions where the integrand has a kink.
  std::vector<Vec> break_directions;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double magnitude(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

namespace detail {

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk15_panel(F& f, double a, double b, const T& zero) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T kron = fc * GK15::wgk[7];
  T gauss = fc * GK15::wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * GK15::xgk[j];
    T s = f(c - dx) + f(c + dx);
    kron += s * GK15::wgk[j];
    if (j % 2 == 1) gauss += s * GK15::wg[j / 2];
  }
  (void)zero;
  Panel<T> p{a, b, kron * h, 0.0};
  p.error = magnitude(T((kron - gauss) * h));
  return p;
}

}  // namespace detail

/// Integrates f over [a, b] to absolute tolerance tol. `zero` fixes the shape of T.
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, double tol, const T& zero, const Options& opt = {}) {
  NQD_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "integrate: tol must be positive");
  Result<T> res;
  res.value = zero;
  if (!(b > a)) {
    res.converged = true;
    return res;
  }
  std::priority_queue<detail::Panel<T>> heap;
  const int m = std::max(1, opt.initial_panels);
  const double w = (b - a) / m;
  std::vector<double> edges;
  edges.reserve(m + 1 + opt.breaks.size());
  for (int i = 0; i < m; ++i) edges.push_back(a + i * w);
  edges.push_back(b);
  for (double t : opt.breaks)
    if (t > a && t < b) edges.push_back(t);
  std::sort(edges.begin(), edges.end());
  const double min_width = opt.min_width_fraction * (b - a);
  edges.erase(std::unique(edges.begin(), edges.end(), [&](double u, double v) { return v - u <= min_width; }),
              edges.end());
  edges.back() = b;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i], hi = edges[i + 1];
    auto p = detail::gk15_panel<T>(f, lo, hi, zero);
    res.evaluations += 15;
    total_err += p.error;
    heap.push(std::move(p));
  }
  std::vector<detail::Panel<T>> frozen;
  while (total_err > tol && !heap.empty() && res.evaluations < opt.max_evaluations) {
    auto p = heap.top();
    heap.pop();
    if (p.b - p.a < min_width) {
      frozen.push_back(std::move(p));
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    auto l = detail::gk15_panel<T>(f, p.a, mid, zero);
    auto r = detail::gk15_panel<T>(f, mid, p.b, zero);
    res.evaluations += 30;
    total_err += l.error + r.error - p.error;
    heap.push(std::move(l));
    heap.push(std::move(r));
  }
  // Sum in a fixed order (by left endpoint) so the result does not depend on heap layout.
  std::vector<detail::Panel<T>> all(std::move(frozen));
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  T sum = zero;
  double err = 0.0;
  for (const auto& p : all) {
    sum += p.value;
    err += p.error;
  }
  res.value = sum;
  res.error = err;
  res.converged = err <= tol;
  return res;
}

template <class F>
Result<double> integrate(F&& f, double a, double b, double tol, const Options& opt = {}) {
  return integrate<double>(std::forward<F>(f), a, b, tol, 0.0, opt);
}

/// Spherical cap {θ : angle(θ, axis) <= half_angle}.
struct Cap {
  Vec axis;
  double half_angle;
};

/// Orthonormal frame whose first column is `axis` (normalized).
Mat frame_with_first_axis(const Vec& axis);

/// Surface area of S^{n-1}: 2π^{n/2}/Γ(n/2).
double sphere_area(int n);

/// ∫_{S^{n-1} ∩ cap} f(θ) dθ with f taking a unit vector of R^n.
template <class T, class F>
Result<T> integrate_sphere(int n, F&& f, double tol, const T& zero,
                           const std::optional<Cap>& cap = std::nullopt, const Options& opt = {}) {
  NQD_REQUIRE(n >= 2 && n <= kMaxDim, ErrorCode::InvalidArgument, "integrate_sphere: unsupported dimension");
  Vec axis = cap ? Vec(cap->axis.normalized()) : unit_vec(n, 0);
  const Mat frame = frame_with_first_axis(axis);
  const double beta = cap ? std::min(cap->half_angle, std::numbers::pi) : std::numbers::pi;
  long evals = 0;
  bool ok = true;
  double err_sum = 0.0;

  // Level k handles angle k; `lead` holds the direction built so far and `scale` the
  // product of sines that multiplies the remaining frame components.
  std::function<T(int, const Vec&, double, double)> level = [&](int k, const Vec& lead, double scale,
                                                                 double level_tol) -> T {
    const int remaining = n - k;  // number of frame axes still free
    if (remaining == 2) {
      const Vec e_a = frame.col(k);
      const Vec e_b = frame.col(k + 1);
      double lo = 0.0, hi = 2.0 * std::numbers::pi;
      if (n == 2 && cap) {
        lo = -beta;
        hi = beta;
      }
      auto g = [&](double phi) -> T {
        Vec d = lead + scale * (std::cos(phi) * e_a + std::sin(phi) * e_b);
        return f(d);
      };
      Options o = opt;
      for (const Vec& d : opt.break_directions) {
        double phi = std::atan2(d.dot(e_b), d.dot(e_a));
        if (phi < lo) phi += 2.0 * std::numbers::pi;
        o.breaks.push_back(phi);
      }
      auto r = integrate<T>(g, lo, hi, level_tol, zero, o);
      evals += r.evaluations;
      if (!r.converged) ok = false;
      if (k == 0) err_sum += r.error;
      return r.value;
    }
    const double hi = (k == 0) ? beta : std::numbers::pi;
    const int power = remaining - 2;
    const double inner_tol = level_tol / (4.0 * std::numbers::pi);
    auto g = [&](double theta) -> T {
      const double s = std::sin(theta);
      Vec next = lead + scale * std::cos(theta) * Vec(frame.col(k));
      T inner = level(k + 1, next, scale * s, inner_tol);
      return inner * std::pow(s, power);
    };
    auto r = integrate<T>(g, 0.0, hi, 0.5 * level_tol, zero, opt);
    evals += r.evaluations;
    if (!r.converged) ok = false;
    if (k == 0) err_sum += r.error;
    return r.value;
  };

  Result<T> res;
  res.value = level(0, Vec::Zero(n), 1.0, tol);
  res.evaluations = evals;
  res.error = err_sum;
  res.converged = ok;
  return res;
}

template <class F>
Result<double> integrate_sphere(int n, F&& f, double tol, const std::optional<Cap>& cap = std::nullopt,
                                const Options& opt = {}) {
  return integrate_sphere<double>(n, std::forward<F>(f), tol, 0.0, cap, opt);
}

}  // namespace nqd::cubature
