#pragma once

#include "core/common.hpp"
#include "core/measure.hpp"

#include <array>

namespace nqd::kernels {

/// Area of S^{n-1}.
double omega_n(int n);

struct MultiIndex {
  std::array<int, kMaxDim> entries{};
  int dim = 0;

  MultiIndex() = default;
  MultiIndex(int n, std::initializer_list<int> e);
  static MultiIndex from_axes(int n, std::initializer_list<int> axes);
  [[nodiscard]] int order() const;
  [[nodiscard]] std::string to_string() const;
};

/// J(x) = -log|x|/(2π) for n = 2, 1/((n-2) ω_n |x|^{n-2}) otherwise.
double newton_kernel(int n, const Vec& x);

/// Closed-form ∂^α J(x) for |α| <= 3.
double kernel_derivative(int n, const MultiIndex& alpha, const Vec& x);

Vec kernel_gradient(int n, const Vec& x);
Mat kernel_hessian(int n, const Vec& x);

/// J(x-y) minus, for |y| > 1, the second-order Taylor polynomial of x ↦ J(x-y) at x = 0.
double j2_kernel(int n, const Vec& x, const Vec& y);

/// ∫ d|μ| / (1 + |x|^{n+1}) to relative tolerance tol.
double l_norm(const Measure& mu, double tol = 1e-8);

}  // namespace nqd::kernels
