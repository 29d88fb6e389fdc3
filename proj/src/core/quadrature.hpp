#pragma once

#include "core/geometry.hpp"
#include "core/kernels.hpp"
#include "core/measure.hpp"
#include "core/schwarz.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nqd::quadrature {

struct Monomial {
  double coeff;
  kernels::MultiIndex powers;
};

struct HarmonicTestFn {
  enum class Kind { HarmonicPolynomial, KernelDerivative } kind = Kind::HarmonicPolynomial;
  int dim = 2;
  std::vector<Monomial> terms;  // HarmonicPolynomial
  kernels::MultiIndex alpha;    // KernelDerivative: x ↦ ∂^α J(x - pole)
  Vec pole;

  double operator()(const Vec& x) const;
  [[nodiscard]] int degree() const;
  [[nodiscard]] std::string kind_name() const;
  [[nodiscard]] std::string alpha_string() const;
  [[nodiscard]] std::string pole_string() const;

  static HarmonicTestFn polynomial(int n, std::vector<Monomial> terms);
  static HarmonicTestFn kernel(const kernels::MultiIndex& alpha, const Vec& pole);
};

/// 1 and Re/Im (x_i + i x_j)^k, i < j, 1 <= k <= max_degree (<= 4).
std::vector<HarmonicTestFn> harmonic_polynomial_basis(int n, int max_degree = 4);

/// `count` third-order kernel derivatives with poles inside D (5% inradius margin), seeded;
/// optionally preceded by the harmonic polynomial basis.
std::vector<HarmonicTestFn> harmonic_test_family(int n, const geometry::DomainSpec& d, int count, std::uint64_t seed,
                                                 bool with_polynomials = false);

/// |∫_B h dx - |B| h(center)| for μ = |B| δ_center.
double quadrature_identity_residual(const geometry::DomainSpec& ball, const Measure& mu, const HarmonicTestFn& h,
                                    double tol = 1e-10);

/// |∫_Ω h dx| for a third-order kernel derivative with its pole in the interior of Ωᶜ.
double null_identity_residual(const geometry::DomainSpec& omega, const HarmonicTestFn& h, double tol = 1e-10);

struct BalayageRow {
  double rho;
  double density;     // |Ωᶜ ∩ B_ρ| / |B_ρ|
  double constant;    // max_{|x|=ρ} |u(x)| / ρ²
  bool applicable;    // density >= threshold
};

struct BalayageReport {
  double c0_est = 0.0;       // min density over the radii
  double max_constant = 0.0;
  bool non_increasing = true;
  std::vector<BalayageRow> rows;
};

inline constexpr double kBalayageThreshold = 1e-2;

BalayageReport quasi_balayage_bound(const geometry::DomainSpec& omega, const schwarz::SchwarzPotential& u,
                                    const std::vector<double>& radii, std::uint64_t seed = 11, int samples = 64);

}  // namespace nqd::quadrature
