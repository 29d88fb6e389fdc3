#pragma once

#include "core/common.hpp"
#include "core/geometry.hpp"
#include "core/measure.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nqd {

/// P(x) = xᵀ A x + b·x + c with A symmetric.
struct QuadraticPolynomial {
  Mat A;
  Vec b;
  double c = 0.0;

  QuadraticPolynomial() = default;
  QuadraticPolynomial(Mat a, Vec b_, double c_);
  static QuadraticPolynomial zero(int n);

  [[nodiscard]] int dim() const { return static_cast<int>(b.size()); }
  double operator()(const Vec& x) const;
  [[nodiscard]] Vec gradient(const Vec& x) const;
  [[nodiscard]] double laplacian() const { return 2.0 * A.trace(); }
  /// Only the quadratic part xᵀ A x.
  [[nodiscard]] double quadratic_part(const Vec& x) const { return x.dot(A * x); }
};

struct ScalarField {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;  // may be empty
  std::string tag;

  double operator()(const Vec& x) const { return value(x); }
  [[nodiscard]] bool has_gradient() const { return static_cast<bool>(grad); }
  [[nodiscard]] Vec gradient(const Vec& x) const;
};

struct GrowthReport {
  std::vector<std::pair<double, double>> samples;  // (|x|, ratio)
  double max_ratio = 0.0;
};

namespace potential {

/// The constant of the unit ball's internal potential: 1/4 (n = 2), 1/(2(n-2)) otherwise.
double ball_constant(int n);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// V₂(μ)(x) by cubature: polar coordinates around x for the kernel, multipole series
/// around the origin for the Taylor correction and the far field. Throws ConvergenceError.
Estimate eval_v2_estimate(const Measure& mu, const Vec& x, double tol = 1e-6);
double eval_v2(const Measure& mu, const Vec& x, double tol = 1e-6);
Vec eval_v2_gradient(const Measure& mu, const Vec& x, double tol = 1e-6);

/// Plain Newtonian potential ∫ J(x-y) dμ(y); bounded supports only.
double eval_newton(const Measure& mu, const Vec& x, double tol = 1e-6);

/// Newtonian potential of χ_{B_r(c)}.
double ball_potential_closed(int n, const Vec& center, double radius, const Vec& x);
Vec ball_potential_gradient(int n, const Vec& center, double radius, const Vec& x);

/// Coefficients of the ellipsoid's Newtonian potential V = A0 - Σ A_i x_i² at confocal
/// parameter lambda (0 inside). Centered at the origin, axis aligned.
struct EllipsoidCoefficients {
  double lambda = 0.0;
  double a0 = 0.0;
  Vec a;
};
EllipsoidCoefficients ellipsoid_coefficients(const Vec& semi_axes, const Vec& x);

/// Internal Newtonian potential of the ellipsoid; x must lie strictly inside.
double ellipsoid_internal_closed(const Vec& semi_axes, const Vec& x);
/// Newtonian potential of χ_E(c), anywhere.
double ellipsoid_potential(const Vec& center, const Vec& semi_axes, const Vec& x);
Vec ellipsoid_potential_gradient(const Vec& center, const Vec& semi_axes, const Vec& x);

/// ∫_{D∖B_1} of the second-order Taylor polynomial of J(x-y) at x = 0, as a quadratic in x.
/// This is exactly the difference V(χ_D) - V₂(χ_D) for bounded D.
QuadraticPolynomial taylor_correction(const geometry::DomainSpec& d, double tol = 1e-10);

/// Reusable V₂ evaluator with closed forms for balls, ellipsoids, whole space and complements
/// of bounded sets, and the correction quadratic cached for bounded supports.
class Evaluator {
public:
  /// closed_forms = false forces cubature for balls and ellipsoids too.
  explicit Evaluator(Measure mu, double tol = 1e-6, bool closed_forms = true);
  [[nodiscard]] double value(const Vec& x) const;
  [[nodiscard]] Vec gradient(const Vec& x) const;
  [[nodiscard]] const Measure& measure() const { return mu_; }
  [[nodiscard]] ScalarField field() const;

private:
  double density_value(const Vec& x) const;
  Vec density_gradient(const Vec& x) const;

  Measure mu_;
  double tol_;
  enum class Route { Zero, Whole, Ball, Ellipsoid, BoundedCubature, ComplementOfBounded, Generic } route_;
  QuadraticPolynomial correction_;
  std::shared_ptr<Evaluator> inner_;  // ComplementOfBounded
};

/// Least-squares quadratic fits. `basis_harmonic` restricts to trace-free A.
QuadraticPolynomial fit_quadratic(const std::vector<Vec>& pts, const std::vector<double>& vals, bool harmonic,
                                  double* max_residual = nullptr);

/// Max residual of V₂(A) + V₂(Aᶜ) + |x|²/2n after removing the best harmonic quadratic.
double complementary_residual(const geometry::DomainPtr& a, const std::vector<Vec>& samples, double tol,
                              QuadraticPolynomial* fitted = nullptr);

GrowthReport growth_ratio(const Measure& mu, const std::vector<double>& radii, std::uint64_t seed,
                          int per_sphere = 16, double tol = 1e-6);

nlohmann::json measure_to_json(const Measure& mu);
Measure measure_from_json(const nlohmann::json& doc);

}  // namespace potential
}  // namespace nqd
