#pragma once

#include "core/geometry.hpp"
#include "core/potential.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace nqd::schwarz {

/// u = P - V₂(χ_D) with D = Ωᶜ and P the internal quadratic of V₂(χ_D).
struct SchwarzPotential {
  geometry::DomainPtr omega;
  QuadraticPolynomial P;
  /// Quadratic that u_ρ converges to under blow-up: P plus the J₂ correction of a bounded D.
  QuadraticPolynomial far_form;
  ScalarField field;
  double fit_residual = 0.0;
};

struct FitResult {
  QuadraticPolynomial P;
  double residual = 0.0;
};

struct FormAnalysis {
  std::vector<double> eigenvalues;  // ascending
  int rank = 0;
  bool negative_semidefinite = false;
};

struct NullQDReport {
  double residual = 0.0;
  bool is_null_qd = false;
  double growth_max_ratio = 0.0;
  Mat A;
  int rank = 0;
  std::vector<double> eigenvalues;
};

inline constexpr double kVerdictFactor = 10.0;

struct Options {
  std::uint64_t seed = 7;
  int samples = 100;
  /// false: evaluate V₂ by cubature even where a closed form exists.
  bool closed_forms = true;
};

/// Minimal sample count for a full quadratic fit in R^n.
int min_fit_samples(int n);

FitResult fit_internal_quadratic(const geometry::DomainSpec& d, const std::vector<Vec>& samples, double tol,
                                 bool closed_forms = true);

SchwarzPotential schwarz_from_complement(const geometry::DomainPtr& omega, double tol, const Options& opt = {});

/// Ω = {x·a > b}: u = -((x·a) - b)²/2 on Ω, 0 elsewhere.
SchwarzPotential halfspace_schwarz(const Vec& a, double b);

FormAnalysis quadratic_form_analysis(const QuadraticPolynomial& P, double tol);

NullQDReport verify_null_qd(const geometry::DomainPtr& omega, double tol,
                            const std::vector<double>& radii = {1.0, 4.0, 16.0, 64.0}, const Options& opt = {});

nlohmann::ordered_json report_to_json(const NullQDReport& r);

}  // namespace nqd::schwarz
