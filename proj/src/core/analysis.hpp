#pragma once

#include "core/geometry.hpp"
#include "core/grid.hpp"
#include "core/potential.hpp"

#include <cstdint>
#include <vector>

namespace nqd::analysis {

/// r^{-4} (∫_{B_r} |∇v1|² |x|^{2-n}) (∫_{B_r} |∇v2|² |x|^{2-n}).
/// Gradients are constant per grid cell (central differences at the cell center); cells
/// with a corner at the origin get the exact weight, cut cells are subsampled.
double acf_phi(const GridField& v1, const GridField& v2, double r);

struct AcfReport {
  std::vector<std::pair<double, double>> rows;  // (r, Φ)
  double tol_mono = 0.0;
  int violations = 0;
};

/// Φ(r, ∂_i u⁺, ∂_i u⁻) over ascending radii. tol_mono < 0 selects 1e-3·Φ(r_max).
AcfReport acf_monotone_report(const GridField& u, int axis, const std::vector<double>& radii, double tol_mono = -1.0);

/// |Φ(rρ, ∂_i u^±) - Φ(r, ∂_i u_ρ^±)| / max(|lhs|, eps), each side sampled on its own grid of spacing h.
double acf_homogeneity_check(const ScalarField& u, double rho, double r, int axis, double h);

struct DyadicSupSeq {
  struct Entry {
    int j;
    double sup;
    double normalized;  // sup / 4^j
  };
  std::vector<Entry> entries;
};

DyadicSupSeq dyadic_sup(const ScalarField& u, int jmax, std::uint64_t seed = 5, int samples = 256);
DyadicSupSeq dyadic_sup(const GridField& u, int jmax);

/// u_ρ(x) = u(ρx)/ρ².
ScalarField blowup_rescale(const ScalarField& u, double rho);

struct DecayRow {
  double rho;
  double value;    // sup_{|x|=1} |V₂(χ_D)(ρx)| / ρ²
  double density;  // |D ∩ B_ρ| / |B_ρ|
  /// Max residual on the unit sphere after removing the best harmonic quadratic.
  double modulo_h2;
};
std::vector<DecayRow> thin_blowup_decay(const geometry::DomainSpec& d, const std::vector<double>& rhos,
                                        std::uint64_t seed = 9, int samples = 24, double tol = 1e-9);

struct ConeFit {
  double log_coeff = 0.0;
  double log_stderr = 0.0;
  double quad_coeff = 0.0;
  double quad_stderr = 0.0;
  std::vector<double> coeffs;   // log ρ, 1, 1/ρ, 1/ρ²
  std::vector<double> stderrs;
  double fit_residual = 0.0;
  std::vector<std::pair<double, double>> samples;  // (ρ, V₂(ρx₀)/ρ²)
};

/// Least squares of V₂(χ_K)(ρx₀)/ρ² on {log ρ, 1, 1/ρ, 1/ρ²}. K is a cone or a half-space.
ConeFit fit_cone_expansion(const geometry::DomainSpec& k, const Vec& x0, const std::vector<double>& rhos,
                           double tol = 1e-10);

/// Default log-spaced ρ grid for fit_cone_expansion: 10^{lo} .. 10^{hi}.
std::vector<double> log_grid(double lo_exp, double hi_exp, int count);

}  // namespace nqd::analysis
