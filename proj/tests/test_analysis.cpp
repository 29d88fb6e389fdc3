#include "core/analysis.hpp"
#include "core/cubature.hpp"
#include "core/schwarz.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nqd;
using namespace nqd::analysis;
using geometry::DomainSpec;
using nqd::testing::load_domain;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField field_of(int n, std::function<double(const Vec&)> f) {
  ScalarField s;
  s.dim = n;
  s.value = std::move(f);
  return s;
}

}  // namespace

TEST(Acf, HalfPlanePair) {
  const double h = 1.0 / 64;
  const auto plus = GridField::sample(field_of(2, [](const Vec& x) { return std::max(x[0], 0.0); }), 1.25, h);
  const auto minus = GridField::sample(field_of(2, [](const Vec& x) { return std::max(-x[0], 0.0); }), 1.25, h);
  const double phi = acf_phi(plus, minus, 1.0);
  EXPECT_NEAR(phi, kPi * kPi / 4, 0.01 * kPi * kPi / 4);
  EXPECT_EQ(acf_phi(minus, plus, 1.0), phi);
  // Homogeneous of degree one on both sides: Φ is constant in r.
  EXPECT_NEAR(acf_phi(plus, minus, 0.5), phi, 0.01 * phi);
  EXPECT_THROW(acf_phi(plus, minus, 2.0), Error);
}

TEST(Acf, EllipseMonotone) {
  const auto s = schwarz::schwarz_from_complement(load_domain("ellipse_exterior.json"), 1e-6);
  const auto grid = GridField::sample(s.field, 5.0, 1.0 / 16);
  for (int axis : {0, 1}) {
    const auto rep = acf_monotone_report(grid, axis, {1, 2, 3, 4});
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_EQ(rep.violations, 0) << axis;
    EXPECT_NEAR(rep.tol_mono, 1e-3 * rep.rows.back().second, 1e-15);
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      EXPECT_GE(rep.rows[i].second, rep.rows[i - 1].second - rep.tol_mono) << axis;
  }
}

TEST(Acf, HomogeneityUnderBlowup) {
  const auto hs = schwarz::halfspace_schwarz(make_vec({0, 1}), 0.0);
  EXPECT_LT(acf_homogeneity_check(hs.field, 2.0, 1.0, 1, 1.0 / 32), 1e-2);
  const auto s = schwarz::schwarz_from_complement(load_domain("ellipse_exterior.json"), 1e-6);
  // The free boundary crosses cells, so the gap is first order in h.
  const double coarse = acf_homogeneity_check(s.field, 2.0, 1.0, 0, 1.0 / 32);
  const double fine = acf_homogeneity_check(s.field, 2.0, 1.0, 0, 1.0 / 64);
  EXPECT_LT(fine, 0.04);
  EXPECT_GT(coarse / fine, 1.5);
}

TEST(Dyadic, HalfSpaceIsHalf) {
  const auto hs = schwarz::halfspace_schwarz(make_vec({0, 1}), 0.0);
  const auto seq = dyadic_sup(hs.field, 6);
  ASSERT_EQ(seq.entries.size(), 7u);
  for (const auto& e : seq.entries) EXPECT_NEAR(e.normalized, 0.5, 1e-6) << e.j;
  const auto grid = dyadic_sup(GridField::sample(hs.field, 4.0, 1.0 / 8), 2);
  for (const auto& e : grid.entries) EXPECT_NEAR(e.normalized, 0.5, 1e-12) << e.j;
  EXPECT_THROW(dyadic_sup(GridField::sample(hs.field, 4.0, 1.0 / 8), 3), Error);
}

TEST(Dyadic, EllipseQuadraticGrowth) {
  const auto s = schwarz::schwarz_from_complement(load_domain("ellipse_exterior.json"), 1e-6);
  const auto seq = dyadic_sup(s.field, 6);
  EXPECT_LT(seq.entries[0].sup, 1e-9);  // B₁ sits inside the ellipse
  const double anchor = seq.entries[2].normalized;
  for (std::size_t j = 1; j < seq.entries.size(); ++j) {
    EXPECT_GE(seq.entries[j].sup, seq.entries[j - 1].sup);
    EXPECT_LE(seq.entries[j].normalized, 2.0 * anchor) << j;
  }
}

TEST(Blowup, RescaleComposes) {
  const auto s = schwarz::schwarz_from_complement(load_domain("ellipse_exterior.json"), 1e-8);
  const auto a = blowup_rescale(blowup_rescale(s.field, 2.0), 3.0);
  const auto b = blowup_rescale(s.field, 6.0);
  for (const Vec& x : {make_vec({1.0, 0.2}), make_vec({-0.3, 0.9}), make_vec({0.5, -0.5})}) {
    EXPECT_NEAR(a(x), b(x), 1e-12 * (1.0 + std::abs(b(x))));
    EXPECT_NEAR(b(x), s.field(Vec(6.0 * x)) / 36.0, 1e-15);
  }
  EXPECT_THROW(blowup_rescale(s.field, 0.0), Error);
}

TEST(Blowup, FarFormIsTheLimit) {
  const auto s = schwarz::schwarz_from_complement(load_domain("ellipse_exterior.json"), 1e-8);
  const auto u = blowup_rescale(s.field, 1e3);
  const Vec x = make_vec({0.6, 0.8});
  EXPECT_NEAR(u(x), x.dot(s.far_form.A * x), 1e-3);
}

TEST(ThinDecay, BallInThreeDimensions) {
  // V₂(χ_{B₁})(ρx) = 1/(3ρ) for |x| = 1, so the normalized sup is 1/(3ρ³).
  const auto rows = thin_blowup_decay(*DomainSpec::ball(Vec::Zero(3), 1.0), {10, 100});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].value, 1.0 / 3000, 1e-9);
  EXPECT_LE(rows[1].value, 1.1e-3 * rows[0].value);
  EXPECT_NEAR(rows[1].density, 1e-6, 1e-12);
}

TEST(ThinDecay, ParaboloidTendsToTraceFreeQuadratic) {
  // The limit is -½xᵀMx with M = ∫_{D∖B₁} ∇²J, trace-free; in polar form
  // M₁₁ = (1/2π)∫_0^π cos 2θ log⁺(sin θ / cos² θ) dθ.
  const double knee = std::asin((std::sqrt(5.0) - 1.0) / 2.0);
  auto g = [](double t) {
    const double c = std::cos(t);
    const double q = std::sin(t) / (c * c);
    return q > 1.0 ? std::cos(2 * t) * std::log(q) : 0.0;
  };
  cubature::Options o;
  o.breaks = {knee, kPi / 2, kPi - knee};
  const double m11 = cubature::integrate(g, 0.0, kPi, 1e-12, o).value / (2 * kPi);
  const double limit = 0.5 * std::abs(m11);
  EXPECT_NEAR(limit, 0.25461, 1e-4);

  const auto rows = thin_blowup_decay(*load_domain("paraboloid.json"), {4, 16, 64});
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].density, rows[i - 1].density);
    const double e0 = std::abs(rows[i - 1].value - limit), e1 = std::abs(rows[i].value - limit);
    EXPECT_GT(e0 / e1, 3.0) << rows[i].rho;  // O(1/ρ) with ρ growing by 4
  }
}

TEST(ConeFit, SectorHasLogTerm) {
  const auto k = load_domain("sector30.json");
  const auto fit = fit_cone_expansion(*k, make_vec({0, 1}), log_grid(0, 2, 9), 1e-10);
  EXPECT_GT(std::abs(fit.log_coeff), 5 * fit.log_stderr);
  ASSERT_EQ(fit.samples.size(), 9u);
  ASSERT_EQ(fit.coeffs.size(), 4u);
  EXPECT_EQ(fit.coeffs[0], fit.log_coeff);
}

TEST(ConeFit, HalfSpaceHasNone) {
  const auto hs = load_domain("halfspace.json");
  const auto fit = fit_cone_expansion(*hs, make_vec({0, 1}), log_grid(0, 2, 9), 1e-10);
  EXPECT_LE(std::abs(fit.log_coeff), 3 * fit.log_stderr + 1e-12);
  // Same cone written as a 90° half-angle cone.
  const auto cone = DomainSpec::cone(Vec::Zero(2), make_vec({0, 1}), kPi / 2);
  const auto fc = fit_cone_expansion(*cone, make_vec({0, 1}), log_grid(0, 2, 9), 1e-10);
  EXPECT_LE(std::abs(fc.log_coeff), 3 * fc.log_stderr + 1e-12);
}

TEST(ConeFit, LogGrid) {
  const auto g = log_grid(0, 2, 3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_NEAR(g[1], 10.0, 1e-12);
  EXPECT_NEAR(g[2], 100.0, 1e-12);
}
