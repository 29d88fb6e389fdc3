#include "core/geometry.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nqd;
using namespace nqd::geometry;
using nqd::testing::load_domain;
using nqd::testing::load_json;
using nqd::testing::random_vec;

namespace {

ErrorCode parse_code(const nlohmann::json& doc, std::string* msg = nullptr) {
  try {
    domain_from_json(doc);
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.code();
  }
  return ErrorCode::Internal;
}

const char* kFixtures[] = {"ellipse_exterior.json", "ellipsoid3_exterior.json", "square_exterior.json",
                           "halfspace.json",        "ball2.json",               "ball3.json",
                           "strip_exterior.json",   "paraboloid.json",          "sector30.json"};

}  // namespace

TEST(DomainJson, FixturesRoundTrip) {
  for (const char* f : kFixtures) {
    SCOPED_TRACE(f);
    const auto d = load_domain(f);
    const auto j = domain_to_json(*d);
    EXPECT_EQ(domain_to_json(*domain_from_json(j)), j);
  }
}

TEST(DomainJson, RejectsZeroSemiAxisWithFieldPath) {
  std::string msg;
  EXPECT_EQ(parse_code(load_json("bad_semiaxis.json"), &msg), ErrorCode::Parse);
  EXPECT_NE(msg.find("semiAxes[1]"), std::string::npos) << msg;
}

TEST(DomainJson, RejectsDimensionOne) { EXPECT_NE(parse_code(load_json("dim1.json")), ErrorCode::Internal); }

TEST(DomainJson, UnitVectors) {
  std::string msg;
  EXPECT_EQ(parse_code(load_json("halfspace_not_unit.json"), &msg), ErrorCode::Parse);
  EXPECT_NE(msg.find("normal"), std::string::npos);
  const auto d = load_domain("halfspace_near_unit.json");
  const auto& hs = std::get<HalfSpace>(d->shape());
  EXPECT_NEAR(hs.normal.norm(), 1.0, 1e-15);
}

TEST(DomainJson, RejectsBadFields) {
  using nlohmann::json;
  EXPECT_EQ(parse_code(json::parse(R"({"dim":2,"shape":{"kind":"Torus"}})")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(json::parse(R"({"dim":2,"shape":{"kind":"Ball","center":[0,0]}})")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(json::parse(R"({"dim":2,"shape":{"kind":"Ball","center":[0],"radius":1}})")),
            ErrorCode::Parse);
  EXPECT_EQ(parse_code(json::parse(R"({"dim":2,"shape":{"kind":"Ball","center":[0,0],"radius":-1}})")),
            ErrorCode::Parse);
  EXPECT_EQ(parse_code(json::parse(
                R"({"dim":2,"shape":{"kind":"Cone","vertex":[0,0],"axis":[0,1],"halfAngle":2.0}})")),
            ErrorCode::Parse);
  EXPECT_EQ(parse_code(json::parse(R"({"dim":2,"shape":{"kind":"Strip","normal":[1,0],"lower":1,"upper":0}})")),
            ErrorCode::Parse);
}

TEST(Membership, OpenSetsAndClosedComplement) {
  const auto b = DomainSpec::ball(Vec::Zero(2), 1.0);
  const auto c = DomainSpec::complement(b);
  const Vec on = make_vec({1.0, 0.0});
  EXPECT_FALSE(b->contains(on));
  EXPECT_TRUE(c->contains(on));
  EXPECT_TRUE(b->contains(make_vec({0.5, 0.5})));
}

TEST(Membership, DoubleComplementIsIdempotent) {
  std::mt19937_64 g(3);
  for (const char* f : kFixtures) {
    const auto d = load_domain(f);
    const auto dd = DomainSpec::complement(DomainSpec::complement(d));
    for (int i = 0; i < 200; ++i) {
      const Vec x = random_vec(g, d->dim(), 3.0);
      EXPECT_EQ(dd->contains(x), d->contains(x)) << f;
    }
  }
}

TEST(Membership, RayAgreesWithContains) {
  std::mt19937_64 g(11);
  for (const char* f : kFixtures) {
    const auto d = load_domain(f);
    const int n = d->dim();
    for (int i = 0; i < 50; ++i) {
      const Vec p = random_vec(g, n, 2.0);
      const Vec dir = random_vec(g, n).normalized();
      const auto iv = d->ray(p, dir);
      for (int k = 0; k < 40; ++k) {
        const double t = 0.1 * k + 0.0123;
        bool inside = false;
        for (const auto& pc : iv.pieces()) inside = inside || (t > pc.lo && t < pc.hi);
        // Skip points within roundoff of the boundary.
        bool near = false;
        for (const auto& pc : iv.pieces()) near = near || std::abs(t - pc.lo) < 1e-9 || std::abs(t - pc.hi) < 1e-9;
        if (!near) EXPECT_EQ(inside, d->contains(p + t * dir)) << f << " t=" << t;
      }
    }
  }
}

TEST(Density, ComplementSumsToOne) {
  SamplerConfig cfg;
  cfg.samples = 20000;
  for (const char* f : {"paraboloid.json", "sector30.json", "ellipse_exterior.json"}) {
    const auto d = load_domain(f);
    for (double rho : {1.0, 3.0, 10.0}) {
      const auto a = density_ratio(*d, rho, cfg);
      const auto b = density_ratio(*DomainSpec::complement(d), rho, cfg);
      EXPECT_LE(std::abs(a.value + b.value - 1.0), 2.0 * std::max(a.stderr_, b.stderr_) + 1e-12) << f;
    }
  }
}

TEST(Density, HalfSpaceIsScaleFree) {
  SamplerConfig cfg;
  cfg.samples = 40000;
  const auto d = load_domain("halfspace.json");
  const auto a = density_ratio(*d, 1.0, cfg);
  const auto b = density_ratio(*d, 100.0, cfg);
  EXPECT_LE(std::abs(a.value - b.value), a.stderr_ + b.stderr_);
  EXPECT_NEAR(density_ratio_raycast(*d, 1.0), 0.5, 1e-9);
  EXPECT_NEAR(density_ratio_raycast(*d, 100.0), 0.5, 1e-9);
}

TEST(Density, RaycastMatchesClosedForms) {
  // B_r(0) ∩ B_ρ has ratio (r/ρ)^n; a cone of half-angle θ in the plane has ratio θ/π.
  EXPECT_NEAR(density_ratio_raycast(*DomainSpec::ball(Vec::Zero(3), 1.0), 2.0), 0.125, 1e-9);
  EXPECT_NEAR(density_ratio_raycast(*load_domain("sector30.json"), 7.0), 1.0 / 6.0, 1e-9);
  SamplerConfig cfg;
  cfg.samples = 40000;
  const auto p = load_domain("paraboloid.json");
  const auto mc = density_ratio(*p, 3.0, cfg);
  EXPECT_LE(std::abs(mc.value - density_ratio_raycast(*p, 3.0)), 4.0 * mc.stderr_);
}

TEST(CriticalCone, ScaleInvariant) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> t(1e-3, 1e3);
  for (int n : {2, 3, 5}) {
    const Vec a = random_vec(g, n).normalized();
    for (int i = 0; i < 500; ++i) {
      const Vec x = random_vec(g, n);
      EXPECT_EQ(critical_cone_contains(a, x, n), critical_cone_contains(a, t(g) * x, n));
    }
  }
}

TEST(CriticalCone, ThirtyDegreeSectorLiesInside) {
  // |x|² < 2 (x·a)² means an angle below 45° from the axis.
  const Vec a = make_vec({0.0, 1.0});
  EXPECT_TRUE(critical_cone_contains(a, make_vec({std::sin(0.5), std::cos(0.5)}), 2));
  EXPECT_FALSE(critical_cone_contains(a, make_vec({std::sin(0.9), std::cos(0.9)}), 2));
}

TEST(Sampling, InteriorSamplesAreInside) {
  for (const char* f : kFixtures) {
    const auto d = load_domain(f);
    const auto inner = complement_of(d);
    for (const auto& spec : {d, inner}) {
      const auto pts = interior_samples(*spec, 30, 2);
      ASSERT_EQ(pts.size(), 30u) << f;
      for (const Vec& x : pts) {
        EXPECT_TRUE(spec->contains(x)) << f;
        EXPECT_GT(depth(*spec, x), 0.0) << f;
      }
    }
  }
}

TEST(Sampling, Deterministic) {
  const auto a = sample_points(Region::sphere(3, 2.0), 50, 9);
  const auto b = sample_points(Region::sphere(3, 2.0), 50, 9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_NEAR(a[i].norm(), 2.0, 1e-12);
  }
}
