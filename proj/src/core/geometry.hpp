#pragma once

#include "core/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nqd::geometry {

/// Sorted, disjoint open intervals of the half line [0, ∞). `hi` may be +inf.
class IntervalSet {
public:
  struct Piece {
    double lo, hi;
  };

  IntervalSet() = default;
  static IntervalSet half_line() { return IntervalSet({{0.0, kInf}}); }
  static IntervalSet single(double lo, double hi);

  [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }
  [[nodiscard]] bool empty() const { return pieces_.empty(); }

  [[nodiscard]] IntervalSet intersect(const IntervalSet& other) const;
  [[nodiscard]] IntervalSet complement() const;
  [[nodiscard]] IntervalSet clip(double lo, double hi) const;
  [[nodiscard]] double total_length() const;

  /// {t >= 0 : a t^2 + b t + c < 0}.
  static IntervalSet quadratic_negative(double a, double b, double c);

  static constexpr double kInf = std::numeric_limits<double>::infinity();

private:
  explicit IntervalSet(std::vector<Piece> p) : pieces_(std::move(p)) {}
  std::vector<Piece> pieces_;
};

class DomainSpec;
using DomainPtr = std::shared_ptr<const DomainSpec>;

struct Ball {
  Vec center;
  double radius;
};
struct Ellipsoid {
  Vec center;
  Vec semi_axes;
};
/// {x : x·normal > offset}
struct HalfSpace {
  Vec normal;
  double offset;
};
/// {x : lower < x·normal < upper}
struct Strip {
  Vec normal;
  double lower, upper;
};
/// {x : (x-vertex)·axis > |x-vertex| cos(half_angle)}; half_angle = π/2 is a half-space.
struct Cone {
  Vec vertex;
  Vec axis;
  double half_angle;
};
/// {x : x·axis > curvature |x_⊥|^2}, vertex at the origin.
struct ParaboloidSolid {
  Vec axis;
  double curvature;
};
/// base × R^{free_axes}; the base lives on the first k coordinates.
struct Cylinder {
  DomainPtr base;
  int free_axes;
};
/// Closed complement of the open set `inner`.
struct Complement {
  DomainPtr inner;
};
/// inner ∩ B_radius(0)
struct BallIntersection {
  DomainPtr inner;
  double radius;
};
/// Open axis-aligned box {|x_i - center_i| < half_widths_i}.
struct Box {
  Vec center;
  Vec half_widths;
};
struct Empty {};

using Shape = std::variant<Ball, Ellipsoid, HalfSpace, Strip, Cone, ParaboloidSolid, Cylinder, Complement,
                           BallIntersection, Box, Empty>;

/// Algebraic description of an open region of R^n (or the closed complement of one).
class DomainSpec {
public:
  DomainSpec(int dim, Shape shape);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::string kind() const;

  [[nodiscard]] bool contains(const Vec& x) const;

  /// Parameters t >= 0 with p + t d inside the set. `d` need not be normalized.
  [[nodiscard]] IntervalSet ray(const Vec& p, const Vec& d) const;

  /// Ball (center, radius) containing the set, when it is bounded.
  [[nodiscard]] std::optional<std::pair<Vec, double>> bounding_ball() const;
  [[nodiscard]] bool bounded() const { return bounding_ball().has_value(); }
  [[nodiscard]] bool is_empty() const { return std::holds_alternative<Empty>(shape_); }
  /// True for Complement(Empty), i.e. all of R^n.
  [[nodiscard]] bool is_whole_space() const;

  // Validated constructors.
  static DomainPtr ball(Vec center, double radius);
  static DomainPtr ellipsoid(Vec center, Vec semi_axes);
  static DomainPtr half_space(Vec normal, double offset);
  static DomainPtr strip(Vec normal, double lower, double upper);
  static DomainPtr cone(Vec vertex, Vec axis, double half_angle);
  static DomainPtr paraboloid(Vec axis, double curvature);
  static DomainPtr cylinder(DomainPtr base, int free_axes);
  static DomainPtr complement(DomainPtr inner);
  static DomainPtr ball_intersection(DomainPtr inner, double radius);
  static DomainPtr box(Vec center, Vec half_widths);
  static DomainPtr empty(int dim);
  static DomainPtr whole(int dim);

private:
  int dim_;
  Shape shape_;
};

/// Ωᶜ as a DomainSpec: unwraps a Complement, otherwise wraps.
DomainPtr complement_of(const DomainPtr& omega);

// ---- JSON ----------------------------------------------------------------------------------

/// Parses {"dim": n, "shape": {"kind": ..., ...}}. Unit vectors within 1e-9 of unit length
/// are renormalized; everything else that violates an invariant is rejected with the field path.
DomainPtr domain_from_json(const nlohmann::json& doc);
nlohmann::json domain_to_json(const DomainSpec& spec);

// ---- sampling and measures -------------------------------------------------------------

struct SamplerConfig {
  long samples = 100000;
  std::uint64_t seed = 1;
  int strata = 16;
};

struct DensityEstimate {
  double value;
  double stderr_;
};

/// Stratified Monte-Carlo estimate of |D ∩ B_ρ| / |B_ρ|.
DensityEstimate density_ratio(const DomainSpec& spec, double rho, const SamplerConfig& cfg);

/// |D ∩ B_ρ| / |B_ρ| by ray casting from the origin (radial part exact).
double density_ratio_raycast(const DomainSpec& spec, double rho, double tol = 1e-10);

/// |x|^2 < n (x·a)^2
bool critical_cone_contains(const Vec& a, const Vec& x, int n);

struct Region {
  enum class Kind { Box, Sphere, Ball, Annulus } kind;
  Vec lo, hi;          // Box
  double r0 = 0.0;     // Annulus inner radius
  double r1 = 1.0;     // Sphere / Ball / Annulus outer radius
  int dim = 2;

  static Region box(Vec lo, Vec hi);
  static Region sphere(int dim, double radius);
  static Region ball(int dim, double radius);
  static Region annulus(int dim, double r0, double r1);
};

std::vector<Vec> sample_points(const Region& region, long count, std::uint64_t seed);

/// Approximate distance from an interior point to ∂D (minimum exit distance over a fixed
/// direction set). Zero when x is not inside.
double depth(const DomainSpec& spec, const Vec& x);

/// Interior points stratified into three depth shells, avoiding ∂D by margin·inradius.
/// Unbounded sets are sampled inside the window [-window, window]^n.
std::vector<Vec> interior_samples(const DomainSpec& spec, int count, std::uint64_t seed, double window = 4.0,
                                  double margin_fraction = 0.01);

}  // namespace nqd::geometry
