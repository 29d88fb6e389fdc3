#include "core/geometry.hpp"

#include "core/cubature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace nqd::geometry {

using json = nlohmann::json;

// ---- IntervalSet ---------------------------------------------------------------------------

IntervalSet IntervalSet::single(double lo, double hi) {
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return IntervalSet{};
  return IntervalSet({{lo, hi}});
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Piece> out;
  std::size_t i = 0, j = 0;
  while (i < pieces_.size() && j < other.pieces_.size()) {
    const double lo = std::max(pieces_[i].lo, other.pieces_[j].lo);
    const double hi = std::min(pieces_[i].hi, other.pieces_[j].hi);
    if (hi > lo) out.push_back({lo, hi});
    if (pieces_[i].hi < other.pieces_[j].hi)
      ++i;
    else
      ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement() const {
  std::vector<Piece> out;
  double cur = 0.0;
  for (const auto& p : pieces_) {
    if (p.lo > cur) out.push_back({cur, p.lo});
    cur = p.hi;
  }
  if (cur < kInf) out.push_back({cur, kInf});
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::clip(double lo, double hi) const { return intersect(single(lo, hi)); }

double IntervalSet::total_length() const {
  double s = 0.0;
  for (const auto& p : pieces_) s += p.hi - p.lo;
  return s;
}

IntervalSet IntervalSet::quadratic_negative(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return c < 0.0 ? half_line() : IntervalSet{};
    const double t0 = -c / b;
    return b > 0.0 ? single(0.0, t0) : single(t0, kInf);
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return a < 0.0 ? half_line() : IntervalSet{};
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double t1 = q / a;
  double t2 = (q != 0.0) ? c / q : -t1;
  if (t1 > t2) std::swap(t1, t2);
  if (a > 0.0) return single(t1, t2);
  std::vector<Piece> out;
  if (t1 > 0.0) out.push_back({0.0, t1});
  out.push_back({std::max(t2, 0.0), kInf});
  return IntervalSet(std::move(out));
}

// ---- DomainSpec ----------------------------------------------------------------------------

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_unit(const Vec& v, const char* what) {
  NQD_REQUIRE(std::abs(v.norm() - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
              std::string(what) + " must be a unit vector");
}

void check_dim(const Vec& v, int n, const char* what) {
  NQD_REQUIRE(v.size() == n, ErrorCode::DimensionMismatch, std::string(what) + " has the wrong dimension");
}

int shape_dim_hint(const DomainPtr& p) { return p ? p->dim() : 0; }

}  // namespace

DomainSpec::DomainSpec(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {
  NQD_REQUIRE(dim >= 1 && dim <= kMaxDim, ErrorCode::InvalidArgument, "unsupported dimension");
  std::visit(Overloaded{
                 [&](const Ball& s) {
                   check_dim(s.center, dim, "center");
                   NQD_REQUIRE(s.radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
                 },
                 [&](const Ellipsoid& s) {
                   check_dim(s.center, dim, "center");
                   check_dim(s.semi_axes, dim, "semiAxes");
                   NQD_REQUIRE((s.semi_axes.array() > 0.0).all(), ErrorCode::InvalidArgument,
                               "semiAxes must be positive");
                 },
                 [&](const HalfSpace& s) {
                   check_dim(s.normal, dim, "normal");
                   check_unit(s.normal, "normal");
                 },
                 [&](const Strip& s) {
                   check_dim(s.normal, dim, "normal");
                   check_unit(s.normal, "normal");
                   NQD_REQUIRE(s.lower < s.upper, ErrorCode::InvalidArgument, "strip needs lower < upper");
                 },
                 [&](const Cone& s) {
                   check_dim(s.vertex, dim, "vertex");
                   check_dim(s.axis, dim, "axis");
                   check_unit(s.axis, "axis");
                   NQD_REQUIRE(s.half_angle > 0.0 && s.half_angle <= std::numbers::pi / 2,
                               ErrorCode::InvalidArgument, "halfAngle must lie in (0, pi/2]");
                 },
                 [&](const ParaboloidSolid& s) {
                   check_dim(s.axis, dim, "axis");
                   check_unit(s.axis, "axis");
                   NQD_REQUIRE(s.curvature > 0.0, ErrorCode::InvalidArgument, "curvature must be positive");
                 },
                 [&](const Cylinder& s) {
                   NQD_REQUIRE(s.base != nullptr, ErrorCode::InvalidArgument, "cylinder base missing");
                   const int k = s.base->dim();
                   NQD_REQUIRE(k >= 1 && k < dim && k + s.free_axes == dim, ErrorCode::DimensionMismatch,
                               "cylinder base dimension must satisfy 1 <= k < n and k + freeAxes = n");
                 },
                 [&](const Complement& s) {
                   NQD_REQUIRE(shape_dim_hint(s.inner) == dim, ErrorCode::DimensionMismatch,
                               "complement inner dimension mismatch");
                 },
                 [&](const BallIntersection& s) {
                   NQD_REQUIRE(shape_dim_hint(s.inner) == dim, ErrorCode::DimensionMismatch,
                               "ball intersection inner dimension mismatch");
                   NQD_REQUIRE(s.radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
                 },
                 [&](const Box& s) {
                   check_dim(s.center, dim, "center");
                   check_dim(s.half_widths, dim, "halfWidths");
                   NQD_REQUIRE((s.half_widths.array() > 0.0).all(), ErrorCode::InvalidArgument,
                               "halfWidths must be positive");
                 },
                 [&](const Empty&) {},
             },
             shape_);
}

std::string DomainSpec::kind() const {
  return std::visit(Overloaded{
                        [](const Ball&) { return std::string("Ball"); },
                        [](const Ellipsoid&) { return std::string("Ellipsoid"); },
                        [](const HalfSpace&) { return std::string("HalfSpace"); },
                        [](const Strip&) { return std::string("Strip"); },
                        [](const Cone&) { return std::string("Cone"); },
                        [](const ParaboloidSolid&) { return std::string("ParaboloidSolid"); },
                        [](const Cylinder&) { return std::string("Cylinder"); },
                        [](const Complement&) { return std::string("Complement"); },
                        [](const BallIntersection&) { return std::string("BallIntersection"); },
                        [](const Box&) { return std::string("Box"); },
                        [](const Empty&) { return std::string("Empty"); },
                    },
                    shape_);
}

bool DomainSpec::contains(const Vec& x) const {
  NQD_REQUIRE(x.size() == dim_, ErrorCode::DimensionMismatch, "contains: point has the wrong dimension");
  return std::visit(
      Overloaded{
          [&](const Ball& s) { return (x - s.center).squaredNorm() < s.radius * s.radius; },
          [&](const Ellipsoid& s) {
            return (x - s.center).cwiseQuotient(s.semi_axes).squaredNorm() < 1.0;
          },
          [&](const HalfSpace& s) { return x.dot(s.normal) > s.offset; },
          [&](const Strip& s) {
            const double t = x.dot(s.normal);
            return t > s.lower && t < s.upper;
          },
          [&](const Cone& s) {
            const Vec w = x - s.vertex;
            const double ax = w.dot(s.axis);
            if (s.half_angle >= std::numbers::pi / 2) return ax > 0.0;
            return ax > w.norm() * std::cos(s.half_angle);
          },
          [&](const ParaboloidSolid& s) {
            const double ax = x.dot(s.axis);
            const double perp2 = x.squaredNorm() - ax * ax;
            return ax > s.curvature * perp2;
          },
          [&](const Cylinder& s) { return s.base->contains(x.head(s.base->dim())); },
          [&](const Complement& s) { return !s.inner->contains(x); },
          [&](const BallIntersection& s) { return x.squaredNorm() < s.radius * s.radius && s.inner->contains(x); },
          [&](const Box& s) { return ((x - s.center).cwiseAbs().array() < s.half_widths.array()).all(); },
          [&](const Empty&) { return false; },
      },
      shape_);
}

IntervalSet DomainSpec::ray(const Vec& p, const Vec& d) const {
  NQD_REQUIRE(p.size() == dim_ && d.size() == dim_, ErrorCode::DimensionMismatch, "ray: wrong dimension");
  using IS = IntervalSet;
  auto halfspace = [](double value, double slope) {
    // {t : value + t slope > 0}
    return IS::quadratic_negative(0.0, -slope, -value);
  };
  return std::visit(
      Overloaded{
          [&](const Ball& s) {
            const Vec w = p - s.center;
            return IS::quadratic_negative(d.squaredNorm(), 2.0 * d.dot(w), w.squaredNorm() - s.radius * s.radius);
          },
          [&](const Ellipsoid& s) {
            const Vec w = (p - s.center).cwiseQuotient(s.semi_axes);
            const Vec e = d.cwiseQuotient(s.semi_axes);
            return IS::quadratic_negative(e.squaredNorm(), 2.0 * e.dot(w), w.squaredNorm() - 1.0);
          },
          [&](const HalfSpace& s) { return halfspace(p.dot(s.normal) - s.offset, d.dot(s.normal)); },
          [&](const Strip& s) {
            const double v = p.dot(s.normal), sl = d.dot(s.normal);
            return halfspace(v - s.lower, sl).intersect(halfspace(s.upper - v, -sl));
          },
          [&](const Cone& s) {
            const Vec w = p - s.vertex;
            const double wa = w.dot(s.axis), da = d.dot(s.axis);
            IS front = halfspace(wa, da);
            if (s.half_angle >= std::numbers::pi / 2) return front;
            const double c2 = std::pow(std::cos(s.half_angle), 2);
            // (wa + t da)^2 - c2 |w + t d|^2 > 0
            const double qa = da * da - c2 * d.squaredNorm();
            const double qb = 2.0 * (wa * da - c2 * w.dot(d));
            const double qc = wa * wa - c2 * w.squaredNorm();
            return front.intersect(IS::quadratic_negative(-qa, -qb, -qc));
          },
          [&](const ParaboloidSolid& s) {
            const double pa = p.dot(s.axis), da = d.dot(s.axis);
            const Vec pp = p - pa * s.axis;
            const Vec dp = d - da * s.axis;
            // curvature |pp + t dp|^2 - (pa + t da) < 0
            return IS::quadratic_negative(s.curvature * dp.squaredNorm(), 2.0 * s.curvature * pp.dot(dp) - da,
                                          s.curvature * pp.squaredNorm() - pa);
          },
          [&](const Cylinder& s) {
            const int k = s.base->dim();
            return s.base->ray(p.head(k), d.head(k));
          },
          [&](const Complement& s) { return s.inner->ray(p, d).complement(); },
          [&](const BallIntersection& s) {
            return s.inner->ray(p, d).intersect(
                IS::quadratic_negative(d.squaredNorm(), 2.0 * d.dot(p), p.squaredNorm() - s.radius * s.radius));
          },
          [&](const Box& s) {
            IS acc = IS::half_line();
            for (int i = 0; i < dim_; ++i) {
              const double v = p[i] - s.center[i];
              acc = acc.intersect(halfspace(v + s.half_widths[i], d[i]))
                        .intersect(halfspace(s.half_widths[i] - v, -d[i]));
              if (acc.empty()) break;
            }
            return acc;
          },
          [&](const Empty&) { return IS{}; },
      },
      shape_);
}

std::optional<std::pair<Vec, double>> DomainSpec::bounding_ball() const {
  using R = std::optional<std::pair<Vec, double>>;
  return std::visit(Overloaded{
                        [&](const Ball& s) -> R { return std::make_pair(s.center, s.radius); },
                        [&](const Ellipsoid& s) -> R { return std::make_pair(s.center, s.semi_axes.maxCoeff()); },
                        [&](const Box& s) -> R { return std::make_pair(s.center, s.half_widths.norm()); },
                        [&](const BallIntersection& s) -> R {
                          auto inner = s.inner->bounding_ball();
                          if (inner && inner->first.norm() + inner->second < s.radius) return inner;
                          return std::make_pair(Vec(Vec::Zero(dim_)), s.radius);
                        },
                        [&](const Empty&) -> R { return std::make_pair(Vec(Vec::Zero(dim_)), 0.0); },
                        [&](const auto&) -> R { return std::nullopt; },
                    },
                    shape_);
}

bool DomainSpec::is_whole_space() const {
  const auto* c = std::get_if<Complement>(&shape_);
  return c && c->inner->is_empty();
}

DomainPtr DomainSpec::ball(Vec center, double radius) {
  const int n = static_cast<int>(center.size());
  return std::make_shared<DomainSpec>(n, Ball{std::move(center), radius});
}
DomainPtr DomainSpec::ellipsoid(Vec center, Vec semi_axes) {
  const int n = static_cast<int>(center.size());
  return std::make_shared<DomainSpec>(n, Ellipsoid{std::move(center), std::move(semi_axes)});
}
DomainPtr DomainSpec::half_space(Vec normal, double offset) {
  const int n = static_cast<int>(normal.size());
  return std::make_shared<DomainSpec>(n, HalfSpace{std::move(normal), offset});
}
DomainPtr DomainSpec::strip(Vec normal, double lower, double upper) {
  const int n = static_cast<int>(normal.size());
  return std::make_shared<DomainSpec>(n, Strip{std::move(normal), lower, upper});
}
DomainPtr DomainSpec::cone(Vec vertex, Vec axis, double half_angle) {
  const int n = static_cast<int>(vertex.size());
  return std::make_shared<DomainSpec>(n, Cone{std::move(vertex), std::move(axis), half_angle});
}
DomainPtr DomainSpec::paraboloid(Vec axis, double curvature) {
  const int n = static_cast<int>(axis.size());
  return std::make_shared<DomainSpec>(n, ParaboloidSolid{std::move(axis), curvature});
}
DomainPtr DomainSpec::cylinder(DomainPtr base, int free_axes) {
  NQD_REQUIRE(base != nullptr, ErrorCode::InvalidArgument, "cylinder base missing");
  const int n = base->dim() + free_axes;
  return std::make_shared<DomainSpec>(n, Cylinder{std::move(base), free_axes});
}
DomainPtr DomainSpec::complement(DomainPtr inner) {
  NQD_REQUIRE(inner != nullptr, ErrorCode::InvalidArgument, "complement inner missing");
  const int n = inner->dim();
  return std::make_shared<DomainSpec>(n, Complement{std::move(inner)});
}
DomainPtr DomainSpec::ball_intersection(DomainPtr inner, double radius) {
  NQD_REQUIRE(inner != nullptr, ErrorCode::InvalidArgument, "ball intersection inner missing");
  const int n = inner->dim();
  return std::make_shared<DomainSpec>(n, BallIntersection{std::move(inner), radius});
}
DomainPtr DomainSpec::box(Vec center, Vec half_widths) {
  const int n = static_cast<int>(center.size());
  return std::make_shared<DomainSpec>(n, Box{std::move(center), std::move(half_widths)});
}
DomainPtr DomainSpec::empty(int dim) { return std::make_shared<DomainSpec>(dim, Empty{}); }
DomainPtr DomainSpec::whole(int dim) { return complement(empty(dim)); }

DomainPtr complement_of(const DomainPtr& omega) {
  if (const auto* c = std::get_if<Complement>(&omega->shape())) return c->inner;
  return DomainSpec::complement(omega);
}

// ---- JSON ----------------------------------------------------------------------------------

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::Parse, path + ": " + msg);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(path, "must be finite");
  return x;
}

double read_positive(const json& v, const std::string& path) {
  const double x = read_number(v, path);
  if (!(x > 0.0)) schema_error(path, "must be strictly positive");
  return x;
}

Vec read_vec(const json& v, int n, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  if (static_cast<int>(v.size()) != n)
    schema_error(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = read_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Vec read_unit(const json& v, int n, const std::string& path) {
  Vec u = read_vec(v, n, path);
  const double norm = u.norm();
  if (std::abs(norm - 1.0) > 1e-9) schema_error(path, "must be a unit vector (norm " + std::to_string(norm) + ")");
  return u / norm;
}

Vec read_positive_vec(const json& v, int n, const std::string& path) {
  Vec u = read_vec(v, n, path);
  for (int i = 0; i < n; ++i)
    if (!(u[i] > 0.0)) schema_error(path + "[" + std::to_string(i) + "]", "must be strictly positive");
  return u;
}

DomainPtr parse_shape(const json& shape, int n, const std::string& path);

DomainPtr parse_nested(const json& doc, const std::string& path, int expected_dim) {
  // Nested specs may be full documents {"dim", "shape"} or bare shapes (dimension inherited).
  if (doc.is_object() && doc.contains("shape")) {
    const json& d = field(doc, "dim", path);
    if (!d.is_number_integer()) schema_error(path + ".dim", "expected an integer");
    const int n = d.get<int>();
    if (expected_dim > 0 && n != expected_dim)
      schema_error(path + ".dim", "expected " + std::to_string(expected_dim));
    if (n < 1 || n > kMaxDim) schema_error(path + ".dim", "unsupported dimension");
    return parse_shape(doc["shape"], n, path + ".shape");
  }
  if (expected_dim <= 0) schema_error(path, "nested spec needs a dim");
  return parse_shape(doc, expected_dim, path);
}

DomainPtr parse_shape(const json& shape, int n, const std::string& path) {
  const json& k = field(shape, "kind", path);
  if (!k.is_string()) schema_error(path + ".kind", "expected a string");
  const std::string kind = k.get<std::string>();
  auto f = [&](const char* key) -> const json& { return field(shape, key, path); };
  auto p = [&](const char* key) { return path + "." + key; };
  try {
    if (kind == "Ball") {
      return DomainSpec::ball(read_vec(f("center"), n, p("center")), read_positive(f("radius"), p("radius")));
    }
    if (kind == "Ellipsoid") {
      return DomainSpec::ellipsoid(read_vec(f("center"), n, p("center")),
                                   read_positive_vec(f("semiAxes"), n, p("semiAxes")));
    }
    if (kind == "HalfSpace") {
      return DomainSpec::half_space(read_unit(f("normal"), n, p("normal")), read_number(f("offset"), p("offset")));
    }
    if (kind == "Strip") {
      const double lo = read_number(f("lower"), p("lower"));
      const double hi = read_number(f("upper"), p("upper"));
      if (!(lo < hi)) schema_error(p("upper"), "must exceed lower");
      return DomainSpec::strip(read_unit(f("normal"), n, p("normal")), lo, hi);
    }
    if (kind == "Cone") {
      const double a = read_number(f("halfAngle"), p("halfAngle"));
      if (!(a > 0.0 && a <= std::numbers::pi / 2)) schema_error(p("halfAngle"), "must lie in (0, pi/2]");
      return DomainSpec::cone(read_vec(f("vertex"), n, p("vertex")), read_unit(f("axis"), n, p("axis")), a);
    }
    if (kind == "ParaboloidSolid") {
      return DomainSpec::paraboloid(read_unit(f("axis"), n, p("axis")),
                                    read_positive(f("curvature"), p("curvature")));
    }
    if (kind == "Cylinder") {
      const json& fa = f("freeAxes");
      if (!fa.is_number_integer()) schema_error(p("freeAxes"), "expected an integer");
      const int free_axes = fa.get<int>();
      const int k = n - free_axes;
      if (k < 1 || k >= n) schema_error(p("freeAxes"), "base dimension must satisfy 1 <= k < n");
      return DomainSpec::cylinder(parse_nested(f("base"), p("base"), k), free_axes);
    }
    if (kind == "Complement") {
      return DomainSpec::complement(parse_nested(f("inner"), p("inner"), n));
    }
    if (kind == "BallIntersection") {
      return DomainSpec::ball_intersection(parse_nested(f("inner"), p("inner"), n),
                                           read_positive(f("radius"), p("radius")));
    }
    if (kind == "Box") {
      return DomainSpec::box(read_vec(f("center"), n, p("center")),
                             read_positive_vec(f("halfWidths"), n, p("halfWidths")));
    }
    if (kind == "Empty") return DomainSpec::empty(n);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    schema_error(path, e.what());
  }
  schema_error(path + ".kind", "unknown kind '" + kind + "'");
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json shape_json(const DomainSpec& spec) {
  return std::visit(
      Overloaded{
          [](const Ball& s) { return json{{"kind", "Ball"}, {"center", vec_json(s.center)}, {"radius", s.radius}}; },
          [](const Ellipsoid& s) {
            return json{{"kind", "Ellipsoid"}, {"center", vec_json(s.center)}, {"semiAxes", vec_json(s.semi_axes)}};
          },
          [](const HalfSpace& s) {
            return json{{"kind", "HalfSpace"}, {"normal", vec_json(s.normal)}, {"offset", s.offset}};
          },
          [](const Strip& s) {
            return json{{"kind", "Strip"}, {"normal", vec_json(s.normal)}, {"lower", s.lower}, {"upper", s.upper}};
          },
          [](const Cone& s) {
            return json{{"kind", "Cone"},
                        {"vertex", vec_json(s.vertex)},
                        {"axis", vec_json(s.axis)},
                        {"halfAngle", s.half_angle}};
          },
          [](const ParaboloidSolid& s) {
            return json{{"kind", "ParaboloidSolid"}, {"axis", vec_json(s.axis)}, {"curvature", s.curvature}};
          },
          [](const Cylinder& s) {
            return json{{"kind", "Cylinder"}, {"base", domain_to_json(*s.base)}, {"freeAxes", s.free_axes}};
          },
          [](const Complement& s) { return json{{"kind", "Complement"}, {"inner", domain_to_json(*s.inner)}}; },
          [](const BallIntersection& s) {
            return json{{"kind", "BallIntersection"}, {"inner", domain_to_json(*s.inner)}, {"radius", s.radius}};
          },
          [](const Box& s) {
            return json{{"kind", "Box"}, {"center", vec_json(s.center)}, {"halfWidths", vec_json(s.half_widths)}};
          },
          [](const Empty&) { return json{{"kind", "Empty"}}; },
      },
      spec.shape());
}

}  // namespace

DomainPtr domain_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("$", "expected an object");
  const json& d = field(doc, "dim", "$");
  if (!d.is_number_integer()) schema_error("$.dim", "expected an integer");
  const int n = d.get<int>();
  if (n < 2) schema_error("$.dim", "dimension must be at least 2");
  if (n > kMaxDim) schema_error("$.dim", "dimension above " + std::to_string(kMaxDim) + " is not supported");
  return parse_shape(field(doc, "shape", "$"), n, "$.shape");
}

json domain_to_json(const DomainSpec& spec) { return json{{"dim", spec.dim()}, {"shape", shape_json(spec)}}; }

// ---- sampling ------------------------------------------------------------------------------

namespace {

Vec gaussian_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

double unit_ball_volume(int n) { return cubature::sphere_area(n) / n; }

}  // namespace

DensityEstimate density_ratio(const DomainSpec& spec, double rho, const SamplerConfig& cfg) {
  NQD_REQUIRE(rho > 0.0, ErrorCode::InvalidArgument, "density_ratio: rho must be positive");
  NQD_REQUIRE(cfg.samples >= 2, ErrorCode::InvalidArgument, "density_ratio: need at least 2 samples");
  const int n = spec.dim();
  const int strata = std::max(1, cfg.strata);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Equal-volume radial shells: shell k covers u = (r/rho)^n in [k/m, (k+1)/m).
  const long per = std::max<long>(2, cfg.samples / strata);
  double mean = 0.0, var = 0.0;
  for (int k = 0; k < strata; ++k) {
    long hits = 0;
    for (long s = 0; s < per; ++s) {
      const double u = (k + unif(rng)) / strata;
      const double r = rho * std::pow(u, 1.0 / n);
      Vec x = r * gaussian_direction(n, rng);
      if (spec.contains(x)) ++hits;
    }
    const double p = static_cast<double>(hits) / per;
    mean += p / strata;
    var += p * (1.0 - p) / (per - 1) / (static_cast<double>(strata) * strata);
  }
  return {mean, std::sqrt(var)};
}

double density_ratio_raycast(const DomainSpec& spec, double rho, double tol) {
  const int n = spec.dim();
  const Vec origin = Vec::Zero(n);
  auto f = [&](const Vec& theta) {
    double s = 0.0;
    const IntervalSet segs = spec.ray(origin, theta).clip(0.0, rho);
    for (const auto& piece : segs.pieces())
      s += std::pow(piece.hi, n) - std::pow(piece.lo, n);
    return s / n;
  };
  const double vol = unit_ball_volume(n) * std::pow(rho, n);
  auto r = cubature::integrate_sphere(n, f, tol * vol);
  return r.value / vol;
}

bool critical_cone_contains(const Vec& a, const Vec& x, int n) {
  NQD_REQUIRE(a.size() == x.size(), ErrorCode::DimensionMismatch, "critical_cone_contains: dimension mismatch");
  const double ax = a.dot(x);
  return x.squaredNorm() < n * ax * ax;
}

Region Region::box(Vec lo, Vec hi) {
  NQD_REQUIRE(lo.size() == hi.size(), ErrorCode::DimensionMismatch, "box corners differ in dimension");
  NQD_REQUIRE((lo.array() <= hi.array()).all(), ErrorCode::InvalidArgument, "box needs lo <= hi");
  Region r{Kind::Box, lo, hi};
  r.dim = static_cast<int>(lo.size());
  return r;
}
Region Region::sphere(int dim, double radius) {
  Region r{Kind::Sphere, {}, {}};
  r.dim = dim;
  r.r1 = radius;
  return r;
}
Region Region::ball(int dim, double radius) {
  Region r{Kind::Ball, {}, {}};
  r.dim = dim;
  r.r1 = radius;
  return r;
}
Region Region::annulus(int dim, double r0, double r1) {
  NQD_REQUIRE(r0 >= 0.0 && r1 > r0, ErrorCode::InvalidArgument, "annulus needs 0 <= r0 < r1");
  Region r{Kind::Annulus, {}, {}};
  r.dim = dim;
  r.r0 = r0;
  r.r1 = r1;
  return r;
}

std::vector<Vec> sample_points(const Region& region, long count, std::uint64_t seed) {
  NQD_REQUIRE(count >= 1, ErrorCode::InvalidArgument, "sample_points: count must be >= 1");
  NQD_REQUIRE(region.dim >= 1 && region.dim <= kMaxDim, ErrorCode::InvalidArgument, "sample_points: bad dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = region.dim;
  std::vector<Vec> out;
  out.reserve(count);
  for (long i = 0; i < count; ++i) {
    switch (region.kind) {
      case Region::Kind::Box: {
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = region.lo[k] + (region.hi[k] - region.lo[k]) * unif(rng);
        out.push_back(x);
        break;
      }
      case Region::Kind::Sphere:
        out.push_back(region.r1 * gaussian_direction(n, rng));
        break;
      case Region::Kind::Ball:
      case Region::Kind::Annulus: {
        const Vec d = gaussian_direction(n, rng);
        const double a = std::pow(region.r0, n), b = std::pow(region.r1, n);
        const double r = std::pow(a + (b - a) * unif(rng), 1.0 / n);
        out.push_back(r * d);
        break;
      }
    }
  }
  return out;
}

namespace {

const std::vector<Vec>& probe_directions(int n) {
  thread_local std::vector<std::vector<Vec>> cache(kMaxDim + 1);
  auto& dirs = cache[n];
  if (dirs.empty()) {
    for (int i = 0; i < n; ++i) {
      dirs.push_back(unit_vec(n, i));
      dirs.push_back(-unit_vec(n, i));
    }
    std::mt19937_64 rng(0x5eedULL + n);
    for (int i = 0; i < 8 * n; ++i) dirs.push_back(gaussian_direction(n, rng));
  }
  return dirs;
}

}  // namespace

double depth(const DomainSpec& spec, const Vec& x) {
  if (!spec.contains(x)) return 0.0;
  double best = IntervalSet::kInf;
  for (const Vec& d : probe_directions(spec.dim())) {
    const auto segs = spec.ray(x, d);
    if (segs.empty()) return 0.0;
    const auto& first = segs.pieces().front();
    best = std::min(best, first.lo > 0.0 ? 0.0 : first.hi);
  }
  return best;
}

std::vector<Vec> interior_samples(const DomainSpec& spec, int count, std::uint64_t seed, double window,
                                  double margin_fraction) {
  NQD_REQUIRE(count >= 1, ErrorCode::InvalidArgument, "interior_samples: count must be >= 1");
  const int n = spec.dim();
  Vec lo = Vec::Constant(n, -window), hi = Vec::Constant(n, window);
  if (auto bb = spec.bounding_ball()) {
    lo = bb->first.array() - bb->second;
    hi = bb->first.array() + bb->second;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Candidate pool; its deepest point estimates the inradius (capped by the window).
  std::vector<std::pair<Vec, double>> pool;
  const long target_pool = std::max<long>(20L * count, 400L);
  for (long tries = 0; static_cast<long>(pool.size()) < target_pool && tries < 200L * target_pool; ++tries) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * unif(rng);
    const double dep = depth(spec, x);
    if (dep > 0.0) pool.emplace_back(x, std::min(dep, window));
  }
  NQD_REQUIRE(!pool.empty(), ErrorCode::InvalidArgument, "interior_samples: domain has no interior in the window");
  double inradius = 0.0;
  for (const auto& [x, d] : pool) inradius = std::max(inradius, d);
  const double margin = margin_fraction * inradius;

  // Three depth shells: (margin, r/3], (r/3, 2r/3], (2r/3, r]; round-robin keeps all shells populated.
  std::array<std::vector<Vec>, 3> shells;
  for (const auto& [x, d] : pool) {
    if (d <= margin) continue;
    const int s = std::min(2, static_cast<int>(3.0 * d / inradius));
    shells[s].push_back(x);
  }
  std::vector<Vec> out;
  std::array<std::size_t, 3> next{0, 0, 0};
  while (static_cast<int>(out.size()) < count) {
    bool progressed = false;
    for (int s = 0; s < 3 && static_cast<int>(out.size()) < count; ++s) {
      if (next[s] < shells[s].size()) {
        out.push_back(shells[s][next[s]++]);
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  NQD_REQUIRE(static_cast<int>(out.size()) == count, ErrorCode::InvalidArgument,
              "interior_samples: could not place enough interior points");
  return out;
}

}  // namespace nqd::geometry
