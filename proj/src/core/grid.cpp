#include "core/grid.hpp"

#include <algorithm>
#include <limits>

namespace nqd {

GridLayout GridLayout::box(const Vec& lo, const Vec& hi, double h) {
  NQD_REQUIRE(lo.size() == hi.size() && lo.size() >= 1 && lo.size() <= kMaxDim, ErrorCode::DimensionMismatch,
              "grid: corner dimensions disagree");
  NQD_REQUIRE(h > 0.0 && std::isfinite(h), ErrorCode::InvalidArgument, "grid: spacing must be positive");
  GridLayout g;
  g.dim = static_cast<int>(lo.size());
  g.lo = lo;
  g.h = h;
  long total = 1;
  for (int a = 0; a < g.dim; ++a) {
    const double cells = (hi[a] - lo[a]) / h;
    NQD_REQUIRE(cells >= 1.0 - 1e-9, ErrorCode::InvalidArgument, "grid: box side shorter than h");
    NQD_REQUIRE(std::abs(cells - std::round(cells)) <= 1e-9 * std::max(1.0, cells), ErrorCode::InvalidArgument,
                "grid: h must divide the box evenly");
    g.count[a] = std::lround(cells) + 1;
    total *= g.count[a];
  }
  NQD_REQUIRE(total <= 200000000L, ErrorCode::InvalidArgument, "grid: too many nodes");
  return g;
}

GridField GridField::box(const Vec& lo, const Vec& hi, double h) {
  GridField g;
  static_cast<GridLayout&>(g) = GridLayout::box(lo, hi, h);
  g.values.assign(static_cast<std::size_t>(g.nodes()), 0.0);
  return g;
}

GridField GridField::centered(int n, double half_width, double h) {
  NQD_REQUIRE(n >= 1 && n <= kMaxDim, ErrorCode::InvalidArgument, "grid: unsupported dimension");
  return box(Vec::Constant(n, -half_width), Vec::Constant(n, half_width), h);
}

GridField GridField::sample(const ScalarField& f, double half_width, double h) {
  return sample(f, GridLayout::box(Vec::Constant(f.dim, -half_width), Vec::Constant(f.dim, half_width), h));
}

GridField GridField::sample(const ScalarField& f, const GridLayout& layout) {
  NQD_REQUIRE(f.dim == layout.dim, ErrorCode::DimensionMismatch, "grid: field dimension mismatch");
  GridField g;
  static_cast<GridLayout&>(g) = layout;
  g.values.resize(static_cast<std::size_t>(layout.nodes()));
  for (long k = 0; k < g.size(); ++k) g.values[k] = f(g.node(k));
  g.validate();
  return g;
}

long GridLayout::nearest(const Vec& x) const {
  GridIndex m{};
  for (int a = 0; a < dim; ++a)
    m[a] = std::clamp<long>(std::lround((x[a] - lo[a]) / h), 0, count[a] - 1);
  return index(m);
}

double GridLayout::inradius() const {
  const Vec up = hi();
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) r = std::min({r, -lo[a], up[a]});
  return r;
}

bool GridLayout::same_layout(const GridLayout& o) const {
  if (dim != o.dim || h != o.h) return false;
  for (int a = 0; a < dim; ++a)
    if (count[a] != o.count[a] || lo[a] != o.lo[a]) return false;
  return true;
}

GridField GridField::partial(int axis) const {
  NQD_REQUIRE(axis >= 0 && axis < dim, ErrorCode::InvalidArgument, "grid: axis out of range");
  GridField d = zeros_like();
  const long s = stride(axis);
  for (long k = 0; k < size(); ++k) {
    const long m = multi(k)[axis];
    if (m == 0)
      d.values[k] = (values[k + s] - values[k]) / h;
    else if (m == count[axis] - 1)
      d.values[k] = (values[k] - values[k - s]) / h;
    else
      d.values[k] = (values[k + s] - values[k - s]) / (2.0 * h);
  }
  return d;
}

void GridField::validate() const {
  NQD_REQUIRE(dim >= 1 && h > 0.0, ErrorCode::InvalidArgument, "grid: invalid layout");
  NQD_REQUIRE(nodes() == size(), ErrorCode::DimensionMismatch, "grid: value count does not match the layout");
  for (double v : values) NQD_REQUIRE(std::isfinite(v), ErrorCode::InvalidArgument, "grid: non-finite value");
}

long GridMask::count_on() const {
  long c = 0;
  for (auto b : on) c += b ? 1 : 0;
  return c;
}

}  // namespace nqd
