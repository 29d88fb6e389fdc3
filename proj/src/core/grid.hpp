#pragma once

#include "core/common.hpp"
#include "core/potential.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <vector>

namespace nqd {

using GridIndex = std::array<long, kMaxDim>;

/// Uniform grid geometry: node k sits at lo + h·multi(k), axis 0 fastest.
struct GridLayout {
  int dim = 0;
  Vec lo;
  double h = 0.0;
  GridIndex count{};

  /// Layout on [lo, hi]; h must divide every side length.
  static GridLayout box(const Vec& lo, const Vec& hi, double h);

  [[nodiscard]] long nodes() const {
    long s = 1;
    for (int a = 0; a < dim; ++a) s *= count[a];
    return s;
  }
  [[nodiscard]] long stride(int axis) const {
    long s = 1;
    for (int a = 0; a < axis; ++a) s *= count[a];
    return s;
  }
  [[nodiscard]] GridIndex multi(long k) const {
    GridIndex m{};
    for (int a = 0; a < dim; ++a) {
      m[a] = k % count[a];
      k /= count[a];
    }
    return m;
  }
  [[nodiscard]] long index(const GridIndex& m) const {
    long k = 0;
    for (int a = dim - 1; a >= 0; --a) k = k * count[a] + m[a];
    return k;
  }
  [[nodiscard]] Vec node(long k) const {
    const GridIndex m = multi(k);
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = lo[a] + h * static_cast<double>(m[a]);
    return x;
  }
  [[nodiscard]] Vec hi() const {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = lo[a] + h * static_cast<double>(count[a] - 1);
    return x;
  }
  [[nodiscard]] bool on_boundary(long k) const {
    const GridIndex m = multi(k);
    for (int a = 0; a < dim; ++a)
      if (m[a] == 0 || m[a] == count[a] - 1) return true;
    return false;
  }
  /// Index of the node nearest x (clamped to the grid).
  [[nodiscard]] long nearest(const Vec& x) const;
  /// Distance from the origin to the closest face of the box.
  [[nodiscard]] double inradius() const;
  [[nodiscard]] bool same_layout(const GridLayout& o) const;
};

struct GridField : GridLayout {
  std::vector<double> values;

  static GridField box(const Vec& lo, const Vec& hi, double h);
  /// Grid on [-half_width, half_width]^n with a node at the origin.
  static GridField centered(int n, double half_width, double h);
  static GridField sample(const ScalarField& f, double half_width, double h);
  static GridField sample(const ScalarField& f, const GridLayout& layout);

  [[nodiscard]] long size() const { return static_cast<long>(values.size()); }
  /// Central difference along `axis`, one-sided on the faces.
  [[nodiscard]] GridField partial(int axis) const;
  [[nodiscard]] GridField zeros_like() const {
    GridField g = *this;
    std::fill(g.values.begin(), g.values.end(), 0.0);
    return g;
  }
  void validate() const;
};

struct GridMask : GridLayout {
  std::vector<std::uint8_t> on;

  [[nodiscard]] long size() const { return static_cast<long>(on.size()); }
  [[nodiscard]] long count_on() const;
};

}  // namespace nqd
