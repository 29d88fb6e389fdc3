#pragma once

#include "core/geometry.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace nqd {

/// density·χ_support plus finitely many point masses.
struct Measure {
  int dim = 2;
  double density = 0.0;
  geometry::DomainPtr support;
  std::vector<std::pair<Vec, double>> atoms;

  static Measure indicator(geometry::DomainPtr d, double density = 1.0) {
    Measure m;
    m.dim = d->dim();
    m.density = density;
    m.support = std::move(d);
    return m;
  }
  static Measure atom(const Vec& p, double mass) {
    Measure m;
    m.dim = static_cast<int>(p.size());
    m.support = geometry::DomainSpec::empty(m.dim);
    m.atoms.emplace_back(p, mass);
    return m;
  }

  void validate() const {
    NQD_REQUIRE(dim >= 2 && dim <= kMaxDim, ErrorCode::InvalidArgument, "measure: unsupported dimension");
    NQD_REQUIRE(std::isfinite(density), ErrorCode::InvalidArgument, "measure: density must be finite");
    NQD_REQUIRE(support != nullptr, ErrorCode::InvalidArgument, "measure: support missing");
    NQD_REQUIRE(support->dim() == dim, ErrorCode::DimensionMismatch, "measure: support dimension mismatch");
    for (const auto& [p, m] : atoms) {
      NQD_REQUIRE(p.size() == dim, ErrorCode::DimensionMismatch, "measure: atom dimension mismatch");
      NQD_REQUIRE(std::isfinite(m), ErrorCode::InvalidArgument, "measure: atom mass must be finite");
    }
  }
};

}  // namespace nqd
