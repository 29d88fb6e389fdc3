#pragma once

#include "core/cubature.hpp"
#include "core/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

namespace nqd::search {

struct SphereMax {
  double value;
  Vec point;
};

/// max of f over {|x| = radius}: seeded random starts plus ±axes, refined by a shrinking
/// tangent-step hill climb from the best few starts.
inline SphereMax sphere_max(const std::function<double(const Vec&)>& f, int n, double radius, int samples,
                            std::uint64_t seed, int climbs = 4) {
  std::vector<std::pair<double, Vec>> starts;
  for (int i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      Vec x = s * radius * unit_vec(n, i);
      starts.emplace_back(f(x), x);
    }
  for (const Vec& x : geometry::sample_points(geometry::Region::sphere(n, radius), samples, seed))
    starts.emplace_back(f(x), x);
  std::stable_sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  SphereMax best{starts.front().first, starts.front().second};
  const int k = std::min<int>(climbs, static_cast<int>(starts.size()));
  for (int c = 0; c < k; ++c) {
    double fv = starts[c].first;
    Vec x = starts[c].second;
    for (double step = 0.25; step > 1e-9;) {
      bool moved = false;
      const Mat frame = cubature::frame_with_first_axis(x);
      for (int j = 1; j < n && !moved; ++j)
        for (double s : {step, -step}) {
          Vec y = std::cos(step) * x + (s > 0 ? 1.0 : -1.0) * std::sin(step) * radius * Vec(frame.col(j));
          y *= radius / y.norm();
          const double fy = f(y);
          if (fy > fv) {
            fv = fy;
            x = y;
            moved = true;
            break;
          }
        }
      if (!moved) step *= 0.5;
    }
    if (fv > best.value) best = {fv, x};
  }
  return best;
}

}  // namespace nqd::search
