#include "core/analysis.hpp"

#include "core/cubature.hpp"
#include "core/search.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace nqd::analysis {

namespace {

// ∫_{[0,1]^n} |x|^{2-n} dx, by rays from the corner: the radial integral of s is L²/2.
double corner_cell_weight(int n) {
  static std::array<double, kMaxDim + 1> cache{};
  static std::once_flag once[kMaxDim + 1];
  std::call_once(once[n], [n] {
    if (n == 2) {
      cache[n] = 1.0;
      return;
    }
    auto f = [](const Vec& th) {
      const double m = th.cwiseAbs().maxCoeff();
      return 0.5 / (m * m);
    };
    cache[n] = cubature::integrate_sphere(n, f, 1e-11).value / std::pow(2.0, n);
  });
  return cache[n];
}

void require_origin_node(const GridField& g) {
  const long k = g.nearest(Vec::Zero(g.dim));
  NQD_REQUIRE(g.node(k).norm() <= 1e-9 * g.h, ErrorCode::InvalidArgument, "acf: the origin must be a grid node");
}

}  // namespace

double acf_phi(const GridField& v1, const GridField& v2, double r) {
  NQD_REQUIRE(v1.same_layout(v2) && v1.size() == v1.nodes() && v2.size() == v2.nodes(), ErrorCode::DimensionMismatch,
              "acf_phi: fields live on different grids");
  const int n = v1.dim;
  NQD_REQUIRE(n >= 2, ErrorCode::InvalidArgument, "acf_phi: dimension must be at least 2");
  const double h = v1.h;
  NQD_REQUIRE(r >= 2.0 * h * std::sqrt(n), ErrorCode::InvalidArgument, "acf_phi: radius below grid resolution");
  NQD_REQUIRE(r + h * std::sqrt(n) <= v1.inradius() + 1e-12, ErrorCode::InvalidArgument,
              "acf_phi: radius exceeds the box inradius");
  require_origin_node(v1);

  // Cell range covering B_r.
  GridIndex c0{}, c1{};
  for (int a = 0; a < n; ++a) {
    c0[a] = std::max<long>(0, static_cast<long>(std::floor((-r - v1.lo[a]) / h)) - 1);
    c1[a] = std::min<long>(v1.count[a] - 2, static_cast<long>(std::ceil((r - v1.lo[a]) / h)) + 1);
  }
  const int corners = 1 << n;
  std::vector<long> offset(corners, 0);
  for (int c = 0; c < corners; ++c)
    for (int a = 0; a < n; ++a)
      if (c >> a & 1) offset[c] += v1.stride(a);

  const double half_diag = 0.5 * h * std::sqrt(n);
  const double cell_vol = std::pow(h, n);
  const double origin_w = corner_cell_weight(n) * std::pow(h, 2);
  constexpr int kSub = 8;
  double i1 = 0.0, i2 = 0.0, gmax = 0.0;

  GridIndex m = c0;
  for (;;) {
    const long base = v1.index(m);
    Vec center(n);
    bool origin_corner = true;
    for (int a = 0; a < n; ++a) {
      center[a] = v1.lo[a] + h * (static_cast<double>(m[a]) + 0.5);
      if (std::abs(std::abs(center[a]) - 0.5 * h) > 1e-9 * h) origin_corner = false;
    }
    const double dist = center.norm();
    if (dist - half_diag < r) {
      double w;
      if (origin_corner) {
        w = origin_w;
      } else if (dist + half_diag <= r) {
        w = cell_vol * std::pow(dist, 2 - n);
      } else {
        w = 0.0;
        const long total = static_cast<long>(std::pow(kSub, n));
        Vec y(n);
        for (long s = 0; s < total; ++s) {
          long t = s;
          for (int a = 0; a < n; ++a) {
            y[a] = center[a] + h * ((static_cast<double>(t % kSub) + 0.5) / kSub - 0.5);
            t /= kSub;
          }
          const double ry = y.norm();
          if (ry < r) w += std::pow(ry, 2 - n);
        }
        w *= cell_vol / static_cast<double>(total);
      }
      double g1 = 0.0, g2 = 0.0;
      for (int a = 0; a < n; ++a) {
        double d1 = 0.0, d2 = 0.0;
        for (int c = 0; c < corners; ++c) {
          const double sgn = (c >> a & 1) ? 1.0 : -1.0;
          d1 += sgn * v1.values[base + offset[c]];
          d2 += sgn * v2.values[base + offset[c]];
        }
        d1 /= (corners / 2) * h;
        d2 /= (corners / 2) * h;
        g1 += d1 * d1;
        g2 += d2 * d2;
      }
      gmax = std::max({gmax, g1, g2});
      i1 += w * g1;
      i2 += w * g2;
    }
    int a = 0;
    while (a < n && ++m[a] > c1[a]) {
      m[a] = c0[a];
      ++a;
    }
    if (a == n) break;
  }

  // Preconditions on the nodes of B_r: nonnegative, disjoint up to ε_disj = h·max|∇v|.
  const double eps = h * std::sqrt(gmax);
  for (long k = 0; k < v1.size(); ++k) {
    const double a = v1.values[k], b = v2.values[k];
    if (a == 0.0 && b == 0.0) continue;
    if (v1.node(k).norm() > r) continue;
    NQD_REQUIRE(a >= 0.0 && b >= 0.0, ErrorCode::InvalidArgument, "acf_phi: fields must be nonnegative");
    NQD_REQUIRE(std::sqrt(a * b) <= eps, ErrorCode::InvalidArgument, "acf_phi: supports are not disjoint");
  }
  const long o = v1.nearest(Vec::Zero(n));
  NQD_REQUIRE(v1.values[o] <= eps && v2.values[o] <= eps, ErrorCode::InvalidArgument,
              "acf_phi: fields must vanish at the origin");
  return i1 * i2 / std::pow(r, 4);
}

namespace {

std::pair<GridField, GridField> split_partial(const GridField& u, int axis) {
  GridField d = u.partial(axis);
  GridField p = d, q = d;
  for (long k = 0; k < d.size(); ++k) {
    p.values[k] = std::max(d.values[k], 0.0);
    q.values[k] = std::max(-d.values[k], 0.0);
  }
  return {p, q};
}

double phi_of(const GridField& u, int axis, double r) {
  const auto [p, q] = split_partial(u, axis);
  return acf_phi(p, q, r);
}

}  // namespace

AcfReport acf_monotone_report(const GridField& u, int axis, const std::vector<double>& radii, double tol_mono) {
  NQD_REQUIRE(!radii.empty(), ErrorCode::InvalidArgument, "acf: radii missing");
  NQD_REQUIRE(std::is_sorted(radii.begin(), radii.end()), ErrorCode::InvalidArgument, "acf: radii must ascend");
  NQD_REQUIRE(axis >= 0 && axis < u.dim, ErrorCode::InvalidArgument, "acf: axis out of range");
  require_origin_node(u);
  double scale = 1.0;
  for (double v : u.values) scale = std::max(scale, std::abs(v));
  const long o = u.nearest(Vec::Zero(u.dim));
  NQD_REQUIRE(std::abs(u.values[o]) <= 1e-6 * scale, ErrorCode::InvalidArgument, "acf: u must vanish at the origin");
  const auto [p, q] = split_partial(u, axis);
  NQD_REQUIRE(p.values[o] <= 1e-6 * scale && q.values[o] <= 1e-6 * scale, ErrorCode::InvalidArgument,
              "acf: the gradient of u must vanish at the origin");
  AcfReport rep;
  for (double r : radii) rep.rows.emplace_back(r, acf_phi(p, q, r));
  rep.tol_mono = tol_mono >= 0.0 ? tol_mono : 1e-3 * rep.rows.back().second;
  for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
    if (rep.rows[k + 1].second < rep.rows[k].second - rep.tol_mono) ++rep.violations;
  return rep;
}

double acf_homogeneity_check(const ScalarField& u, double rho, double r, int axis, double h) {
  NQD_REQUIRE(rho > 0.0 && r > 0.0 && h > 0.0, ErrorCode::InvalidArgument, "acf_homogeneity_check: bad scale");
  const double margin = h * (std::sqrt(u.dim) + 2.0);
  auto half = [&](double radius) { return h * std::ceil((radius + margin) / h); };
  const double lhs = phi_of(GridField::sample(u, half(r * rho), h), axis, r * rho);
  const double rhs = phi_of(GridField::sample(blowup_rescale(u, rho), half(r), h), axis, r);
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::numeric_limits<double>::min());
}

DyadicSupSeq dyadic_sup(const ScalarField& u, int jmax, std::uint64_t seed, int samples) {
  NQD_REQUIRE(jmax >= 0 && jmax <= 30, ErrorCode::InvalidArgument, "dyadic_sup: jmax must lie in 0..30");
  const int n = u.dim;
  auto absu = [&](const Vec& x) { return std::abs(u(x)); };
  DyadicSupSeq seq;
  double prev = 0.0;
  for (int j = 0; j <= jmax; ++j) {
    const double radius = std::ldexp(1.0, j);
    double s = search::sphere_max(absu, n, radius, samples, seed + j).value;
    for (const Vec& x : geometry::sample_points(geometry::Region::ball(n, radius), samples, seed + 1000 + j))
      s = std::max(s, absu(x));
    s = std::max(s, std::max(prev, absu(Vec::Zero(n))));
    prev = s;
    seq.entries.push_back({j, s, s / std::ldexp(1.0, 2 * j)});
  }
  return seq;
}

DyadicSupSeq dyadic_sup(const GridField& u, int jmax) {
  NQD_REQUIRE(jmax >= 0 && std::ldexp(1.0, jmax) <= u.inradius() + 1e-12, ErrorCode::InvalidArgument,
              "dyadic_sup: B_{2^jmax} is not covered by the grid");
  std::vector<double> sup(jmax + 1, 0.0);
  for (long k = 0; k < u.size(); ++k) {
    const double r = u.node(k).norm();
    const int j = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(r, 1e-300)) - 1e-12)));
    if (j <= jmax) sup[j] = std::max(sup[j], std::abs(u.values[k]));
  }
  DyadicSupSeq seq;
  double prev = 0.0;
  for (int j = 0; j <= jmax; ++j) {
    prev = std::max(prev, sup[j]);
    seq.entries.push_back({j, prev, prev / std::ldexp(1.0, 2 * j)});
  }
  return seq;
}

ScalarField blowup_rescale(const ScalarField& u, double rho) {
  NQD_REQUIRE(rho > 0.0 && std::isfinite(rho), ErrorCode::InvalidArgument, "blowup_rescale: rho must be positive");
  ScalarField s;
  s.dim = u.dim;
  s.tag = u.tag;
  s.value = [u, rho](const Vec& x) { return u(Vec(rho * x)) / (rho * rho); };
  s.grad = [u, rho](const Vec& x) -> Vec { return u.gradient(Vec(rho * x)) / rho; };
  return s;
}

std::vector<DecayRow> thin_blowup_decay(const geometry::DomainSpec& d, const std::vector<double>& rhos,
                                        std::uint64_t seed, int samples, double tol) {
  const int n = d.dim();
  const auto dom = std::make_shared<geometry::DomainSpec>(d);
  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const double rho = rhos[k];
    NQD_REQUIRE(rho > 0.0, ErrorCode::InvalidArgument, "thin_blowup_decay: rho must be positive");
    // Absolute tolerance tol on the normalized value.
    potential::Evaluator ev(Measure::indicator(dom), tol * rho * rho);
    auto f = [&](const Vec& x) { return std::abs(ev.value(Vec(rho * x))); };
    const double sup = search::sphere_max(f, n, 1.0, samples, seed + k).value;
    const auto pts = geometry::sample_points(geometry::Region::sphere(n, 1.0), std::max(samples, 4 * n * n), seed + 500 + k);
    std::vector<double> vals;
    for (const Vec& x : pts) vals.push_back(ev.value(Vec(rho * x)) / (rho * rho));
    double mod = 0.0;
    if (!d.is_empty()) potential::fit_quadratic(pts, vals, true, &mod);
    rows.push_back({rho, sup / (rho * rho), geometry::density_ratio_raycast(d, rho), mod});
  }
  return rows;
}

std::vector<double> log_grid(double lo_exp, double hi_exp, int count) {
  NQD_REQUIRE(count >= 2 && hi_exp > lo_exp, ErrorCode::InvalidArgument, "log_grid: bad range");
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(std::pow(10.0, lo_exp + (hi_exp - lo_exp) * k / (count - 1)));
  return out;
}

ConeFit fit_cone_expansion(const geometry::DomainSpec& k, const Vec& x0, const std::vector<double>& rhos, double tol) {
  const int n = k.dim();
  NQD_REQUIRE(std::holds_alternative<geometry::Cone>(k.shape()) || std::holds_alternative<geometry::HalfSpace>(k.shape()),
              ErrorCode::InvalidArgument, "fit_cone_expansion: domain must be a cone or a half-space");
  NQD_REQUIRE(x0.size() == n, ErrorCode::DimensionMismatch, "fit_cone_expansion: direction has the wrong dimension");
  NQD_REQUIRE(std::abs(x0.norm() - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
              "fit_cone_expansion: direction must be a unit vector");
  const auto comp = geometry::complement_of(std::make_shared<geometry::DomainSpec>(k));
  NQD_REQUIRE(std::max(geometry::depth(k, x0), geometry::depth(*comp, x0)) > 1e-3, ErrorCode::InvalidArgument,
              "fit_cone_expansion: direction lies on the boundary");
  const int m = static_cast<int>(rhos.size());
  NQD_REQUIRE(m >= 6, ErrorCode::InvalidArgument, "fit_cone_expansion: need at least 6 radii");
  const auto [mn, mx] = std::minmax_element(rhos.begin(), rhos.end());
  NQD_REQUIRE(*mn > 0.0, ErrorCode::InvalidArgument, "fit_cone_expansion: radii must be positive");
  NQD_REQUIRE(*mx / *mn >= 100.0 * (1.0 - 1e-12), ErrorCode::Singular,
              "fit_cone_expansion: radii must span two decades");

  const auto dom = std::make_shared<geometry::DomainSpec>(k);
  Eigen::MatrixXd X(m, 4);
  Eigen::VectorXd y(m), e(m);
  ConeFit fit;
  for (int i = 0; i < m; ++i) {
    const double rho = rhos[i];
    X(i, 0) = std::log(rho);
    X(i, 1) = 1.0;
    X(i, 2) = 1.0 / rho;
    X(i, 3) = 1.0 / (rho * rho);
    const auto est = potential::eval_v2_estimate(Measure::indicator(dom), Vec(rho * x0), tol * rho * rho);
    y[i] = est.value / (rho * rho);
    e[i] = est.error / (rho * rho);
    fit.samples.emplace_back(rho, y[i]);
  }
  const Eigen::VectorXd scale = X.colwise().norm().transpose();
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  NQD_REQUIRE(sv[sv.size() - 1] > 1e-10 * sv[0], ErrorCode::Singular, "fit_cone_expansion: ill-conditioned regression");
  const Eigen::VectorXd beta_s = svd.solve(y);
  const Eigen::VectorXd beta = beta_s.cwiseQuotient(scale);
  const Eigen::VectorXd res = y - X * beta;
  const double sigma2 = res.squaredNorm() / (m - 4);
  const Eigen::MatrixXd V = svd.matrixV();
  const Eigen::MatrixXd cov_s = V * sv.cwiseInverse().cwiseAbs2().asDiagonal() * V.transpose();
  // The samples carry cubature error, which is smooth in ρ rather than random; it enters
  // the coefficient uncertainty through the pseudo-inverse.
  const Eigen::MatrixXd pinv = V * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  for (int j = 0; j < 4; ++j) {
    const double prop = (pinv.row(j).transpose().cwiseProduct(e)).norm();
    fit.coeffs.push_back(beta[j]);
    fit.stderrs.push_back(std::sqrt(sigma2 * cov_s(j, j) + prop * prop) / scale[j]);
  }
  fit.log_coeff = fit.coeffs[0];
  fit.log_stderr = fit.stderrs[0];
  fit.quad_coeff = fit.coeffs[1];
  fit.quad_stderr = fit.stderrs[1];
  fit.fit_residual = res.cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace nqd::analysis
