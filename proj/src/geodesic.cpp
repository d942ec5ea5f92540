#include "geovar/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "geovar/errors.hpp"

namespace geovar {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::PointOutsideDomain: return "point-outside-domain";
    case ErrorKind::OrderUnsupportedForFamily: return "order-unsupported-for-family";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::LeftDomain: return "left-domain";
    case ErrorKind::StepCountTooSmall: return "step-count-too-small";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::SingularEndpointJacobian: return "singular-endpoint-jacobian";
    case ErrorKind::NoIntervalFound: return "no-interval-found";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::NotPeriodic: return "not-periodic";
    case ErrorKind::NotCriticalPoint: return "not-critical-point";
    case ErrorKind::NotLightlike: return "not-lightlike";
    case ErrorKind::NotAGeodesic: return "not-a-geodesic";
    case ErrorKind::NotJacobi: return "not-jacobi";
    case ErrorKind::NotVertical: return "not-vertical";
    case ErrorKind::TubeIntersectsCurve: return "tube-intersects-curve";
    case ErrorKind::VParallel: return "v-parallel";
    case ErrorKind::BothVelocitiesVanish: return "both-velocities-vanish";
    case ErrorKind::AlphaNotPositive: return "alpha-not-positive";
    case ErrorKind::BetaNotPositive: return "beta-not-positive";
    case ErrorKind::EndpointsEqual: return "endpoints-equal";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::ValidationError: return "validation-error";
    case ErrorKind::IoError: return "io-error";
    case ErrorKind::Internal: return "internal-error";
  }
  return "unknown-error";
}

namespace {

struct GeoRhs {
  const MetricFamily& metric;
  // dx = v, dv = -Gamma(v,v)
  void operator()(const Vecd& x, const Vecd& v, Vecd& dx, Vecd& dv) const {
    ChristoffelData ch = metric.christoffel(x);
    dx = v;
    dv = vscale(-1.0, christoffel_vv(ch, v, v));
  }
};

}  // namespace

DiscretizedCurve integrate_geodesic(const MetricFamily& metric, const Vecd& x0, const Vecd& v0,
                                    int m) {
  require(m >= 16, ErrorKind::StepCountTooSmall, "need at least 16 steps");
  require(metric.in_domain(x0), ErrorKind::PointOutsideDomain, "x0 outside chart domain");
  int n = metric.dim();
  DiscretizedCurve c;
  c.m = m;
  c.n = n;
  c.grid.resize(m + 1);
  c.positions = Mat(m + 1, n);
  c.velocities = Mat(m + 1, n);
  c.periods = metric.periods();
  c.energy = metric.scalar_g(x0, v0, v0);

  GeoRhs rhs{metric};
  Vecd x = x0, v = v0;
  double h = 1.0 / m;
  Vecd k1x(n), k1v(n), k2x(n), k2v(n), k3x(n), k3v(n), k4x(n), k4v(n), xt(n), vt(n);
  for (int i = 0; i <= m; ++i) {
    c.grid[i] = static_cast<double>(i) / m;
    for (int a = 0; a < n; ++a) {
      c.positions(i, a) = x[a];
      c.velocities(i, a) = v[a];
    }
    if (i == m) break;
    try {
      rhs(x, v, k1x, k1v);
      for (int a = 0; a < n; ++a) {
        xt[a] = x[a] + 0.5 * h * k1x[a];
        vt[a] = v[a] + 0.5 * h * k1v[a];
      }
      rhs(xt, vt, k2x, k2v);
      for (int a = 0; a < n; ++a) {
        xt[a] = x[a] + 0.5 * h * k2x[a];
        vt[a] = v[a] + 0.5 * h * k2v[a];
      }
      rhs(xt, vt, k3x, k3v);
      for (int a = 0; a < n; ++a) {
        xt[a] = x[a] + h * k3x[a];
        vt[a] = v[a] + h * k3v[a];
      }
      rhs(xt, vt, k4x, k4v);
    } catch (const Error& e) {
      // a stage point past the wall means the trajectory is exiting
      if (e.kind() == ErrorKind::PointOutsideDomain)
        fail(ErrorKind::LeftDomain, "trajectory left the chart domain");
      throw;
    }
    for (int a = 0; a < n; ++a) {
      x[a] += h / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
      v[a] += h / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
    }
    require(metric.in_domain(x), ErrorKind::LeftDomain, "trajectory left the chart domain");
  }
  return c;
}

CurvePoint curve_eval(const MetricFamily& metric, const DiscretizedCurve& c, double t) {
  int m = c.m, n = c.n;
  if (t <= 0.0) return {c.pos(0), c.vel(0)};
  if (t >= 1.0) return {c.pos(m), c.vel(m)};
  int i = std::min(static_cast<int>(t * m), m - 1);
  double h = 1.0 / m;
  double u = (t - c.grid[i]) * m;  // in [0,1]
  Vecd x0 = c.pos(i), x1 = c.pos(i + 1);
  Vecd v0 = c.vel(i), v1 = c.vel(i + 1);
  // Hermite basis
  double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
  double h10 = u * (1.0 - u) * (1.0 - u);
  double h01 = u * u * (3.0 - 2.0 * u);
  double h11 = u * u * (u - 1.0);
  // nodal accelerations for the velocity Hermite
  Vecd a0 = vscale(-1.0, christoffel_vv(metric.christoffel(x0), v0, v0));
  Vecd a1 = vscale(-1.0, christoffel_vv(metric.christoffel(x1), v1, v1));
  CurvePoint out;
  out.x.resize(n);
  out.v.resize(n);
  for (int a = 0; a < n; ++a) {
    out.x[a] = h00 * x0[a] + h10 * h * v0[a] + h01 * x1[a] + h11 * h * v1[a];
    out.v[a] = h00 * v0[a] + h10 * h * a0[a] + h01 * v1[a] + h11 * h * a1[a];
  }
  return out;
}

Vecd fd_weights_first(double z, const Vecd& nodes) {
  // Fornberg recursion, first-derivative row
  std::size_t nn = nodes.size();
  std::vector<Vecd> c(nn, Vecd(2, 0.0));  // c[j][k], k = derivative order 0..1
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < nn; ++i) {
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  Vecd w(nn);
  for (std::size_t j = 0; j < nn; ++j) w[j] = c[j][1];
  return w;
}

namespace {

// sixth-order first derivative of a nodal array at node i
Vecd fd6_deriv(const Mat& values, int i, int m, double h) {
  int stencil = 7;
  int i0 = std::clamp(i - 3, 0, m + 1 - stencil);
  Vecd nodes(stencil);
  for (int k = 0; k < stencil; ++k) nodes[k] = (i0 + k - i) * h;
  Vecd w = fd_weights_first(0.0, nodes);
  int n = static_cast<int>(values.cols());
  Vecd d(n, 0.0);
  for (int k = 0; k < stencil; ++k)
    for (int a = 0; a < n; ++a) d[a] += w[k] * values(i0 + k, a);
  return d;
}

}  // namespace

double geodesic_residual(const MetricFamily& metric, const DiscretizedCurve& c) {
  double h = 1.0 / c.m;
  double worst = 0.0;
  for (int i = 0; i <= c.m; ++i) {
    Vecd dx = fd6_deriv(c.positions, i, c.m, h);
    Vecd dv = fd6_deriv(c.velocities, i, c.m, h);
    Vecd x = c.pos(i), v = c.vel(i);
    Vecd gvv = christoffel_vv(metric.christoffel(x), v, v);
    for (int a = 0; a < c.n; ++a) {
      worst = std::max(worst, std::abs(dx[a] - v[a]));
      worst = std::max(worst, std::abs(dv[a] + gvv[a]));
    }
  }
  return worst;
}

double energy_drift(const MetricFamily& metric, const DiscretizedCurve& c) {
  double worst = 0.0;
  for (int i = 0; i <= c.m; ++i) {
    Vecd x = c.pos(i), v = c.vel(i);
    worst = std::max(worst, std::abs(metric.scalar_g(x, v, v) - c.energy));
  }
  return worst;
}

namespace {

// local refinement of a candidate crossing by Gauss-Newton on
// f(s,t) = 1/2 |gamma(s) - gamma(t)|^2 (wrapped)
bool refine_pair(const MetricFamily& metric, const DiscretizedCurve& c, double& s, double& t,
                 double& dist) {
  for (int it = 0; it < 40; ++it) {
    CurvePoint ps = curve_eval(metric, c, s);
    CurvePoint pt = curve_eval(metric, c, t);
    Vecd d = metric.wrapped_delta(ps.x, pt.x);
    double g1 = vdot(d, ps.v);
    double g2 = -vdot(d, pt.v);
    double h11 = vdot(ps.v, ps.v);
    double h12 = -vdot(ps.v, pt.v);
    double h22 = vdot(pt.v, pt.v);
    double det = h11 * h22 - h12 * h12;
    if (std::abs(det) < 1e-14) break;
    double ds = -(h22 * g1 - h12 * g2) / det;
    double dt = -(-h12 * g1 + h11 * g2) / det;
    double cap = 2.0 / c.m;
    ds = std::clamp(ds, -cap, cap);
    dt = std::clamp(dt, -cap, cap);
    s = std::clamp(s + ds, 0.0, 1.0);
    t = std::clamp(t + dt, 0.0, 1.0);
    if (std::abs(ds) < 1e-12 && std::abs(dt) < 1e-12) break;
  }
  CurvePoint ps = curve_eval(metric, c, s);
  CurvePoint pt = curve_eval(metric, c, t);
  dist = vnorm(metric.wrapped_delta(ps.x, pt.x));
  return s < t;
}

}  // namespace

IntersectionReport self_intersections(const MetricFamily& metric, const DiscretizedCurve& c,
                                      double spatial_tol) {
  IntersectionReport rep;
  int m = c.m;
  // a genuine revisit requires the curve to leave the neighbourhood between
  // the two passes; otherwise slowly moving curves flag adjacent nodes
  auto excursion_ok = [&](int i, int j) {
    Vecd xi = c.pos(i);
    for (int k = 1; k < 8; ++k) {
      int r = i + (j - i) * k / 8;
      if (metric.wrapped_distance(c.pos(r), xi) > 5.0 * spatial_tol) return true;
    }
    return false;
  };
  // raw candidate node pairs
  std::vector<std::pair<int, int>> cand;
  for (int i = 0; i <= m; ++i)
    for (int j = i + 3; j <= m; ++j) {
      double d = metric.wrapped_distance(c.pos(i), c.pos(j));
      if (d <= spatial_tol && excursion_ok(i, j)) cand.emplace_back(i, j);
    }
  // cluster neighbouring candidates
  std::vector<bool> used(cand.size(), false);
  std::vector<std::pair<double, double>> reps;
  for (std::size_t a = 0; a < cand.size(); ++a) {
    if (used[a]) continue;
    // walk the cluster; keep the pair with smallest distance as representative
    std::vector<std::size_t> cluster{a};
    used[a] = true;
    for (std::size_t pos = 0; pos < cluster.size(); ++pos)
      for (std::size_t b = 0; b < cand.size(); ++b) {
        if (used[b]) continue;
        if (std::abs(cand[cluster[pos]].first - cand[b].first) <= 2 &&
            std::abs(cand[cluster[pos]].second - cand[b].second) <= 2) {
          used[b] = true;
          cluster.push_back(b);
        }
      }
    double best = 1e300;
    std::pair<int, int> bestp = cand[cluster[0]];
    for (std::size_t idx : cluster) {
      double d = metric.wrapped_distance(c.pos(cand[idx].first), c.pos(cand[idx].second));
      if (d < best) {
        best = d;
        bestp = cand[idx];
      }
    }
    reps.emplace_back(c.grid[bestp.first], c.grid[bestp.second]);
  }

  double period_best = 0.0;
  for (auto& [s0, t0] : reps) {
    double s = s0, t = t0, dist = 0.0;
    if (!refine_pair(metric, c, s, t, dist)) continue;
    if (dist > spatial_tol) continue;
    CurvePoint ps = curve_eval(metric, c, s);
    CurvePoint pt = curve_eval(metric, c, t);
    double vel_gap = vnorm(vsub(ps.v, pt.v));
    if (dist + vel_gap <= 10.0 * spatial_tol) {
      // matching position and velocity: closed geodesic, period t - s
      double T = t - s;
      if (period_best == 0.0 || T < period_best) period_best = T;
    } else {
      rep.pairs.push_back({s, t, dist});
    }
  }
  if (period_best > 0.0 && period_best < 1.0) {
    PeriodicInfo pi;
    pi.T = period_best;
    pi.k_star = static_cast<int>(std::floor((1.0 - 1e-9) / pi.T));
    pi.t_star = 1.0 - pi.k_star * pi.T;
    rep.periodic = pi;
  }
  return rep;
}

}  // namespace geovar
