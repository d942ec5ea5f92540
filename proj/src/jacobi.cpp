#include "geovar/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "geovar/errors.hpp"

namespace geovar {

namespace {

// cubic Lagrange interpolation of a nodal array on the uniform grid
Vecd interp_cubic(const Mat& values, int m, double t) {
  int n = static_cast<int>(values.cols());
  if (t <= 0.0) t = 0.0;
  if (t >= 1.0) t = 1.0;
  int i = std::min(static_cast<int>(t * m), m - 1);
  int i0 = std::clamp(i - 1, 0, m - 3);
  double u = t * m - i0;  // position in units of h relative to node i0
  double w[4];
  w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
  w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
  w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
  Vecd out(n, 0.0);
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < n; ++a) out[a] += w[k] * values(i0 + k, a);
  return out;
}

// sixth-order (6-point) Lagrange interpolation; used where quadrature floors
// matter
Vecd interp_sextic(const Mat& values, int m, double t) {
  int n = static_cast<int>(values.cols());
  if (t <= 0.0) t = 0.0;
  if (t >= 1.0) t = 1.0;
  int i = std::min(static_cast<int>(t * m), m - 1);
  int i0 = std::clamp(i - 2, 0, m - 5);
  double u = t * m - i0;
  double w[6];
  for (int k = 0; k < 6; ++k) {
    double num = 1.0, den = 1.0;
    for (int j = 0; j < 6; ++j) {
      if (j == k) continue;
      num *= u - j;
      den *= static_cast<double>(k - j);
    }
    w[k] = num / den;
  }
  Vecd out(n, 0.0);
  for (int k = 0; k < 6; ++k)
    for (int a = 0; a < n; ++a) out[a] += w[k] * values(i0 + k, a);
  return out;
}

struct StagePoint {
  ChristoffelData ch;
  Mat rq;  // Jacobi operator R(v, .) v
};

StagePoint stage_data(const MetricFamily& metric, const Vecd& x, const Vecd& v) {
  PointGeometry geo = metric.geometry(x);
  StagePoint s;
  s.ch = std::move(geo.ch);
  s.rq = jacobi_operator(geo.cu, v);
  return s;
}

// golden-section minimization
std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo, double hi,
                                     double tparam_tol) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tparam_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  double tm = 0.5 * (a + b);
  double fm = f(tm);
  // boundary values can be the true minimum (endpoint events)
  double flo = f(lo), fhi = f(hi);
  if (flo < fm) {
    tm = lo;
    fm = flo;
  }
  if (fhi < fm) {
    tm = hi;
    fm = fhi;
  }
  return {tm, fm};
}

}  // namespace

JacobiSolution jacobi_solve(const MetricFamily& metric, const DiscretizedCurve& curve,
                            const Vecd& J0, const Vecd& DJ0) {
  int n = curve.n, m = curve.m;
  require(static_cast<int>(J0.size()) == n && static_cast<int>(DJ0.size()) == n,
          ErrorKind::GridMismatch, "initial data dimension mismatch");
  require(metric.dim() == n, ErrorKind::GridMismatch, "metric dimension mismatch");

  JacobiSolution sol;
  sol.m = m;
  sol.n = n;
  sol.grid = curve.grid;
  sol.J = Mat(m + 1, n);
  sol.DJ = Mat(m + 1, n);
  sol.J0 = J0;
  sol.DJ0 = DJ0;

  // joint RK4 on (x, v, J, P): the (x,v) path retraces the geodesic
  double h = 1.0 / m;
  Vecd x = curve.pos(0), v = curve.vel(0), J = J0, P = DJ0;
  auto rhs = [&](const Vecd& xs, const Vecd& vs, const Vecd& Js, const Vecd& Ps, Vecd& dx,
                 Vecd& dv, Vecd& dJ, Vecd& dP) {
    StagePoint sp = stage_data(metric, xs, vs);
    dx = vs;
    dv = vscale(-1.0, christoffel_vv(sp.ch, vs, vs));
    Mat gv = christoffel_v(sp.ch, vs);
    // dJ = P - Gamma(v, J); dP = R(v,J)v - Gamma(v, P)
    Vecd gvJ = matvec(gv, Js);
    Vecd gvP = matvec(gv, Ps);
    Vecd rJ = matvec(sp.rq, Js);
    dJ.resize(n);
    dP.resize(n);
    for (int a = 0; a < n; ++a) {
      dJ[a] = Ps[a] - gvJ[a];
      dP[a] = rJ[a] - gvP[a];
    }
  };
  Vecd k1x, k1v, k1J, k1P, k2x, k2v, k2J, k2P, k3x, k3v, k3J, k3P, k4x, k4v, k4J, k4P;
  Vecd xt(n), vt(n), Jt(n), Pt(n);
  for (int i = 0; i <= m; ++i) {
    for (int a = 0; a < n; ++a) {
      sol.J(i, a) = J[a];
      sol.DJ(i, a) = P[a];
    }
    if (i == m) break;
    rhs(x, v, J, P, k1x, k1v, k1J, k1P);
    for (int a = 0; a < n; ++a) {
      xt[a] = x[a] + 0.5 * h * k1x[a];
      vt[a] = v[a] + 0.5 * h * k1v[a];
      Jt[a] = J[a] + 0.5 * h * k1J[a];
      Pt[a] = P[a] + 0.5 * h * k1P[a];
    }
    rhs(xt, vt, Jt, Pt, k2x, k2v, k2J, k2P);
    for (int a = 0; a < n; ++a) {
      xt[a] = x[a] + 0.5 * h * k2x[a];
      vt[a] = v[a] + 0.5 * h * k2v[a];
      Jt[a] = J[a] + 0.5 * h * k2J[a];
      Pt[a] = P[a] + 0.5 * h * k2P[a];
    }
    rhs(xt, vt, Jt, Pt, k3x, k3v, k3J, k3P);
    for (int a = 0; a < n; ++a) {
      xt[a] = x[a] + h * k3x[a];
      vt[a] = v[a] + h * k3v[a];
      Jt[a] = J[a] + h * k3J[a];
      Pt[a] = P[a] + h * k3P[a];
    }
    rhs(xt, vt, Jt, Pt, k4x, k4v, k4J, k4P);
    for (int a = 0; a < n; ++a) {
      x[a] += h / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
      v[a] += h / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
      J[a] += h / 6.0 * (k1J[a] + 2.0 * k2J[a] + 2.0 * k3J[a] + k4J[a]);
      P[a] += h / 6.0 * (k1P[a] + 2.0 * k2P[a] + 2.0 * k3P[a] + k4P[a]);
    }
  }
  return sol;
}

double jacobi_residual(const MetricFamily& metric, const DiscretizedCurve& curve,
                       const JacobiSolution& sol) {
  int m = curve.m, n = curve.n;
  double h = 1.0 / m;
  double worst = 0.0;
  auto fd6 = [&](const Mat& arr, int i) {
    int i0 = std::clamp(i - 3, 0, m + 1 - 7);
    Vecd nodes(7);
    for (int k = 0; k < 7; ++k) nodes[k] = (i0 + k - i) * h;
    Vecd w = fd_weights_first(0.0, nodes);
    Vecd d(n, 0.0);
    for (int k = 0; k < 7; ++k)
      for (int a = 0; a < n; ++a) d[a] += w[k] * arr(i0 + k, a);
    return d;
  };
  for (int i = 0; i <= m; ++i) {
    Vecd x = curve.pos(i), v = curve.vel(i);
    PointGeometry geo = metric.geometry(x);
    Mat gv = christoffel_v(geo.ch, v);
    Mat rq = jacobi_operator(geo.cu, v);
    Vecd J = sol.j(i), P = sol.dj(i);
    Vecd dJ = fd6(sol.J, i);
    Vecd dP = fd6(sol.DJ, i);
    Vecd gvJ = matvec(gv, J), gvP = matvec(gv, P), rJ = matvec(rq, J);
    for (int a = 0; a < n; ++a) {
      worst = std::max(worst, std::abs(dJ[a] + gvJ[a] - P[a]));
      worst = std::max(worst, std::abs(dP[a] + gvP[a] - rJ[a]));
    }
  }
  return worst;
}

Vecd jacobi_interp_J(const JacobiSolution& sol, double t) {
  return interp_sextic(sol.J, sol.m, t);
}
Vecd jacobi_interp_DJ(const JacobiSolution& sol, double t) {
  return interp_sextic(sol.DJ, sol.m, t);
}

EndpointTrack endpoint_track(const MetricFamily& metric, const DiscretizedCurve& curve) {
  int n = curve.n, m = curve.m;
  EndpointTrack tr;
  tr.m = m;
  tr.n = n;
  tr.A.assign(m + 1, Mat(n, n, 0.0));
  tr.P.assign(m + 1, Mat(n, n, 0.0));

  double h = 1.0 / m;
  Vecd x = curve.pos(0), v = curve.vel(0);
  Mat A(n, n, 0.0), P = Mat::identity(n);
  auto rhs = [&](const Vecd& xs, const Vecd& vs, const Mat& As, const Mat& Ps, Vecd& dx, Vecd& dv,
                 Mat& dA, Mat& dP) {
    StagePoint sp = stage_data(metric, xs, vs);
    dx = vs;
    dv = vscale(-1.0, christoffel_vv(sp.ch, vs, vs));
    Mat gv = christoffel_v(sp.ch, vs);
    dA = Ps - matmul(gv, As);
    dP = matmul(sp.rq, As) - matmul(gv, Ps);
  };
  Vecd k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
  Mat k1A, k1P, k2A, k2P, k3A, k3P, k4A, k4P;
  Vecd xt(n), vt(n);
  Mat At(n, n), Pt(n, n);
  for (int i = 0; i <= m; ++i) {
    tr.A[i] = A;
    tr.P[i] = P;
    if (i == m) break;
    rhs(x, v, A, P, k1x, k1v, k1A, k1P);
    for (int a = 0; a < n; ++a) {
      xt[a] = x[a] + 0.5 * h * k1x[a];
      vt[a] = v[a] + 0.5 * h * k1v[a];
    }
    At = A + 0.5 * h * k1A;
    Pt = P + 0.5 * h * k1P;
    rhs(xt, vt, At, Pt, k2x, k2v, k2A, k2P);
    for (int a = 0; a < n; ++a) {
      xt[a] = x[a] + 0.5 * h * k2x[a];
      vt[a] = v[a] + 0.5 * h * k2v[a];
    }
    At = A + 0.5 * h * k2A;
    Pt = P + 0.5 * h * k2P;
    rhs(xt, vt, At, Pt, k3x, k3v, k3A, k3P);
    for (int a = 0; a < n; ++a) {
      xt[a] = x[a] + h * k3x[a];
      vt[a] = v[a] + h * k3v[a];
    }
    At = A + h * k3A;
    Pt = P + h * k3P;
    rhs(xt, vt, At, Pt, k4x, k4v, k4A, k4P);
    for (int a = 0; a < n; ++a) {
      x[a] += h / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
      v[a] += h / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
    }
    A += (h / 6.0) * (k1A + 2.0 * k2A + 2.0 * k3A + k4A);
    P += (h / 6.0) * (k1P + 2.0 * k2P + 2.0 * k3P + k4P);
  }
  return tr;
}

Mat endpoint_matrix_at(const MetricFamily& metric, const DiscretizedCurve& curve,
                       const EndpointTrack& track, double t) {
  int m = curve.m, n = curve.n;
  if (t <= 0.0) return Mat(n, n, 0.0);
  int i = std::min(static_cast<int>(t * m), m - 1);
  double dt = t - curve.grid[i];
  Mat A = track.A[i], P = track.P[i];
  if (dt < 1e-15) return A;
  // one RK4 step of size dt using Hermite curve samples at the stages
  CurvePoint c0{curve.pos(i), curve.vel(i)};
  CurvePoint cm = curve_eval(metric, curve, curve.grid[i] + 0.5 * dt);
  CurvePoint c1 = curve_eval(metric, curve, curve.grid[i] + dt);
  auto deriv = [&](const CurvePoint& cp, const Mat& As, const Mat& Ps, Mat& dA, Mat& dP) {
    StagePoint sp = stage_data(metric, cp.x, cp.v);
    Mat gv = christoffel_v(sp.ch, cp.v);
    dA = Ps - matmul(gv, As);
    dP = matmul(sp.rq, As) - matmul(gv, Ps);
  };
  Mat k1A, k1P, k2A, k2P, k3A, k3P, k4A, k4P;
  deriv(c0, A, P, k1A, k1P);
  deriv(cm, A + 0.5 * dt * k1A, P + 0.5 * dt * k1P, k2A, k2P);
  deriv(cm, A + 0.5 * dt * k2A, P + 0.5 * dt * k2P, k3A, k3P);
  deriv(c1, A + dt * k3A, P + dt * k3P, k4A, k4P);
  A += (dt / 6.0) * (k1A + 2.0 * k2A + 2.0 * k3A + k4A);
  return A;
}

Mat endpoint_matrix(const MetricFamily& metric, const DiscretizedCurve& curve, double t) {
  EndpointTrack tr = endpoint_track(metric, curve);
  return endpoint_matrix_at(metric, curve, tr, t);
}

ConjugateReport conjugate_points(const MetricFamily& metric, const DiscretizedCurve& curve,
                                 double kernel_tol) {
  int m = curve.m;
  EndpointTrack tr = endpoint_track(metric, curve);
  auto rel_sigma_min = [&](double t) {
    Mat A = endpoint_matrix_at(metric, curve, tr, t);
    SvdResult s = svd(A);
    double smax = s.sigma.front();
    if (smax <= 0.0) return 1.0;
    return s.sigma.back() / smax;
  };
  Vecd f(m + 1, 1.0);
  for (int i = 1; i <= m; ++i) {
    SvdResult s = svd(tr.A[i]);
    f[i] = s.sigma.front() > 0.0 ? s.sigma.back() / s.sigma.front() : 1.0;
  }
  ConjugateReport rep;
  for (int i = 2; i <= m; ++i) {
    bool interior_min = i < m && f[i] <= f[i - 1] && f[i] <= f[i + 1];
    bool boundary_min = i == m && f[m] < f[m - 1];
    if (!interior_min && !boundary_min) continue;
    double lo = curve.grid[i - 1];
    double hi = (i < m) ? curve.grid[i + 1] : 1.0;
    auto [tstar, fstar] = golden_min(rel_sigma_min, lo, hi, 1e-8);
    if (fstar >= kernel_tol) continue;
    bool dup = false;
    for (auto& e : rep.events)
      if (std::abs(e.t_star - tstar) < 1e-6) dup = true;
    if (dup) continue;
    ConjugateEvent ev;
    ev.t_star = tstar;
    ev.sigma_min = fstar;
    Mat A = endpoint_matrix_at(metric, curve, tr, tstar);
    SvdResult s = svd(A);
    double smax = s.sigma.front();
    int n = curve.n;
    for (int k = 0; k < n; ++k) {
      if (smax <= 0.0 || s.sigma[k] / smax < kernel_tol) {
        Vecd dir(n);
        for (int a = 0; a < n; ++a) dir[a] = s.v(a, k);
        ev.kernel_directions.push_back(dir);
      }
    }
    ev.multiplicity = static_cast<int>(ev.kernel_directions.size());
    if (ev.multiplicity == 0) continue;
    rep.events.push_back(ev);
  }
  std::sort(rep.events.begin(), rep.events.end(),
            [](const ConjugateEvent& a, const ConjugateEvent& b) { return a.t_star < b.t_star; });
  return rep;
}

namespace {

// sine of the chart angle between field value and curve tangent
double sine_score(const Vecd& J, const Vecd& v) {
  double jj = vdot(J, J), vv = vdot(v, v), jv = vdot(J, v);
  double denom = std::sqrt(jj * vv);
  if (denom < 1e-300) return 0.0;
  double w2 = jj * vv - jv * jv;
  if (w2 < 0.0) w2 = 0.0;
  return std::sqrt(w2) / denom;
}

}  // namespace

ParallelLocus parallel_locus(const DiscretizedCurve& curve, const JacobiSolution& J, double tol) {
  int m = curve.m;
  ParallelLocus out;
  // wedge norm |J ^ v| (parallelogram area); a vanishing field counts as
  // parallel, so this is not normalized by |J|
  auto wedge = [](const Vecd& a, const Vecd& b) {
    double aa = vdot(a, a), bb = vdot(b, b), ab = vdot(a, b);
    return std::sqrt(std::max(0.0, aa * bb - ab * ab));
  };
  Vecd w(m + 1);
  double ref = 0.0, maxw = 0.0;
  for (int i = 0; i <= m; ++i) {
    Vecd j = J.j(i), v = curve.vel(i);
    w[i] = wedge(j, v);
    ref = std::max(ref, vnorm(j) * vnorm(v));
    maxw = std::max(maxw, w[i]);
  }
  if (ref <= 0.0 || maxw <= tol * ref) {
    out.everywhere_parallel = true;
    return out;
  }
  auto interp_wedge = [&](double t) {
    return wedge(interp_cubic(J.J, m, t), interp_cubic(curve.velocities, m, t));
  };
  double thresh = tol * ref;
  for (int i = 0; i <= m; ++i) {
    bool lo_ok = (i == 0) || w[i] <= w[i - 1];
    bool hi_ok = (i == m) || w[i] <= w[i + 1];
    if (!(lo_ok && hi_ok)) continue;
    if (w[i] > 100.0 * thresh) continue;
    double lo = (i == 0) ? 0.0 : curve.grid[i - 1];
    double hi = (i == m) ? 1.0 : curve.grid[i + 1];
    auto [tz, fz] = golden_min(interp_wedge, lo, hi, 1e-9);
    if (fz > thresh) continue;
    bool dup = false;
    for (double z : out.zeros)
      if (std::abs(z - tz) < 1e-6) dup = true;
    if (!dup) out.zeros.push_back(tz);
  }
  std::sort(out.zeros.begin(), out.zeros.end());
  return out;
}

SummedFields iterate_sum_fields(const JacobiSolution& V, double T, int k_star, double t_star) {
  require(std::abs(1.0 - (k_star * T + t_star)) <= 1e-9, ErrorKind::NotPeriodic,
          "period data inconsistent: 1 != k_star*T + t_star");
  require(k_star >= 1 && t_star > 0.0 && t_star < T, ErrorKind::NotPeriodic,
          "period data out of range");
  SummedFields out;
  auto build = [&](double a, double b, int terms) {
    FieldOnInterval f;
    f.a = a;
    f.b = b;
    f.m = std::max(8, static_cast<int>(std::lround((b - a) * V.m)));
    f.grid.resize(f.m + 1);
    f.J = Mat(f.m + 1, V.n);
    f.DJ = Mat(f.m + 1, V.n);
    for (int i = 0; i <= f.m; ++i) {
      double t = a + (b - a) * i / f.m;
      f.grid[i] = t;
      Vecd js(V.n, 0.0), ds(V.n, 0.0);
      for (int r = 0; r < terms; ++r) {
        double tr = t + r * T;
        Vecd j = interp_cubic(V.J, V.m, tr);
        Vecd d = interp_cubic(V.DJ, V.m, tr);
        for (int c = 0; c < V.n; ++c) {
          js[c] += j[c];
          ds[c] += d[c];
        }
      }
      for (int c = 0; c < V.n; ++c) {
        f.J(i, c) = js[c];
        f.DJ(i, c) = ds[c];
      }
    }
    return f;
  };
  out.W1 = build(0.0, t_star, k_star + 1);
  out.W2 = build(t_star, T, k_star);
  return out;
}

namespace {

// clearance test for a candidate interval [a,b]: every curve node whose
// (possibly wrapped) parameter is outside [a-buffer, b+buffer] must stay
// farther than the margin from the curve image over [a,b]
bool interval_clear(const MetricFamily& metric, const DiscretizedCurve& curve, double a, double b,
                    double margin, const std::optional<PeriodicInfo>& periodic) {
  int samples = std::max(8, static_cast<int>((b - a) * curve.m) * 2);
  std::vector<Vecd> image;
  image.reserve(samples + 1);
  for (int k = 0; k <= samples; ++k)
    image.push_back(curve_eval(metric, curve, a + (b - a) * k / samples).x);
  double buffer = 2.0 / curve.m;
  for (int j = 0; j <= curve.m; ++j) {
    double t = curve.grid[j];
    bool inside;
    if (periodic) {
      double u = std::fmod(t, periodic->T);
      inside = (u >= a - buffer && u <= b + buffer);
    } else {
      inside = (t >= a - buffer && t <= b + buffer);
    }
    if (inside) continue;
    Vecd x = curve.pos(j);
    for (const Vecd& y : image)
      if (metric.wrapped_distance(x, y) <= margin) return false;
  }
  return true;
}

struct IntervalSearch {
  double a = 0.0, b = 0.0;
  bool found = false;
};

IntervalSearch search_interval(const MetricFamily& metric, const DiscretizedCurve& curve,
                               const Vecd& grid, const std::vector<Vecd>& field_vals,
                               const std::vector<Vecd>& tangents, double lo, double hi,
                               double parallel_tol, double spatial_tol,
                               const std::optional<PeriodicInfo>& periodic) {
  int N = static_cast<int>(grid.size()) - 1;
  // a vanishing field counts as parallel, so the angle score gets a floor on
  // the field magnitude
  double field_ref = 0.0;
  for (int i = 0; i <= N; ++i) field_ref = std::max(field_ref, vnorm(field_vals[i]));
  Vecd score(N + 1);
  for (int i = 0; i <= N; ++i) {
    score[i] = sine_score(field_vals[i], tangents[i]);
    if (vnorm(field_vals[i]) <= 1e-3 * field_ref) score[i] = 0.0;
    if (grid[i] < lo || grid[i] > hi) score[i] = -1.0;
  }
  // centre of the longest admissible run (ties in the score are common)
  int best = -1, run_start = -1, best_len = 0;
  for (int i = 0; i <= N + 1; ++i) {
    bool ok_node = i <= N && score[i] > parallel_tol;
    if (ok_node && run_start < 0) run_start = i;
    if (!ok_node && run_start >= 0) {
      int len = i - run_start;
      if (len > best_len) {
        best_len = len;
        best = run_start + len / 2;
      }
      run_start = -1;
    }
  }
  IntervalSearch out;
  if (best < 0 || score[best] <= parallel_tol) return out;
  double step = grid[1] - grid[0];
  int max_half = std::max(2, static_cast<int>(0.2 / step));
  int half = 0;
  auto ok = [&](int w) {
    int i0 = best - w, i1 = best + w;
    if (i0 < 0 || i1 > N) return false;
    if (grid[i0] < lo || grid[i1] > hi) return false;
    for (int i = i0; i <= i1; ++i)
      if (score[i] <= parallel_tol) return false;
    return interval_clear(metric, curve, grid[i0], grid[i1], spatial_tol, periodic);
  };
  if (!ok(1)) return out;
  half = 1;
  while (half < max_half && ok(half + 1)) ++half;
  out.a = grid[best - half];
  out.b = grid[best + half];
  out.found = true;
  return out;
}

}  // namespace

SupportIntervalResult support_interval(const MetricFamily& metric, const DiscretizedCurve& curve,
                                       const JacobiSolution& V, double parallel_tol,
                                       double spatial_tol) {
  IntersectionReport inter = self_intersections(metric, curve, spatial_tol);
  double margin = 2.0 / curve.m;
  if (inter.periodic) {
    const PeriodicInfo& pi = *inter.periodic;
    SummedFields sums = iterate_sum_fields(V, pi.T, pi.k_star, pi.t_star);
    for (int which = 0; which < 2; ++which) {
      const FieldOnInterval& W = which == 0 ? sums.W1 : sums.W2;
      std::vector<Vecd> vals, tans;
      for (int i = 0; i <= W.m; ++i) {
        Vecd j(W.J.row(i), W.J.row(i) + curve.n);
        vals.push_back(j);
        tans.push_back(curve_eval(metric, curve, W.grid[i]).v);
      }
      IntervalSearch s =
          search_interval(metric, curve, W.grid, vals, tans, W.a + margin, W.b - margin,
                          parallel_tol, spatial_tol, inter.periodic);
      if (s.found) return {s.a, s.b, which == 0 ? SupportField::W1 : SupportField::W2};
    }
    fail(ErrorKind::NoIntervalFound, "no admissible interval for W1 or W2");
  }
  std::vector<Vecd> vals, tans;
  for (int i = 0; i <= curve.m; ++i) {
    vals.push_back(V.j(i));
    tans.push_back(curve.vel(i));
  }
  IntervalSearch s = search_interval(metric, curve, curve.grid, vals, tans, margin, 1.0 - margin,
                                     parallel_tol, spatial_tol, std::nullopt);
  require(s.found, ErrorKind::NoIntervalFound,
          "field is parallel to the tangent (or no clear subinterval exists)");
  return {s.a, s.b, SupportField::V};
}

StationaryJacobiResult stationary_jacobi(const ScalarFamily& beta, const Vecd& x0, int m,
                                         const Vecd& xi0, const Vecd& dxi0, double sigma0,
                                         double dsigma0) {
  int n0 = beta.dim();
  require(vnorm(beta.grad(x0)) <= 1e-10, ErrorKind::NotCriticalPoint,
          "x0 is not a critical point of beta");
  Mat H = beta.hess(x0);  // frozen at x0
  StationaryJacobiResult out;
  out.m = m;
  out.grid.resize(m + 1);
  out.xi = Mat(m + 1, n0);
  out.dxi = Mat(m + 1, n0);
  out.sigma.resize(m + 1);
  out.dsigma.resize(m + 1);
  double h = 1.0 / m;
  Vecd xi = xi0, dxi = dxi0;
  double sg = sigma0, dsg = dsigma0;
  auto acc = [&](const Vecd& q) {
    Vecd a = matvec(H, q);
    for (double& c : a) c *= -0.5;  // xi'' = -(1/2) H xi
    return a;
  };
  for (int i = 0; i <= m; ++i) {
    out.grid[i] = static_cast<double>(i) / m;
    for (int a = 0; a < n0; ++a) {
      out.xi(i, a) = xi[a];
      out.dxi(i, a) = dxi[a];
    }
    out.sigma[i] = sg;
    out.dsigma[i] = dsg;
    if (i == m) break;
    // RK4 for the linear system (sigma'' = 0 integrates exactly)
    Vecd k1x = dxi, k1v = acc(xi);
    Vecd k2x = vadd(dxi, vscale(0.5 * h, k1v)), k2v = acc(vadd(xi, vscale(0.5 * h, k1x)));
    Vecd k3x = vadd(dxi, vscale(0.5 * h, k2v)), k3v = acc(vadd(xi, vscale(0.5 * h, k2x)));
    Vecd k4x = vadd(dxi, vscale(h, k3v)), k4v = acc(vadd(xi, vscale(h, k3x)));
    for (int a = 0; a < n0; ++a) {
      xi[a] += h / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
      dxi[a] += h / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
    }
    sg += h * dsg;
  }
  return out;
}

Mat stationary_endpoint_map(const ScalarFamily& beta, const Vecd& x0, int m) {
  int n0 = beta.dim();
  Mat E(n0, n0);
  for (int c = 0; c < n0; ++c) {
    Vecd xi0(n0, 0.0), dxi0(n0, 0.0);
    dxi0[c] = 1.0;
    StationaryJacobiResult r = stationary_jacobi(beta, x0, m, xi0, dxi0);
    for (int a = 0; a < n0; ++a) E(a, c) = r.xi(m, a);
  }
  return E;
}

ConformalCompareReport conformal_conjugate_compare(const MetricFamily& base, ScalarPtr psi,
                                                   const Vecd& x0, const Vecd& v0, int m,
                                                   double kernel_tol) {
  ConformalCompareReport rep;
  DiscretizedCurve cb = integrate_geodesic(base, x0, v0, m);
  rep.base_energy = cb.energy;
  require(std::abs(cb.energy) <= 1e-10, ErrorKind::NotLightlike,
          "base geodesic is not lightlike");
  MetricFamily conf = MetricFamily::conformal_rescale(base, psi);

  // cumulative reparameterization u(t) with du/dt proportional to psi(gamma(t))
  Vecd ucum(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    double t0 = cb.grid[i], t1 = cb.grid[i + 1];
    double f0 = psi->value(cb.pos(i));
    double fm = psi->value(curve_eval(base, cb, 0.5 * (t0 + t1)).x);
    double f1 = psi->value(cb.pos(i + 1));
    ucum[i + 1] = ucum[i] + (t1 - t0) / 6.0 * (f0 + 4.0 * fm + f1);
  }
  double Z = ucum[m];
  for (double& u : ucum) u /= Z;
  auto u_of_t = [&](double t) {
    int i = std::clamp(static_cast<int>(t * m), 0, m - 1);
    double t0 = cb.grid[i], t1 = cb.grid[i + 1];
    double w = (t - t0) / (t1 - t0);
    return ucum[i] * (1.0 - w) + ucum[i + 1] * w;
  };

  Vecd v0c = vscale(Z / psi->value(x0), v0);
  DiscretizedCurve cc = integrate_geodesic(conf, x0, v0c, m);

  rep.base_events = conjugate_points(base, cb, kernel_tol);
  rep.conf_events = conjugate_points(conf, cc, kernel_tol);
  rep.counts_match = rep.base_events.events.size() == rep.conf_events.events.size();
  for (const auto& eb : rep.base_events.events) {
    double expected = u_of_t(eb.t_star);
    double best = 1e300;
    double tc = -1.0;
    for (const auto& ec : rep.conf_events.events)
      if (std::abs(ec.t_star - expected) < best) {
        best = std::abs(ec.t_star - expected);
        tc = ec.t_star;
      }
    if (tc < 0.0) continue;
    ConformalMatch mrow;
    mrow.t_base = eb.t_star;
    mrow.t_conf = tc;
    mrow.expected_conf = expected;
    Vecd xb = curve_eval(base, cb, eb.t_star).x;
    Vecd xc = curve_eval(conf, cc, tc).x;
    mrow.image_mismatch = base.wrapped_distance(xb, xc);
    rep.max_mismatch = std::max(rep.max_mismatch, mrow.image_mismatch);
    rep.matches.push_back(mrow);
  }
  return rep;
}

}  // namespace geovar
