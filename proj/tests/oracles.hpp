#pragma once
// Independent oracles used across the test suites. Everything here computes
// expected values by brute force (finite differences, quadrature, closed
// forms) without touching the implementation paths under test.

#include <cmath>
#include <functional>

#include "geovar/geodesic.hpp"
#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"

namespace oracles {

using geovar::ChristoffelData;
using geovar::Mat;
using geovar::MetricFamily;
using geovar::Vecd;

// central finite difference of the metric value in direction k
inline Mat fd_metric_deriv(const MetricFamily& g, const Vecd& x, int k, double h = 1e-5) {
  Vecd xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  Mat gp = g.eval(xp);
  Mat gm = g.eval(xm);
  Mat out = gp;
  out -= gm;
  out *= 1.0 / (2.0 * h);
  return out;
}

// central finite difference of the analytic first derivative
inline Mat fd_metric_deriv2(const MetricFamily& g, const Vecd& x, int k, int l,
                            double h = 1e-4) {
  Vecd xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  std::vector<Mat> dgp, dgm;
  g.derivatives(xp, 1, dgp, nullptr);
  g.derivatives(xm, 1, dgm, nullptr);
  Mat out = dgp[l];
  out -= dgm[l];
  out *= 1.0 / (2.0 * h);
  return out;
}

// Koszul formula with finite-difference metric derivatives
inline ChristoffelData fd_koszul(const MetricFamily& g, const Vecd& x, double h = 1e-5) {
  int n = g.dim();
  std::vector<Mat> dg(n);
  for (int k = 0; k < n; ++k) dg[k] = fd_metric_deriv(g, x, k, h);
  geovar::Lu lu(g.eval(x));
  ChristoffelData ch;
  ch.point = x;
  ch.gamma.assign(n, Mat(n, n, 0.0));
  Vecd rhs(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) rhs[i] = 0.5 * (dg[j](i, k) + dg[k](i, j) - dg[i](j, k));
      Vecd gam = lu.solve(rhs);
      for (int i = 0; i < n; ++i) ch.gamma[i](j, k) = gam[i];
    }
  return ch;
}

// curvature from finite differences of the implementation's Christoffels
inline double fd_curvature_entry(const MetricFamily& g, const Vecd& x, int i, int j, int k,
                                 int l, double h = 1e-5) {
  auto gamma_at = [&](const Vecd& y) { return g.christoffel(y); };
  Vecd xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  double dk = (gamma_at(xp).gamma[i](l, j) - gamma_at(xm).gamma[i](l, j)) / (2.0 * h);
  xp = x;
  xm = x;
  xp[l] += h;
  xm[l] -= h;
  double dl = (gamma_at(xp).gamma[i](k, j) - gamma_at(xm).gamma[i](k, j)) / (2.0 * h);
  ChristoffelData ch = gamma_at(x);
  double quad = 0.0;
  for (int m = 0; m < g.dim(); ++m)
    quad += ch.gamma[i](k, m) * ch.gamma[m](l, j) - ch.gamma[i](l, m) * ch.gamma[m](k, j);
  return dk - dl + quad;
}

// ---- sphere chart closed forms ----

// chart (theta, phi) -> R^3 on the unit sphere
inline Vecd sphere_embed(const Vecd& x) {
  return {std::sin(x[0]) * std::cos(x[1]), std::sin(x[0]) * std::sin(x[1]), std::cos(x[0])};
}

// tangent push-forward
inline Vecd sphere_embed_tangent(const Vecd& x, const Vecd& v) {
  double st = std::sin(x[0]), ct = std::cos(x[0]);
  double sp = std::sin(x[1]), cp = std::cos(x[1]);
  return {ct * cp * v[0] - st * sp * v[1], ct * sp * v[0] + st * cp * v[1], -st * v[0]};
}

// exact great-circle endpoint in chart coordinates (assumes the result stays
// away from the poles and in the phi branch near the start)
inline Vecd great_circle_chart(const Vecd& x0, const Vecd& v0, double t) {
  Vecd P = sphere_embed(x0);
  Vecd W = sphere_embed_tangent(x0, v0);
  double w = std::sqrt(geovar::vdot(W, W));
  Vecd pt(3);
  for (int i = 0; i < 3; ++i)
    pt[i] = std::cos(w * t) * P[i] + (w > 0 ? std::sin(w * t) * W[i] / w : 0.0);
  double theta = std::acos(std::max(-1.0, std::min(1.0, pt[2])));
  double phi = std::atan2(pt[1], pt[0]);
  return {theta, phi};
}

// ---- adaptive Simpson quadrature ----

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 28);
}

}  // namespace oracles
