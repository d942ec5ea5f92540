#pragma once
// Geodesic integration (classical RK4), the two-point boundary value problem
// by shooting with Newton on the initial velocity, and self-intersection /
// periodicity classification of discretized curves.

#include <optional>
#include <vector>

#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"

namespace geovar {

struct DiscretizedCurve {
  int m = 0, n = 0;
  Vecd grid;       // t_i = i/m
  Mat positions;   // (m+1) x n
  Mat velocities;  // (m+1) x n
  double energy = 0.0;
  Vecd periods;    // copied from the metric for wrapped comparisons

  Vecd pos(int i) const { return Vecd(positions.row(i), positions.row(i) + n); }
  Vecd vel(int i) const { return Vecd(velocities.row(i), velocities.row(i) + n); }
};

DiscretizedCurve integrate_geodesic(const MetricFamily& metric, const Vecd& x0, const Vecd& v0,
                                    int m);

struct CurvePoint {
  Vecd x, v;
};
// cubic Hermite evaluation between nodes (velocities from nodal accelerations)
CurvePoint curve_eval(const MetricFamily& metric, const DiscretizedCurve& c, double t);

// max over nodes of the re-evaluated ODE residual |d/dt v + Gamma(v,v)|
// (sixth-order finite differences of the stored velocities)
double geodesic_residual(const MetricFamily& metric, const DiscretizedCurve& c);
// max_i |g(v_i,v_i) - energy|
double energy_drift(const MetricFamily& metric, const DiscretizedCurve& c);

struct ShootOptions {
  double tol = 1e-10;
  int max_iter = 50;
  double singular_rel_tol = 1e-5;  // sigma_min/sigma_max of the endpoint Jacobian
  bool allow_equal = false;
};

struct ShootResult {
  DiscretizedCurve curve;
  Vecd v0;
  int iterations = 0;
  double residual = 0.0;
};

ShootResult shoot_bvp(const MetricFamily& metric, const Vecd& p, const Vecd& q,
                      const Vecd& v_guess, int m, double tol, const ShootOptions& opts = {});

struct IntersectionPair {
  double s = 0.0, t = 0.0;
  double dist = 0.0;
};

struct PeriodicInfo {
  double T = 0.0;
  double t_star = 0.0;
  int k_star = 0;
};

struct IntersectionReport {
  std::vector<IntersectionPair> pairs;
  std::optional<PeriodicInfo> periodic;
};

IntersectionReport self_intersections(const MetricFamily& metric, const DiscretizedCurve& c,
                                      double spatial_tol);

// Fornberg finite-difference weights for the first derivative at point z
// over the given stencil nodes
Vecd fd_weights_first(double z, const Vecd& nodes);

}  // namespace geovar
