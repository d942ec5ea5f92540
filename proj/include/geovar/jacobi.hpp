#pragma once
// Jacobi fields along geodesics: solving the linearized flow, endpoint
// matrices, conjugate point detection with multiplicity, the parallel locus,
// the periodic-case summed fields, the stationary reduced system, and the
// conformal null-geodesic comparison.

#include <optional>
#include <vector>

#include "geovar/geodesic.hpp"
#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"
#include "geovar/scalar_family.hpp"

namespace geovar {

struct JacobiSolution {
  int m = 0, n = 0;
  Vecd grid;
  Mat J, DJ;  // (m+1) x n; DJ is the covariant derivative along the curve
  Vecd J0, DJ0;

  Vecd j(int i) const { return Vecd(J.row(i), J.row(i) + n); }
  Vecd dj(int i) const { return Vecd(DJ.row(i), DJ.row(i) + n); }
};

JacobiSolution jacobi_solve(const MetricFamily& metric, const DiscretizedCurve& curve,
                            const Vecd& J0, const Vecd& DJ0);

// max-node residual of the first-order structure, re-evaluated with
// sixth-order finite differences of the stored arrays
double jacobi_residual(const MetricFamily& metric, const DiscretizedCurve& curve,
                       const JacobiSolution& sol);

// cubic interpolation of (J, DJ) jointly at an off-grid parameter
Vecd jacobi_interp_J(const JacobiSolution& sol, double t);
Vecd jacobi_interp_DJ(const JacobiSolution& sol, double t);

// nodal track of the endpoint matrices A(t_i) (A(0)=0, DA(0)=I)
struct EndpointTrack {
  int m = 0, n = 0;
  std::vector<Mat> A, P;  // P = covariant derivative of A's columns
};

EndpointTrack endpoint_track(const MetricFamily& metric, const DiscretizedCurve& curve);
// off-grid evaluation by one partial RK4 step from the nearest node below
Mat endpoint_matrix_at(const MetricFamily& metric, const DiscretizedCurve& curve,
                       const EndpointTrack& track, double t);
Mat endpoint_matrix(const MetricFamily& metric, const DiscretizedCurve& curve, double t);

struct ConjugateEvent {
  double t_star = 0.0;
  int multiplicity = 0;
  double sigma_min = 0.0;  // relative to sigma_max at t_star
  std::vector<Vecd> kernel_directions;  // initial covariant derivatives
};

struct ConjugateReport {
  std::vector<ConjugateEvent> events;
};

ConjugateReport conjugate_points(const MetricFamily& metric, const DiscretizedCurve& curve,
                                 double kernel_tol);

struct ParallelLocus {
  bool everywhere_parallel = false;
  std::vector<double> zeros;  // refined parameters where J is parallel to the tangent
};

ParallelLocus parallel_locus(const DiscretizedCurve& curve, const JacobiSolution& J, double tol);

// field on a parameter subinterval, with its own uniform grid
struct FieldOnInterval {
  double a = 0.0, b = 0.0;
  int m = 0;
  Vecd grid;
  Mat J, DJ;
};

struct SummedFields {
  FieldOnInterval W1;  // on [0, t_star], sum over r = 0..k_star
  FieldOnInterval W2;  // on [t_star, T], sum over r = 0..k_star-1
};

SummedFields iterate_sum_fields(const JacobiSolution& V, double T, int k_star, double t_star);

enum class SupportField { V, W1, W2 };

struct SupportIntervalResult {
  double a = 0.0, b = 0.0;
  SupportField used = SupportField::V;
};

// subinterval I of (0,1) on which (a) the curve image over I is clear of the
// rest of the curve with margin spatial_tol and (b) the field stays
// non-parallel to the tangent (sine of the chart angle > tol); periodic
// curves go through the summed fields W1/W2
SupportIntervalResult support_interval(const MetricFamily& metric, const DiscretizedCurve& curve,
                                       const JacobiSolution& V, double parallel_tol,
                                       double spatial_tol);

// ---- stationary reduced system (vertical geodesics) ----

struct StationaryJacobiResult {
  int m = 0;
  Vecd grid;
  Mat xi, dxi;  // (m+1) x n0
  Vecd sigma, dsigma;
};

StationaryJacobiResult stationary_jacobi(const ScalarFamily& beta, const Vecd& x0, int m,
                                         const Vecd& xi0, const Vecd& dxi0, double sigma0 = 0.0,
                                         double dsigma0 = 0.0);

// reduced Dirichlet endpoint map E(1): xi'(0) -> xi(1)
Mat stationary_endpoint_map(const ScalarFamily& beta, const Vecd& x0, int m);

// ---- conformal comparison for lightlike geodesics ----

struct ConformalMatch {
  double t_base = 0.0;   // event parameter under g
  double t_conf = 0.0;   // event parameter under psi g
  double expected_conf = 0.0;  // image of t_base under the reparameterization
  double image_mismatch = 0.0; // chart distance between the two image points
};

struct ConformalCompareReport {
  double base_energy = 0.0;
  ConjugateReport base_events, conf_events;
  std::vector<ConformalMatch> matches;
  double max_mismatch = 0.0;
  bool counts_match = false;
};

ConformalCompareReport conformal_conjugate_compare(const MetricFamily& base, ScalarPtr psi,
                                                   const Vecd& x0, const Vecd& v0, int m,
                                                   double kernel_tol);

}  // namespace geovar
