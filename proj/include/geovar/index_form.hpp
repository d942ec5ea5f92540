#pragma once
// Discretized second variation of the geodesic action on endpoint-vanishing
// fields: hat-function assembly, kernel extraction with Jacobi-field
// cross-checks, the isomorphism-plus-compact split, and the stationary
// (vertical geodesic) block form.

#include <vector>

#include "geovar/geodesic.hpp"
#include "geovar/jacobi.hpp"
#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"
#include "geovar/scalar_family.hpp"

namespace geovar {

// piecewise-linear hat basis over interior nodes: for node i in 1..m-1 and
// direction a in 0..n-1, the field equal to e_a at node i and 0 elsewhere
struct PathBasis {
  int m = 0, n = 0;
  int dim() const { return n * (m - 1); }
  int index(int node, int dir) const { return (node - 1) * n + dir; }
};

struct IndexFormMatrix {
  PathBasis basis;
  Mat A;         // the discretized index form
  Mat G;         // auxiliary inner product (gradient form of g_R)
  Mat phi_part;  // isomorphism part: g_R(A_t D^R V, D^R W)
  Mat e_part;    // A - phi_part (derivative-free remainder)
};

// residual gate distinguishing genuine geodesics from arbitrary curves;
// looser than the integrator's own invariant because perturbed-metric data
// is only C^2 (spline-based bumps put small kinks into the measured residual)
constexpr double kGeodesicGate = 1e-4;

IndexFormMatrix assemble_index_form(const MetricFamily& metric, const MetricFamily& gR,
                                    const DiscretizedCurve& curve, const PathBasis& basis);

// pack/unpack between coefficient vectors and nodal fields (zero at the ends)
Mat unpack_field(const PathBasis& basis, const Vecd& coeffs);
Vecd pack_field(const PathBasis& basis, const Mat& nodal);

struct KernelField {
  double lambda = 0.0;
  Mat nodal;                 // (m+1) x n, ends zero
  JacobiSolution reconstruction;
  double jacobi_cosine = 0.0;      // similarity with the Jacobi reconstruction
  double endpoint_ratio = 0.0;     // |J_rec(1)| / max_t |J_rec(t)|
};

struct KernelResult {
  int dimension = 0;
  std::vector<KernelField> fields;
  double min_abs_lambda = 0.0;  // over the whole spectrum
  Vecd all_lambdas;
};

KernelResult kernel(const IndexFormMatrix& ifm, const MetricFamily& metric,
                    const DiscretizedCurve& curve, double kernel_tol);

struct FredholmReport {
  double split_residual = 0.0;  // max |A - phi - e|
  bool e_zero = false;          // e_part identically zero (bitwise)
  double fitted_exponent = 0.0; // slope of log sigma_k vs log k
  Vecd sigma;                   // G-singular values of e_part, descending
};

FredholmReport fredholm_split_check(const IndexFormMatrix& ifm);

// ---- stationary block form over variables (xi, sigma) ----

struct StationaryIndexForm {
  int m = 0, n0 = 0;
  IndexFormMatrix full;  // block-diagonal over (xi, sigma)
  Mat xi_A, xi_G;        // n0 (m-1) block
  Mat sigma_A, sigma_G;  // (m-1) block, negative definite A
};

StationaryIndexForm stationary_index_form(const ScalarFamily& beta, const Vecd& x0, int m);

// quadratic form value A[V,V] for a nodal field
double quadratic_form(const IndexFormMatrix& ifm, const Mat& nodal);

// action of the metric along a displaced curve gamma + eps V (V piecewise
// linear from nodal values), with the same quadrature as the assembly
double action_displaced(const MetricFamily& metric, const DiscretizedCurve& curve,
                        const Mat& nodalV, double eps);

// first variation dF/dgamma [V] on the fixed curve; `metric` is the metric
// being evaluated (possibly perturbed) and `base` the one that produced V's
// covariant derivative
double action_gradient(const MetricFamily& metric, const MetricFamily& base,
                       const DiscretizedCurve& curve, const JacobiSolution& V);

}  // namespace geovar
