#pragma once
// Compactly supported metric perturbations with prescribed behavior along a
// geodesic arc, the transversality pairing, the finite-dimensional
// surjectivity criterion, and degeneracy-breaking sweeps.

#include <functional>
#include <string>
#include <optional>
#include <vector>

#include "geovar/geodesic.hpp"
#include "geovar/index_form.hpp"
#include "geovar/jacobi.hpp"
#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"
#include "geovar/rng.hpp"
#include "geovar/scalar_family.hpp"
#include "geovar/tensor_family.hpp"

namespace geovar {

enum class PerturbationClass { General, Conformal, Split, Stationary };

const char* perturbation_class_name(PerturbationClass c);

struct PerturbationField {
  PerturbationClass cls = PerturbationClass::General;
  TensorPtr tensor;  // the actual symmetric (0,2) family with two derivatives
  Box support_box;   // h and dh vanish exactly outside
  Vecd periods;      // chart identifications baked into the evaluation
  double interval_a = 0.0, interval_b = 0.0;
  double tube_radius = 0.0;
  ScalarPtr conformal_psi;  // set for the conformal class

  Mat value(const Vecd& x) const { return tensor->value(x); }
  bool in_support_box(const Vecd& x) const;
};

// time profile of the prescribed covariant derivative K_t along the arc
using KProfile = std::function<Mat(double t)>;

// field values along the curve used for the transversal-sheet construction
using FieldAlongCurve = std::function<Vecd(double t)>;

// General bump: h vanishes on gamma(I) and has directional derivative K_t
// along the field V over I; compact support in a tube of radius tube_radius.
PerturbationField bump_tensor(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                              double b, const FieldAlongCurve& V, const KProfile& K,
                              double tube_radius);

// Block-diagonal bump for a split-product chart: K has only factor blocks.
PerturbationField split_bump(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                             double b, const FieldAlongCurve& V, const KProfile& K1,
                             const KProfile& K2, double tube_radius);

// Conformal bump psi . g0: psi has a plateau value on the middle of the arc
// and prescribed field derivative alpha(t) over I.
PerturbationField conformal_bump(const MetricFamily& metric, const DiscretizedCurve& curve,
                                 double a, double b, const FieldAlongCurve& V,
                                 const std::function<double(double)>& alpha, double tube_radius);

// Stationary-class field on the (x, s) chart: s-independent components
// (hmat, rho, zeta), each compactly supported in x.
struct StationaryComponents {
  int n0 = 0;
  std::vector<std::vector<ScalarPtr>> hmat;  // n0 x n0, symmetric usage
  std::vector<ScalarPtr> rho;                // n0
  ScalarPtr zeta;
};

PerturbationField stationary_field(const StationaryComponents& comp, Vecd x_support_lo,
                                   Vecd x_support_hi);

// int_0^1 h(gdot, DV) + 1/2 grad h(V, gdot, gdot) dt with the flat chart
// connection (DV is the plain parameter derivative of V)
double transversality_pairing(const PerturbationField& h, const MetricFamily& metric,
                              const DiscretizedCurve& curve, const JacobiSolution& V);

struct MixedDerivativeReport {
  double analytic = 0.0;
  double finite_difference = 0.0;
  double rel_error = 0.0;
};

MixedDerivativeReport pairing_is_mixed_derivative_check(const PerturbationField& h,
                                                        const MetricFamily& metric,
                                                        const DiscretizedCurve& curve,
                                                        const JacobiSolution& V, double eps);

struct ConformalPairingResult {
  double direct = 0.0;       // Levi-Civita connection route
  double closed_form = 0.0;  // 1/2 g(gdot,gdot) int V(psi) dt
  double agreement = 0.0;    // |direct - closed_form|
};

ConformalPairingResult conformal_pairing(const ScalarFamily& psi, const MetricFamily& metric,
                                         const DiscretizedCurve& curve, const JacobiSolution& V);

struct StationaryPairingResult {
  double value = 0.0;
  double cert_endpoint = 0.0;  // |g(rho(x0), xi(1) - xi(0))|
  double cert_integral = 0.0;  // |g(grad zeta(x0), int xi dt)|
};

StationaryPairingResult stationary_family_pairing(const StationaryComponents& comp,
                                                  const MetricFamily& metric,
                                                  const DiscretizedCurve& curve,
                                                  const JacobiSolution& V);

enum class RowVerdict { Certified, Obstructed };
enum class OverallVerdict { Transversal, Obstructed, EmptyKernel };

struct SurjectivityReport {
  Mat pairings;  // kernel x candidate
  std::vector<RowVerdict> rows;
  OverallVerdict overall = OverallVerdict::EmptyKernel;
  double threshold = 0.0;
};

SurjectivityReport surjectivity_criterion(const std::vector<JacobiSolution>& kernel_fields,
                                          const std::vector<PerturbationField>& candidates,
                                          const MetricFamily& metric,
                                          const DiscretizedCurve& curve, double quadrature_tol);

struct SweepRow {
  double eps = 0.0;
  int kernel_dim = 0;
  double min_abs_lambda = 0.0;
  double reshoot_residual = 0.0;
  bool reshoot_failed = false;
  std::string error;  // error kind and message when the re-shoot failed
};

std::vector<SweepRow> break_degeneracy_sweep(const MetricFamily& metric,
                                             const DiscretizedCurve& curve,
                                             const PerturbationField& h, const Vecd& eps_list,
                                             double kernel_tol, const ShootOptions& opts = {});

// Default candidate generation: one bump per kernel field on its own support
// interval plus optional seeded extras.
std::vector<PerturbationField> generate_candidates(const MetricFamily& metric,
                                                   const DiscretizedCurve& curve,
                                                   const std::vector<JacobiSolution>& kernel_fields,
                                                   PerturbationClass cls, int count, Rng& rng,
                                                   double parallel_tol, double spatial_tol);

// Seeded stationary components alive at x0 (rho(x0) and grad zeta(x0) nonzero).
StationaryComponents random_stationary_components(int n0, const Vecd& x0, Rng& rng);

}  // namespace geovar
