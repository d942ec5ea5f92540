#pragma once
// Orthogonally split metrics on Sigma x R: construction, least-eigenvalue
// field, the sampled sufficient criterion for global hyperbolicity, and the
// seminorm estimates of the ambient Banach norm.

#include <cstdint>
#include <vector>

#include "geovar/alpha_beta.hpp"
#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"
#include "geovar/rng.hpp"

namespace geovar {

// validates positivity of alpha and beta on a sample grid, then wraps the
// pair as a metric family of index 1
MetricFamily build_galphabeta(const AlphaBetaPair& pair);

struct LambdaMin {
  double value = 0.0;        // smallest eigenvalue of alpha
  double via_inverse = 0.0;  // 1 / ||alpha^{-1}||
};

LambdaMin lambda_min_alpha(const AlphaBetaPair& pair, const Vecd& x, double s);

struct StripRow {
  int n = 0;
  double sup_ratio = 0.0;  // sampled sup of sqrt(beta / (lambda (1 + d0^2)))
};

struct HyperbolicityReport {
  std::vector<StripRow> strips;
  double eps_realized = 0.0;  // sampled inf of lambda (1 + d0^2)
  double b_realized = 0.0;    // sampled sup of beta
  Vecd nested_sups;           // sup over nested Sigma boxes (growth diagnostic)
  bool flagged_unbounded = false;
  bool satisfied_on_sample = false;
};

HyperbolicityReport hyperbolicity_check(const AlphaBetaPair& pair, int grid_n, int n_max);

struct SeminormEstimates {
  double C0 = 0.0, C1 = 0.0, C2 = 0.0;  // alpha seminorms
  double D0 = 0.0, D1 = 0.0, D2 = 0.0;  // beta seminorms
};

// sampled suprema; derivative norms are Frobenius over all components in the
// flat chart connection
SeminormEstimates seminorms(const AlphaBetaPair& pair, int grid_n, double s_halfwidth);

struct LipschitzReport {
  int samples = 0;
  int violations = 0;
  double max_ratio = 0.0;  // max |lam(A)-lam(B)| / ||A-B||
};

// |lambda_*(A) - lambda_*(B)| <= ||A - B|| for random symmetric pairs, plus
// the lambda_min variant on SPD pairs
LipschitzReport lambda_lipschitz_property(int samples, std::uint64_t seed);

}  // namespace geovar
