#pragma once
// Scenario files and the pipeline runner: parse the declaration, build the
// metric, then shoot -> conjugate points -> index form -> kernel ->
// surjectivity -> sweep, with stage-failure isolation and reproducibility
// metadata in every report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geovar/alpha_beta.hpp"
#include "geovar/linalg.hpp"
#include "geovar/metric.hpp"
#include "geovar/report.hpp"

namespace geovar {

struct MetricDecl {
  std::string kind;
  int dim = 2;
  double theta_margin = 0.15;
  // split-product
  int n1 = 1, n2 = 1;
  double c1 = 0.0, c2 = 0.0;
  // standard-stationary
  int n0 = 1;
  std::string beta_kind = "quadratic";
  Vecd beta_params;  // quadratic: c0 then the per-axis coefficients (center 0)
  // conformal-rescale
  std::string base_kind;
  int base_dim = 2;
  double base_theta_margin = 0.15;
  std::string psi_kind = "constant";
  Vecd psi_params;
  // g-alpha-beta
  std::string sigma_geom = "flat";
  int sigma_dim = 1;
  std::string alpha_kind = "identity";
  Vecd alpha_params;
  std::string ab_beta_kind = "const";
  Vecd ab_beta_params;
  Vecd base_point;
  Vecd sigma_lo, sigma_hi;
  double s_halfwidth = 6.0;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  MetricDecl metric;
  Vecd p, q, v_guess;
  bool allow_equal = false;
  int m = 64;
  double kernel_tol = 1e-2;
  double spatial_tol = 1e-2;
  double quadrature_tol = 1e-9;
  double shoot_tol = 1e-10;
  std::string pert_class = "general";
  int candidates = 1;
  Vecd eps_list;
  std::string out_dir = "out";
  // optional scenario blocks
  bool run_conformal = false;
  int conformal_count = 3;
  bool run_hyperbolicity = false;
  int hyp_grid_n = 25;
  int hyp_n_max = 4;
  bool run_stationary = false;
  int stationary_count = 20;
};

Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin);

MetricFamily build_metric(const MetricDecl& decl);
ScalarPtr build_scalar(const std::string& kind, const Vecd& params, int dim);
AlphaBetaPair build_alpha_beta(const MetricDecl& decl);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> m;
  std::optional<Vecd> eps_list;
  std::optional<std::string> out_dir;
};

// full pipeline; never throws for stage findings (they are recorded), only
// for configuration problems
OJson run_pipeline(const Scenario& sc, const RunOverrides& ov = {});

// emit report.json plus the CSV tables into sc.out_dir; returns file list
std::vector<std::string> emit_report(const OJson& report, const std::string& out_dir,
                                     const std::string& format);

std::vector<std::string> list_scenarios(const std::string& dir);

// the fully explicit stationary battery (also used by the `counterexample`
// subcommand): near-kernel extraction, refinement ratio, seeded stationary
// pairings, and one s-dependent bump certification
OJson stationary_battery(const Scenario& sc, int m_lo, int m_hi, int pert_count);

}  // namespace geovar
