#include "geovar/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "geovar/errors.hpp"
#include "geovar/hyperbolicity.hpp"
#include "geovar/index_form.hpp"
#include "geovar/jacobi.hpp"
#include "geovar/perturbation.hpp"
#include "geovar/rng.hpp"
#include "geovar/spline.hpp"

namespace geovar {

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Vecd parse_list(const std::string& value, int line) {
  Vecd out;
  std::string cleaned(value);
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      require(used == tok.size(), ErrorKind::ParseError,
              "line " + std::to_string(line) + ": bad number '" + tok + "'");
      out.push_back(v);
    } catch (const std::invalid_argument&) {
      fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": bad number '" + tok + "'");
    }
  }
  return out;
}

double parse_scalar(const std::string& v, int line) {
  Vecd lst = parse_list(v, line);
  require(lst.size() == 1, ErrorKind::ParseError,
          "line " + std::to_string(line) + ": expected a single number");
  return lst[0];
}

int parse_int(const std::string& v, int line) {
  double d = parse_scalar(v, line);
  int i = static_cast<int>(std::llround(d));
  require(std::abs(d - i) < 1e-12, ErrorKind::ParseError,
          "line " + std::to_string(line) + ": expected an integer");
  return i;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": expected true/false");
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  Scenario sc;
  std::istringstream ss(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool saw_any = false;
  bool saw_name = false;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = raw;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    saw_any = true;
    if (s.front() == '[') {
      require(s.back() == ']', ErrorKind::ParseError,
              origin + " line " + std::to_string(line) + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"scenario",     "metric", "endpoints",     "grid",
                                    "perturbation", "sweep",  "outputs",       "conformal",
                                    "hyperbolicity", "stationary"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      require(ok, ErrorKind::ValidationError,
              origin + " line " + std::to_string(line) + ": unknown section [" + section + "]");
      if (section == "conformal") sc.run_conformal = true;
      if (section == "hyperbolicity") sc.run_hyperbolicity = true;
      if (section == "stationary") sc.run_stationary = true;
      continue;
    }
    std::size_t eq = s.find('=');
    require(eq != std::string::npos, ErrorKind::ParseError,
            origin + " line " + std::to_string(line) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    require(!section.empty(), ErrorKind::ParseError,
            origin + " line " + std::to_string(line) + ": key outside any section");

    auto unknown = [&]() {
      fail(ErrorKind::ValidationError, origin + " line " + std::to_string(line) +
                                           ": unknown key '" + key + "' in [" + section + "]");
    };
    if (section == "scenario") {
      if (key == "name") {
        sc.name = value;
        saw_name = true;
      } else if (key == "seed")
        sc.seed = static_cast<std::uint64_t>(parse_scalar(value, line));
      else
        unknown();
    } else if (section == "metric") {
      MetricDecl& d = sc.metric;
      if (key == "kind") d.kind = value;
      else if (key == "dim") d.dim = parse_int(value, line);
      else if (key == "theta_margin") d.theta_margin = parse_scalar(value, line);
      else if (key == "n1") d.n1 = parse_int(value, line);
      else if (key == "n2") d.n2 = parse_int(value, line);
      else if (key == "c1") d.c1 = parse_scalar(value, line);
      else if (key == "c2") d.c2 = parse_scalar(value, line);
      else if (key == "n0") d.n0 = parse_int(value, line);
      else if (key == "beta_kind") d.beta_kind = value;
      else if (key == "beta_params") d.beta_params = parse_list(value, line);
      else if (key == "base_kind") d.base_kind = value;
      else if (key == "base_dim") d.base_dim = parse_int(value, line);
      else if (key == "base_theta_margin") d.base_theta_margin = parse_scalar(value, line);
      else if (key == "psi_kind") d.psi_kind = value;
      else if (key == "psi_params") d.psi_params = parse_list(value, line);
      else if (key == "sigma_geom") d.sigma_geom = value;
      else if (key == "sigma_dim") d.sigma_dim = parse_int(value, line);
      else if (key == "alpha_kind") d.alpha_kind = value;
      else if (key == "alpha_params") d.alpha_params = parse_list(value, line);
      else if (key == "ab_beta_kind") d.ab_beta_kind = value;
      else if (key == "ab_beta_params") d.ab_beta_params = parse_list(value, line);
      else if (key == "base_point") d.base_point = parse_list(value, line);
      else if (key == "sigma_lo") d.sigma_lo = parse_list(value, line);
      else if (key == "sigma_hi") d.sigma_hi = parse_list(value, line);
      else if (key == "s_halfwidth") d.s_halfwidth = parse_scalar(value, line);
      else unknown();
    } else if (section == "endpoints") {
      if (key == "p") sc.p = parse_list(value, line);
      else if (key == "q") sc.q = parse_list(value, line);
      else if (key == "v_guess") sc.v_guess = parse_list(value, line);
      else if (key == "allow_equal") sc.allow_equal = parse_bool(value, line);
      else unknown();
    } else if (section == "grid") {
      if (key == "m") sc.m = parse_int(value, line);
      else if (key == "kernel_tol") sc.kernel_tol = parse_scalar(value, line);
      else if (key == "spatial_tol") sc.spatial_tol = parse_scalar(value, line);
      else if (key == "quadrature_tol") sc.quadrature_tol = parse_scalar(value, line);
      else if (key == "shoot_tol") sc.shoot_tol = parse_scalar(value, line);
      else unknown();
    } else if (section == "perturbation") {
      if (key == "class") sc.pert_class = value;
      else if (key == "candidates") sc.candidates = parse_int(value, line);
      else unknown();
    } else if (section == "sweep") {
      if (key == "eps") sc.eps_list = parse_list(value, line);
      else unknown();
    } else if (section == "outputs") {
      if (key == "dir") sc.out_dir = value;
      else unknown();
    } else if (section == "conformal") {
      if (key == "count") sc.conformal_count = parse_int(value, line);
      else unknown();
    } else if (section == "hyperbolicity") {
      if (key == "grid_n") sc.hyp_grid_n = parse_int(value, line);
      else if (key == "n_max") sc.hyp_n_max = parse_int(value, line);
      else unknown();
    } else if (section == "stationary") {
      if (key == "count") sc.stationary_count = parse_int(value, line);
      else unknown();
    }
  }
  require(saw_any, ErrorKind::ParseError, origin + ": empty scenario file");
  require(saw_name, ErrorKind::ValidationError, origin + ": [scenario] name is required");
  require(!sc.metric.kind.empty(), ErrorKind::ValidationError,
          origin + ": [metric] kind is required");
  require(sc.kernel_tol > 0 && sc.spatial_tol > 0 && sc.quadrature_tol > 0 && sc.shoot_tol > 0,
          ErrorKind::ValidationError, origin + ": tolerances must be positive");
  if (!sc.p.empty() && !sc.q.empty() && !sc.allow_equal) {
    Vecd d = vsub(sc.p, sc.q);
    require(vnorm(d) > 0.0, ErrorKind::ValidationError,
            origin + ": p == q requires allow_equal (distinct endpoints assumption)");
  }
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  return parse_scenario_text(read_text_file(path), path);
}

ScalarPtr build_scalar(const std::string& kind, const Vecd& params, int dim) {
  if (kind == "constant") {
    require(params.size() == 1, ErrorKind::ValidationError, "constant scalar needs one param");
    return scalar_constant(dim, params[0]);
  }
  if (kind == "quadratic") {
    require(static_cast<int>(params.size()) == 1 + dim ||
                static_cast<int>(params.size()) == 1 + 2 * dim,
            ErrorKind::ValidationError, "quadratic scalar needs c0 + dim coefficients");
    Vecd a(params.begin() + 1, params.begin() + 1 + dim);
    Vecd p(dim, 0.0);
    if (static_cast<int>(params.size()) == 1 + 2 * dim)
      p.assign(params.begin() + 1 + dim, params.end());
    return scalar_quadratic(params[0], a, p);
  }
  if (kind == "cosine") {
    require(params.size() == 5, ErrorKind::ValidationError,
            "cosine scalar needs c0, amp, axis, freq, phase");
    return scalar_cosine(dim, params[0], params[1], static_cast<int>(params[2]), params[3],
                         params[4]);
  }
  fail(ErrorKind::ValidationError, "unknown scalar kind '" + kind + "'");
}

AlphaBetaPair build_alpha_beta(const MetricDecl& d) {
  AlphaBetaPair pair;
  pair.sigma_dim = d.sigma_dim;
  if (d.sigma_geom == "flat") pair.geom = AlphaBetaPair::SigmaGeom::FlatLine;
  else if (d.sigma_geom == "circle") pair.geom = AlphaBetaPair::SigmaGeom::Circle;
  else fail(ErrorKind::ValidationError, "unknown sigma_geom '" + d.sigma_geom + "'");
  if (d.alpha_kind == "identity") pair.alpha_kind = AlphaBetaPair::AlphaKind::Identity;
  else if (d.alpha_kind == "const-diag") pair.alpha_kind = AlphaBetaPair::AlphaKind::ConstDiag;
  else if (d.alpha_kind == "cos-isotropic") pair.alpha_kind = AlphaBetaPair::AlphaKind::CosIsotropic;
  else if (d.alpha_kind == "one-plus-dist2") pair.alpha_kind = AlphaBetaPair::AlphaKind::OnePlusDist2;
  else fail(ErrorKind::ValidationError, "unknown alpha_kind '" + d.alpha_kind + "'");
  pair.alpha_params = d.alpha_params;
  if (d.ab_beta_kind == "const") pair.beta_kind = AlphaBetaPair::BetaKind::Const;
  else if (d.ab_beta_kind == "one-plus-s2") pair.beta_kind = AlphaBetaPair::BetaKind::OnePlusS2;
  else if (d.ab_beta_kind == "exp-dist2") pair.beta_kind = AlphaBetaPair::BetaKind::ExpDist2;
  else fail(ErrorKind::ValidationError, "unknown ab_beta_kind '" + d.ab_beta_kind + "'");
  pair.beta_params = d.ab_beta_params;
  pair.base_point = d.base_point.empty() ? Vecd(d.sigma_dim, 0.0) : d.base_point;
  pair.sigma_box.lo = d.sigma_lo.empty() ? Vecd(d.sigma_dim, -3.0) : d.sigma_lo;
  pair.sigma_box.hi = d.sigma_hi.empty() ? Vecd(d.sigma_dim, 3.0) : d.sigma_hi;
  pair.s_halfwidth = d.s_halfwidth;
  return pair;
}

MetricFamily build_metric(const MetricDecl& d) {
  if (d.kind == "flat-euclidean") return MetricFamily::flat_euclidean(d.dim);
  if (d.kind == "minkowski") return MetricFamily::minkowski(d.dim);
  if (d.kind == "round-sphere-chart") return MetricFamily::round_sphere_chart(d.theta_margin);
  if (d.kind == "lorentz-cylinder") return MetricFamily::lorentz_cylinder(d.theta_margin);
  if (d.kind == "split-product") return MetricFamily::split_product(d.n1, d.n2, d.c1, d.c2);
  if (d.kind == "standard-stationary") {
    require(!d.beta_params.empty(), ErrorKind::ValidationError,
            "standard-stationary needs beta_params");
    return MetricFamily::standard_stationary(d.n0, build_scalar(d.beta_kind, d.beta_params, d.n0));
  }
  if (d.kind == "g-alpha-beta") return build_galphabeta(build_alpha_beta(d));
  if (d.kind == "conformal-rescale") {
    MetricDecl base;
    base.kind = d.base_kind;
    base.dim = d.base_dim;
    base.theta_margin = d.base_theta_margin;
    MetricFamily bm = build_metric(base);
    return MetricFamily::conformal_rescale(bm, build_scalar(d.psi_kind, d.psi_params, bm.dim()));
  }
  fail(ErrorKind::ValidationError, "unknown metric kind '" + d.kind + "'");
}

namespace {

OJson scenario_echo(const Scenario& sc) {
  OJson j;
  j["name"] = sc.name;
  j["seed"] = sc.seed;
  OJson m;
  m["kind"] = sc.metric.kind;
  m["dim"] = sc.metric.dim;
  if (sc.metric.kind == "split-product") {
    m["n1"] = sc.metric.n1;
    m["n2"] = sc.metric.n2;
    m["c1"] = sc.metric.c1;
    m["c2"] = sc.metric.c2;
  }
  if (sc.metric.kind == "standard-stationary") {
    m["n0"] = sc.metric.n0;
    m["beta_kind"] = sc.metric.beta_kind;
    m["beta_params"] = sc.metric.beta_params;
  }
  if (sc.metric.kind == "conformal-rescale") {
    m["base_kind"] = sc.metric.base_kind;
    m["psi_kind"] = sc.metric.psi_kind;
    m["psi_params"] = sc.metric.psi_params;
  }
  if (sc.metric.kind == "g-alpha-beta") {
    m["sigma_geom"] = sc.metric.sigma_geom;
    m["sigma_dim"] = sc.metric.sigma_dim;
    m["alpha_kind"] = sc.metric.alpha_kind;
    m["alpha_params"] = sc.metric.alpha_params;
    m["ab_beta_kind"] = sc.metric.ab_beta_kind;
    m["ab_beta_params"] = sc.metric.ab_beta_params;
  }
  j["metric"] = m;
  j["p"] = sc.p;
  j["q"] = sc.q;
  j["v_guess"] = sc.v_guess;
  j["allow_equal"] = sc.allow_equal;
  j["m"] = sc.m;
  j["kernel_tol"] = sc.kernel_tol;
  j["spatial_tol"] = sc.spatial_tol;
  j["quadrature_tol"] = sc.quadrature_tol;
  j["shoot_tol"] = sc.shoot_tol;
  j["perturbation_class"] = sc.pert_class;
  j["candidates"] = sc.candidates;
  j["eps_list"] = sc.eps_list;
  return j;
}

const char* causal_character(double energy) {
  if (std::abs(energy) <= 1e-10) return "lightlike";
  return energy < 0.0 ? "timelike" : "spacelike";
}

struct PipelineState {
  std::optional<DiscretizedCurve> curve;
  Vecd v0;
  OJson findings = OJson::array();
  OJson skipped = OJson::array();
};

void record_finding(PipelineState& st, const std::string& stage, const Error& e) {
  OJson f;
  f["stage"] = stage;
  f["error"] = error_kind_name(e.kind());
  f["message"] = e.what();
  st.findings.push_back(f);
}

// conjugate-endpoint fallback: shoot to a nearby offset target, bisecting the
// offset toward the degenerate configuration
OJson fallback_shoot(const MetricFamily& metric, const Scenario& sc, PipelineState& st) {
  OJson fb;
  DiscretizedCurve probe = integrate_geodesic(metric, sc.p, sc.v_guess, sc.m);
  // the guess may already solve the problem exactly (vertical geodesics);
  // then the degenerate configuration itself is analyzed, no offset needed
  {
    double res0 = vnorm(metric.wrapped_delta(probe.pos(sc.m), sc.q));
    if (res0 <= 10.0 * sc.shoot_tol) {
      st.curve = probe;
      st.v0 = sc.v_guess;
      fb["offset"] = 0.0;
      fb["residual"] = res0;
      return fb;
    }
  }
  Mat A1 = endpoint_matrix(metric, probe, 1.0);
  SvdResult sv = svd(A1);
  Vecd dir(metric.dim());
  for (int i = 0; i < metric.dim(); ++i) dir[i] = sv.u(i, 0);
  ShootOptions opts;
  opts.allow_equal = sc.allow_equal;
  double delta = 1e-3;
  std::optional<ShootResult> best;
  double best_delta = 0.0;
  for (int grow = 0; grow < 4 && !best; ++grow) {
    Vecd qd = sc.q;
    vaxpy_inplace(delta, dir, qd);
    try {
      best = shoot_bvp(metric, sc.p, qd, sc.v_guess, sc.m, sc.shoot_tol, opts);
      best_delta = delta;
    } catch (const Error&) {
      delta *= 2.0;
    }
  }
  require(best.has_value(), ErrorKind::NoConvergence, "offset fallback failed to converge");
  // bisect toward the degenerate endpoint, with a floor that keeps the
  // configuration inside the re-shoot convergence envelope of the sweep
  const double delta_floor = 2.5e-4;
  while (best_delta / 2.0 >= delta_floor) {
    double half = best_delta / 2.0;
    Vecd qd = sc.q;
    vaxpy_inplace(half, dir, qd);
    try {
      ShootResult sr = shoot_bvp(metric, sc.p, qd, best->v0, sc.m, sc.shoot_tol, opts);
      best = sr;
      best_delta = half;
    } catch (const Error&) {
      break;
    }
  }
  st.curve = best->curve;
  st.v0 = best->v0;
  fb["offset"] = best_delta;
  fb["offset_direction"] = dir;
  fb["residual"] = best->residual;
  return fb;
}

}  // namespace

OJson run_pipeline(const Scenario& sc_in, const RunOverrides& ov) {
  Scenario sc = sc_in;
  if (ov.seed) sc.seed = *ov.seed;
  if (ov.m) sc.m = *ov.m;
  if (ov.eps_list) sc.eps_list = *ov.eps_list;
  if (ov.out_dir) sc.out_dir = *ov.out_dir;

  auto t_start = std::chrono::steady_clock::now();
  OJson rep;
  rep["schema_version"] = "1.0";
  OJson art;
  art["name"] = "geovar";
  art["version"] = kArtifactVersion;
  rep["artifact"] = art;
  rep["scenario"] = scenario_echo(sc);
  rep["seed"] = sc.seed;

  MetricFamily metric = build_metric(sc.metric);
  Rng rng(sc.seed);
  PipelineState st;
  const double conj_tol = 1e-4;

  // ---- geodesic stage ----
  OJson geo;
  if (!sc.p.empty() && !sc.q.empty()) {
    ShootOptions opts;
    opts.allow_equal = sc.allow_equal;
    try {
      ShootResult sr = shoot_bvp(metric, sc.p, sc.q, sc.v_guess, sc.m, sc.shoot_tol, opts);
      st.curve = sr.curve;
      st.v0 = sr.v0;
      geo["converged"] = true;
      geo["iterations"] = sr.iterations;
      geo["residual"] = sr.residual;
      geo["fallback"] = nullptr;
    } catch (const Error& e) {
      record_finding(st, "geodesic", e);
      if (e.kind() == ErrorKind::SingularEndpointJacobian) {
        try {
          OJson fb = fallback_shoot(metric, sc, st);
          geo["converged"] = true;
          geo["fallback"] = fb;
        } catch (const Error& e2) {
          record_finding(st, "geodesic-fallback", e2);
          geo["converged"] = false;
        }
      } else {
        geo["converged"] = false;
      }
    }
  }
  if (st.curve) {
    geo["v0"] = st.v0;
    geo["energy"] = st.curve->energy;
    geo["causal_character"] = causal_character(st.curve->energy);
    geo["energy_drift"] = energy_drift(metric, *st.curve);
    geo["geodesic_residual"] = geodesic_residual(metric, *st.curve);
  }
  rep["geodesic"] = geo;

  // ---- conjugate points ----
  if (st.curve) {
    OJson cj;
    cj["events"] = OJson::array();
    try {
      ConjugateReport cr = conjugate_points(metric, *st.curve, conj_tol);
      for (const auto& ev : cr.events) {
        OJson e;
        e["t_star"] = ev.t_star;
        e["multiplicity"] = ev.multiplicity;
        e["sigma_min"] = ev.sigma_min;
        cj["events"].push_back(e);
      }
    } catch (const Error& e) {
      record_finding(st, "conjugate", e);
    }
    rep["conjugate"] = cj;
  }

  // ---- index form + kernel ----
  std::optional<KernelResult> kr;
  std::optional<IndexFormMatrix> ifm;
  if (st.curve) {
    OJson idx;
    try {
      PathBasis basis{sc.m, metric.dim()};
      MetricFamily gR = MetricFamily::flat_euclidean(metric.dim());
      ifm = assemble_index_form(metric, gR, *st.curve, basis);
      FredholmReport fr = fredholm_split_check(*ifm);
      kr = kernel(*ifm, metric, *st.curve, sc.kernel_tol);
      idx["dim"] = basis.dim();
      idx["kernel_dimension"] = kr->dimension;
      Vecd lambdas, cosines;
      for (const auto& f : kr->fields) {
        lambdas.push_back(f.lambda);
        cosines.push_back(f.jacobi_cosine);
      }
      idx["kernel_lambdas"] = lambdas;
      idx["jacobi_cosines"] = cosines;
      idx["min_abs_lambda"] = kr->min_abs_lambda;
      OJson fj;
      fj["split_residual"] = fr.split_residual;
      fj["e_zero"] = fr.e_zero;
      fj["fitted_exponent"] = fr.fitted_exponent;
      idx["fredholm"] = fj;
    } catch (const Error& e) {
      record_finding(st, "index-form", e);
    }
    rep["index_form"] = idx;
  }

  // ---- surjectivity + sweep ----
  if (kr && kr->dimension > 0) {
    PerturbationClass cls = PerturbationClass::General;
    if (sc.pert_class == "conformal") cls = PerturbationClass::Conformal;
    else if (sc.pert_class == "split") cls = PerturbationClass::Split;
    else if (sc.pert_class == "stationary") cls = PerturbationClass::Stationary;
    else if (sc.pert_class != "general")
      fail(ErrorKind::ValidationError, "unknown perturbation class '" + sc.pert_class + "'");
    try {
      std::vector<JacobiSolution> kernel_fields;
      for (const auto& f : kr->fields) kernel_fields.push_back(f.reconstruction);
      std::vector<PerturbationField> cands = generate_candidates(
          metric, *st.curve, kernel_fields, cls, sc.candidates, rng, 0.05, sc.spatial_tol);
      SurjectivityReport sj =
          surjectivity_criterion(kernel_fields, cands, metric, *st.curve, sc.quadrature_tol);
      OJson sjj;
      OJson cmeta = OJson::array();
      for (const auto& cand : cands) {
        OJson cj;
        cj["class"] = perturbation_class_name(cand.cls);
        cj["interval"] = Vecd{cand.interval_a, cand.interval_b};
        cj["tube_radius"] = cand.tube_radius;
        cmeta.push_back(cj);
      }
      sjj["candidates"] = cmeta;
      sjj["overall"] = sj.overall == OverallVerdict::Transversal  ? "transversal"
                       : sj.overall == OverallVerdict::Obstructed ? "obstructed"
                                                                  : "empty-kernel";
      sjj["threshold"] = sj.threshold;
      OJson rows = OJson::array();
      for (auto rv : sj.rows)
        rows.push_back(rv == RowVerdict::Certified ? "certified" : "obstructed");
      sjj["rows"] = rows;
      OJson pmat = OJson::array();
      for (std::size_t i = 0; i < sj.pairings.rows(); ++i) {
        Vecd row(sj.pairings.row(i), sj.pairings.row(i) + sj.pairings.cols());
        pmat.push_back(row);
      }
      sjj["pairings"] = pmat;
      rep["surjectivity"] = sjj;

      if (!sc.eps_list.empty() && !cands.empty()) {
        // sweep along the first certified candidate
        std::size_t pick = 0;
        for (std::size_t j = 0; j < cands.size(); ++j) {
          bool any = false;
          for (std::size_t i = 0; i < sj.pairings.rows(); ++i)
            any = any || std::abs(sj.pairings(i, j)) > sj.threshold;
          if (any) {
            pick = j;
            break;
          }
        }
        std::vector<SweepRow> rows2 =
            break_degeneracy_sweep(metric, *st.curve, cands[pick], sc.eps_list, sc.kernel_tol);
        OJson sw = OJson::array();
        for (const auto& r : rows2) {
          OJson rj;
          rj["eps"] = r.eps;
          rj["kernel_dim"] = r.kernel_dim;
          rj["min_abs_lambda"] = r.min_abs_lambda;
          rj["reshoot_residual"] = r.reshoot_residual;
          rj["reshoot_failed"] = r.reshoot_failed;
          sw.push_back(rj);
        }
        rep["sweep"] = sw;
      }
    } catch (const Error& e) {
      record_finding(st, "perturbation", e);
    }
  } else if (st.curve) {
    st.skipped.push_back("surjectivity");
    st.skipped.push_back("sweep");
  }

  // ---- optional conformal comparison (lightlike scenarios) ----
  if (sc.run_conformal && st.curve) {
    OJson cf;
    cf["runs"] = OJson::array();
    try {
      double worst = 0.0;
      for (int k = 0; k < sc.conformal_count; ++k) {
        double amp = 0.1 + 0.2 * rng.uniform();
        double phase = 6.283185307179586 * rng.uniform();
        ScalarPtr psi = scalar_cosine(metric.dim(), 1.0, amp, 0, 1.0, phase);
        ConformalCompareReport cc =
            conformal_conjugate_compare(metric, psi, sc.p, st.v0, sc.m, conj_tol);
        OJson run;
        run["psi_amp"] = amp;
        run["psi_phase"] = phase;
        run["base_event_count"] = cc.base_events.events.size();
        run["conf_event_count"] = cc.conf_events.events.size();
        run["max_image_mismatch"] = cc.max_mismatch;
        run["counts_match"] = cc.counts_match;
        cf["runs"].push_back(run);
        worst = std::max(worst, cc.max_mismatch);
      }
      cf["max_image_mismatch"] = worst;
    } catch (const Error& e) {
      record_finding(st, "conformal", e);
    }
    rep["conformal"] = cf;
  }

  // ---- optional hyperbolicity check ----
  if (sc.run_hyperbolicity) {
    OJson hy;
    try {
      AlphaBetaPair pair = build_alpha_beta(sc.metric);
      HyperbolicityReport hr = hyperbolicity_check(pair, sc.hyp_grid_n, sc.hyp_n_max);
      OJson strips = OJson::array();
      for (const auto& s : hr.strips) {
        OJson row;
        row["n"] = s.n;
        row["sup_ratio"] = s.sup_ratio;
        strips.push_back(row);
      }
      hy["strips"] = strips;
      hy["eps_realized"] = hr.eps_realized;
      hy["b_realized"] = hr.b_realized;
      hy["nested_sups"] = hr.nested_sups;
      hy["flagged_unbounded"] = hr.flagged_unbounded;
      hy["verdict"] =
          hr.satisfied_on_sample ? "criterion-satisfied-on-sample" : "flagged-unbounded";
      SeminormEstimates se = seminorms(pair, std::min(sc.hyp_grid_n, 13), 2.0);
      OJson sn;
      sn["C0"] = se.C0;
      sn["C1"] = se.C1;
      sn["C2"] = se.C2;
      sn["D0"] = se.D0;
      sn["D1"] = se.D1;
      sn["D2"] = se.D2;
      hy["seminorms"] = sn;
    } catch (const Error& e) {
      record_finding(st, "hyperbolicity", e);
    }
    rep["hyperbolicity"] = hy;
  }

  // ---- optional stationary battery ----
  double battery_seconds = 0.0;
  if (sc.run_stationary) {
    try {
      OJson b = stationary_battery(sc, sc.m, 2 * sc.m, sc.stationary_count);
      battery_seconds = b["elapsed_seconds"].get<double>();
      b.erase("elapsed_seconds");  // volatile fields live under "timing"
      rep["stationary"] = b;
    } catch (const Error& e) {
      record_finding(st, "stationary", e);
    }
  }

  rep["findings"] = st.findings;
  rep["stages_skipped"] = st.skipped;
  auto t_end = std::chrono::steady_clock::now();
  OJson tim;
  tim["total_seconds"] = std::chrono::duration<double>(t_end - t_start).count();
  if (sc.run_stationary) tim["stationary_seconds"] = battery_seconds;
  rep["timing"] = tim;
  return rep;
}

OJson stationary_battery(const Scenario& sc, int m_lo, int m_hi, int pert_count) {
  auto t_start = std::chrono::steady_clock::now();
  require(sc.metric.kind == "standard-stationary", ErrorKind::ValidationError,
          "stationary battery needs a standard-stationary scenario");
  MetricFamily metric = build_metric(sc.metric);
  int n0 = metric.stationary_base_dim();
  ScalarPtr beta = build_scalar(sc.metric.beta_kind, sc.metric.beta_params, n0);
  Vecd x0(n0, 0.0);
  if (!sc.p.empty())
    x0.assign(sc.p.begin(), sc.p.begin() + n0);

  OJson out;
  out["m_lo"] = m_lo;
  out["m_hi"] = m_hi;

  StationaryIndexForm lo = stationary_index_form(*beta, x0, m_lo);
  StationaryIndexForm hi = stationary_index_form(*beta, x0, m_hi);
  EigResult eig_lo = sym_eig_generalized(lo.xi_A, lo.xi_G);
  EigResult eig_hi = sym_eig_generalized(hi.xi_A, hi.xi_G);
  auto min_abs = [](const Vecd& v) {
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) < best) {
        best = std::abs(v[i]);
        arg = i;
      }
    return std::pair<double, std::size_t>(best, arg);
  };
  auto [lam_lo, arg_lo] = min_abs(eig_lo.values);
  auto [lam_hi, arg_hi] = min_abs(eig_hi.values);
  out["xi_lambda_lo"] = lam_lo;
  out["xi_lambda_hi"] = lam_hi;
  out["xi_lambda_ratio"] = lam_hi > 0 ? lam_lo / lam_hi : 0.0;
  // cosine similarity of the near-kernel vector with sin(2 pi t)
  {
    int nb = m_lo - 1;
    double dot = 0.0, na = 0.0, nbn = 0.0;
    for (int i = 0; i < nb; ++i) {
      double t = static_cast<double>(i + 1) / m_lo;
      double ref = std::sin(2.0 * 3.141592653589793 * t);
      double val = eig_lo.vectors(i * n0 + 0, arg_lo);
      dot += ref * val;
      na += ref * ref;
      nbn += val * val;
    }
    out["kernel_cosine"] = std::abs(dot) / std::sqrt(na * nbn);
  }
  EigResult eig_sigma = sym_eig_generalized(lo.sigma_A, lo.sigma_G);
  out["sigma_block_min_abs_lambda"] = min_abs(eig_sigma.values).first;

  // vertical geodesic and the exact kernel field (sin 2 pi t, 0)
  Vecd p(x0);
  p.push_back(0.0);
  Vecd v0(n0, 0.0);
  v0.push_back(1.0);
  DiscretizedCurve curve = integrate_geodesic(metric, p, v0, m_lo);
  JacobiSolution V;
  V.m = m_lo;
  V.n = n0 + 1;
  V.grid = curve.grid;
  V.J = Mat(m_lo + 1, n0 + 1, 0.0);
  V.DJ = Mat(m_lo + 1, n0 + 1, 0.0);
  const double twopi = 6.283185307179586;
  for (int i = 0; i <= m_lo; ++i) {
    double t = curve.grid[i];
    V.J(i, 0) = std::sin(twopi * t);
    V.DJ(i, 0) = twopi * std::cos(twopi * t);
  }
  V.J0 = V.j(0);
  V.DJ0 = V.dj(0);

  Rng rng(sc.seed);
  double max_abs_pairing = 0.0, max_cert1 = 0.0, max_cert2 = 0.0;
  Vecd values;
  for (int k = 0; k < pert_count; ++k) {
    StationaryComponents comp = random_stationary_components(n0, x0, rng);
    StationaryPairingResult pr = stationary_family_pairing(comp, metric, curve, V);
    values.push_back(pr.value);
    max_abs_pairing = std::max(max_abs_pairing, std::abs(pr.value));
    max_cert1 = std::max(max_cert1, pr.cert_endpoint);
    max_cert2 = std::max(max_cert2, pr.cert_integral);
  }
  OJson pj;
  pj["count"] = pert_count;
  pj["max_abs_pairing"] = max_abs_pairing;
  pj["max_cert_endpoint"] = max_cert1;
  pj["max_cert_integral"] = max_cert2;
  pj["values"] = values;
  out["stationary_pairings"] = pj;

  // an s-dependent bump certifies against the same kernel field
  SupportIntervalResult si = support_interval(metric, curve, V, 0.05, sc.spatial_tol);
  double a = si.a, b = si.b;
  Vecd xmid = curve_eval(metric, curve, 0.5 * (a + b)).x;
  Vecd vmid = curve_eval(metric, curve, 0.5 * (a + b)).v;
  Vecd w = matvec(metric.eval(xmid), vmid);
  double c0 = vdot(w, vmid);
  double amp = 1.0 / ((b - a) * 0.45714285714285713 * std::max(c0 * c0, 0.25));
  KProfile K = [=, n = n0 + 1](double t) {
    double s = (t - a) / (b - a);
    double f = amp * bump_profile(s);
    Mat kk(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) kk(i, j) = f * w[i] * w[j];
    return kk;
  };
  PerturbationField bump = bump_tensor(
      metric, curve, a, b, [&V](double t) { return jacobi_interp_J(V, t); }, K, 0.1);
  out["general_bump_pairing"] = transversality_pairing(bump, metric, curve, V);
  out["general_bump_interval"] = Vecd{a, b};

  auto t_end = std::chrono::steady_clock::now();
  out["elapsed_seconds"] = std::chrono::duration<double>(t_end - t_start).count();
  return out;
}

std::vector<std::string> emit_report(const OJson& report, const std::string& out_dir,
                                     const std::string& format) {
  std::vector<std::string> files;
  std::string base = out_dir.empty() ? std::string(".") : out_dir;
  std::string jpath = base + "/report.json";
  write_text_file(jpath, dump_json(report));
  files.push_back(jpath);
  if (format == "csv") {
    char buf[64];
    auto fmt = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    if (report.contains("surjectivity") && report["surjectivity"].contains("pairings")) {
      std::string csv = "kernel_index,candidate_index,pairing\n";
      const auto& pm = report["surjectivity"]["pairings"];
      for (std::size_t i = 0; i < pm.size(); ++i)
        for (std::size_t j = 0; j < pm[i].size(); ++j)
          csv += std::to_string(i) + "," + std::to_string(j) + "," +
                 fmt(pm[i][j].get<double>()) + "\n";
      std::string path = base + "/verdict_matrix.csv";
      write_text_file(path, csv);
      files.push_back(path);
    }
    if (report.contains("sweep")) {
      std::string csv = "eps,kernel_dim,min_abs_lambda,reshoot_residual,reshoot_failed\n";
      for (const auto& r : report["sweep"]) {
        csv += fmt(r["eps"].get<double>()) + "," + std::to_string(r["kernel_dim"].get<int>()) +
               "," + fmt(r["min_abs_lambda"].get<double>()) + "," +
               fmt(r["reshoot_residual"].get<double>()) + "," +
               (r["reshoot_failed"].get<bool>() ? "true" : "false") + "\n";
      }
      std::string path = base + "/sweep.csv";
      write_text_file(path, csv);
      files.push_back(path);
    }
    if (report.contains("hyperbolicity") && report["hyperbolicity"].contains("strips")) {
      std::string csv = "strip_n,sup_ratio\n";
      for (const auto& s : report["hyperbolicity"]["strips"])
        csv += std::to_string(s["n"].get<int>()) + "," + fmt(s["sup_ratio"].get<double>()) + "\n";
      csv += "summary," + fmt(report["hyperbolicity"]["eps_realized"].get<double>()) + "," +
             fmt(report["hyperbolicity"]["b_realized"].get<double>()) + "," +
             report["hyperbolicity"]["verdict"].get<std::string>() + "\n";
      std::string path = base + "/hyperbolicity.csv";
      write_text_file(path, csv);
      files.push_back(path);
    }
  }
  return files;
}

std::vector<std::string> list_scenarios(const std::string& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".scn") out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace geovar
