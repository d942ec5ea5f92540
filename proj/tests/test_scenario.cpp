// Scenario parsing, metric building, pipeline behavior, report emission,
// and determinism.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "geovar/errors.hpp"
#include "geovar/scenario.hpp"

using namespace geovar;

namespace {

const char* kFlatScenario = R"(
# comment line
[scenario]
name = flat-inline
seed = 11

[metric]
kind = flat-euclidean
dim = 2

[endpoints]
p = 0, 0
q = 1, 1
v_guess = 0.9, 1.2

[grid]
m = 32
kernel_tol = 1e-2
spatial_tol = 0.02
quadrature_tol = 1e-9

[perturbation]
class = general
candidates = 1

[outputs]
dir = out/flat-inline
)";

}  // namespace

TEST_CASE("scenario parsing: fields and defaults") {
  Scenario sc = parse_scenario_text(kFlatScenario, "inline");
  CHECK(sc.name == "flat-inline");
  CHECK(sc.seed == 11);
  CHECK(sc.metric.kind == "flat-euclidean");
  CHECK(sc.m == 32);
  CHECK(sc.p == Vecd{0.0, 0.0});
  CHECK(sc.q == Vecd{1.0, 1.0});
  CHECK(!sc.run_conformal);
  CHECK(!sc.run_hyperbolicity);
}

TEST_CASE("scenario parsing rejects malformed input") {
  try {
    (void)parse_scenario_text("", "empty");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
  try {
    (void)parse_scenario_text("[scenario]\nname = x\nbogus_key = 1\n", "t");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
  try {
    (void)parse_scenario_text("[unknown-section]\nk = 1\n", "t");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
  try {
    (void)parse_scenario_text("[scenario]\nname = x\nseed = abc\n", "t");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  // the distinct-endpoints assumption is enforced unless the flag is set
  std::string eq = R"(
[scenario]
name = eq
[metric]
kind = flat-euclidean
dim = 2
[endpoints]
p = 0.5, 0.5
q = 0.5, 0.5
)";
  try {
    (void)parse_scenario_text(eq, "t");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
  std::string eq_ok = eq + "allow_equal = true\n";
  Scenario sc = parse_scenario_text(eq_ok, "t");
  CHECK(sc.allow_equal);
}

TEST_CASE("metric builder covers the declared kinds") {
  MetricDecl d;
  d.kind = "round-sphere-chart";
  CHECK(build_metric(d).kind() == MetricKind::RoundSphereChart);
  d.kind = "standard-stationary";
  d.n0 = 1;
  d.beta_kind = "quadratic";
  d.beta_params = {1.0, 39.47841760435743};
  MetricFamily st = build_metric(d);
  CHECK(st.kind() == MetricKind::StandardStationary);
  CHECK(st.dim() == 2);
  d.kind = "conformal-rescale";
  d.base_kind = "flat-euclidean";
  d.base_dim = 2;
  d.psi_kind = "quadratic";
  d.psi_params = {1.0, 1.0, 0.0};
  CHECK(build_metric(d).kind() == MetricKind::ConformalRescale);
  d.kind = "no-such-kind";
  CHECK_THROWS_AS((void)build_metric(d), Error);
}

TEST_CASE("pipeline on the flat scenario: empty kernel, stages skipped") {
  Scenario sc = parse_scenario_text(kFlatScenario, "inline");
  OJson rep = run_pipeline(sc);
  CHECK(rep["geodesic"]["converged"].get<bool>());
  CHECK(rep["geodesic"]["causal_character"].get<std::string>() == "spacelike");
  CHECK(rep["index_form"]["kernel_dimension"].get<int>() == 0);
  CHECK(rep["index_form"]["fredholm"]["e_zero"].get<bool>());
  CHECK(rep["conjugate"]["events"].empty());
  bool skipped_surj = false;
  for (const auto& s : rep["stages_skipped"])
    skipped_surj = skipped_surj || s.get<std::string>() == "surjectivity";
  CHECK(skipped_surj);
}

TEST_CASE("pipeline determinism: identical reports modulo timing") {
  Scenario sc = parse_scenario_text(kFlatScenario, "inline");
  OJson a = run_pipeline(sc);
  OJson b = run_pipeline(sc);
  a.erase("timing");
  b.erase("timing");
  CHECK(dump_json(a) == dump_json(b));
}

TEST_CASE("report files round-trip and carry 17-digit floats") {
  Scenario sc = parse_scenario_text(kFlatScenario, "inline");
  OJson rep = run_pipeline(sc);
  std::string dir = std::filesystem::temp_directory_path() / "geovar-test-report";
  auto files = emit_report(rep, dir, "json");
  REQUIRE(!files.empty());
  OJson parsed = OJson::parse(read_text_file(files[0]));
  CHECK(dump_json(parsed) == dump_json(rep));
  // floats survive exactly
  CHECK(parsed["geodesic"]["residual"].get<double>() ==
        rep["geodesic"]["residual"].get<double>());
}

TEST_CASE("csv emission uses the documented schemas") {
  OJson rep;
  rep["surjectivity"]["pairings"] = OJson::array({OJson::array({0.5, -1e-12})});
  OJson sweep = OJson::array();
  OJson row;
  row["eps"] = 0.01;
  row["kernel_dim"] = 0;
  row["min_abs_lambda"] = 0.05;
  row["reshoot_residual"] = 1e-12;
  row["reshoot_failed"] = false;
  sweep.push_back(row);
  rep["sweep"] = sweep;
  OJson hy;
  OJson strips = OJson::array();
  OJson srow;
  srow["n"] = 1;
  srow["sup_ratio"] = 0.7;
  strips.push_back(srow);
  hy["strips"] = strips;
  hy["eps_realized"] = 2.0;
  hy["b_realized"] = 1.0;
  hy["verdict"] = "criterion-satisfied-on-sample";
  rep["hyperbolicity"] = hy;
  std::string dir = std::filesystem::temp_directory_path() / "geovar-test-csv";
  auto files = emit_report(rep, dir, "csv");
  bool saw_matrix = false, saw_sweep = false, saw_hyp = false;
  for (const auto& f : files) {
    std::string text = read_text_file(f);
    if (f.find("verdict_matrix") != std::string::npos) {
      saw_matrix = true;
      CHECK(text.rfind("kernel_index,candidate_index,pairing\n", 0) == 0);
      CHECK(text.find("0,0,0.5") != std::string::npos);
    }
    if (f.find("sweep") != std::string::npos) {
      saw_sweep = true;
      CHECK(text.rfind("eps,kernel_dim,min_abs_lambda,reshoot_residual,reshoot_failed\n", 0) ==
            0);
    }
    if (f.find("hyperbolicity") != std::string::npos) {
      saw_hyp = true;
      CHECK(text.rfind("strip_n,sup_ratio\n", 0) == 0);
      CHECK(text.find("summary,") != std::string::npos);
    }
  }
  CHECK(saw_matrix);
  CHECK(saw_sweep);
  CHECK(saw_hyp);
}

TEST_CASE("io errors are typed") {
  OJson rep;
  rep["x"] = 1;
  try {
    (void)emit_report(rep, "/proc/geovar-not-writable/sub", "json");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("list_scenarios finds scenario files") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "geovar-test-scenarios";
  fs::create_directories(dir);
  write_text_file((dir / "b.scn").string(), "[scenario]\nname=b\n");
  write_text_file((dir / "a.scn").string(), "[scenario]\nname=a\n");
  write_text_file((dir / "ignored.txt").string(), "x");
  auto found = list_scenarios(dir.string());
  REQUIRE(found.size() == 2);
  CHECK(found[0].find("a.scn") != std::string::npos);
  CHECK(found[1].find("b.scn") != std::string::npos);
}

TEST_CASE("stationary battery reproduces the counterexample numbers") {
  std::string text = R"(
[scenario]
name = ce
seed = 7
[metric]
kind = standard-stationary
n0 = 1
beta_kind = quadratic
beta_params = 1, 39.47841760435743
[endpoints]
p = 0, 0
q = 0, 1
v_guess = 0, 1
[grid]
m = 64
kernel_tol = 5e-3
spatial_tol = 0.02
quadrature_tol = 1e-7
)";
  Scenario sc = parse_scenario_text(text, "inline");
  OJson b = stationary_battery(sc, 64, 128, 5);
  CHECK(b["kernel_cosine"].get<double>() >= 0.999);
  double ratio = b["xi_lambda_ratio"].get<double>();
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
  CHECK(b["stationary_pairings"]["max_abs_pairing"].get<double>() <= 1e-8);
  CHECK(b["general_bump_pairing"].get<double>() >= 0.1);
  CHECK(b["sigma_block_min_abs_lambda"].get<double>() >= 0.5);
}
