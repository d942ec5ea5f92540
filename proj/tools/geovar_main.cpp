// Scenario-driven command line front end. Subcommands map one-to-one onto the
// pipeline stages for scriptability; `run` executes the whole pipeline.
// Exit codes: 0 completed (findings included), 1 configuration error,
// 2 internal error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "geovar/errors.hpp"
#include "geovar/geodesic.hpp"
#include "geovar/index_form.hpp"
#include "geovar/jacobi.hpp"
#include "geovar/report.hpp"
#include "geovar/scenario.hpp"

namespace {

using namespace geovar;

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> m;
  std::string eps;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_scenario = true) {
  auto* opt = cmd->add_option("--scenario", args.scenario_path, "scenario file path");
  if (need_scenario) opt->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides the scenario)");
  cmd->add_option("--format", args.format, "report format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", [&args](const CLI::results_t& r) {
    args.seed = std::stoull(r[0]);
    return true;
  }, "seed override");
  cmd->add_option("--m", [&args](const CLI::results_t& r) {
    args.m = std::stoi(r[0]);
    return true;
  }, "grid override");
  cmd->add_option("--eps", args.eps, "sweep epsilon list, comma separated");
}

RunOverrides overrides_from(const CommonArgs& a) {
  RunOverrides ov;
  ov.seed = a.seed;
  ov.m = a.m;
  if (!a.out_dir.empty()) ov.out_dir = a.out_dir;
  if (!a.eps.empty()) {
    Vecd eps;
    std::string item;
    std::string s = a.eps;
    for (char& c : s)
      if (c == ',') c = ' ';
    std::istringstream ss(s);
    double v;
    while (ss >> v) eps.push_back(v);
    ov.eps_list = eps;
  }
  return ov;
}

Scenario load(const CommonArgs& a) {
  Scenario sc = parse_scenario(a.scenario_path);
  if (a.seed) sc.seed = *a.seed;
  if (a.m) sc.m = *a.m;
  if (!a.out_dir.empty()) sc.out_dir = a.out_dir;
  return sc;
}

void print_and_emit(const OJson& rep, const Scenario& sc, const CommonArgs& args) {
  std::string dir = args.out_dir.empty() ? sc.out_dir : args.out_dir;
  auto files = emit_report(rep, dir, args.format);
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geovar: semi-Riemannian geodesic variational laboratory"};
  app.require_subcommand(1);

  CommonArgs run_args, geo_args, conj_args, idx_args, pert_args, sweep_args, hyp_args, ce_args;
  std::string list_dir = "scenarios";

  auto* cmd_run = app.add_subcommand("run", "full pipeline for a scenario");
  add_common(cmd_run, run_args);
  auto* cmd_geo = app.add_subcommand("geodesic", "solve the boundary value problem only");
  add_common(cmd_geo, geo_args);
  auto* cmd_conj = app.add_subcommand("conjugate", "geodesic plus conjugate point scan");
  add_common(cmd_conj, conj_args);
  auto* cmd_idx = app.add_subcommand("indexform", "assemble the index form; writes matrix files");
  add_common(cmd_idx, idx_args);
  auto* cmd_pert = app.add_subcommand("perturb", "candidates and the surjectivity verdict");
  add_common(cmd_pert, pert_args);
  auto* cmd_sweep = app.add_subcommand("sweep", "degeneracy-breaking sweep");
  add_common(cmd_sweep, sweep_args);
  auto* cmd_hyp = app.add_subcommand("hyperbolic-check", "sampled global hyperbolicity criterion");
  add_common(cmd_hyp, hyp_args);
  auto* cmd_ce = app.add_subcommand("counterexample", "stationary vertical-geodesic battery");
  add_common(cmd_ce, ce_args);
  auto* cmd_list = app.add_subcommand("list-scenarios", "list scenario files");
  cmd_list->add_option("--dir", list_dir, "scenario directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_run->parsed()) {
      Scenario sc = load(run_args);
      OJson rep = run_pipeline(sc, overrides_from(run_args));
      print_and_emit(rep, sc, run_args);
      return 0;
    }
    if (cmd_geo->parsed() || cmd_conj->parsed() || cmd_pert->parsed() || cmd_sweep->parsed()) {
      // partial pipelines share the runner; stages not requested are cheap
      const CommonArgs& args = cmd_geo->parsed()    ? geo_args
                               : cmd_conj->parsed() ? conj_args
                               : cmd_pert->parsed() ? pert_args
                                                    : sweep_args;
      Scenario sc = load(args);
      if (cmd_geo->parsed() || cmd_conj->parsed()) {
        sc.eps_list.clear();
        sc.candidates = 0;
      }
      if (cmd_geo->parsed()) sc.run_conformal = false;
      OJson rep = run_pipeline(sc, overrides_from(args));
      print_and_emit(rep, sc, args);
      return 0;
    }
    if (cmd_idx->parsed()) {
      Scenario sc = load(idx_args);
      MetricFamily metric = build_metric(sc.metric);
      ShootOptions opts;
      opts.allow_equal = sc.allow_equal;
      ShootResult sr = shoot_bvp(metric, sc.p, sc.q, sc.v_guess, sc.m, sc.shoot_tol, opts);
      PathBasis basis{sc.m, metric.dim()};
      MetricFamily gR = MetricFamily::flat_euclidean(metric.dim());
      IndexFormMatrix ifm = assemble_index_form(metric, gR, sr.curve, basis);
      std::string dir = idx_args.out_dir.empty() ? sc.out_dir : idx_args.out_dir;
      write_text_file(dir + "/A.txt", matrix_to_text(ifm.A));
      write_text_file(dir + "/G.txt", matrix_to_text(ifm.G));
      write_text_file(dir + "/phi_part.txt", matrix_to_text(ifm.phi_part));
      write_text_file(dir + "/e_part.txt", matrix_to_text(ifm.e_part));
      std::cout << "wrote " << dir << "/{A,G,phi_part,e_part}.txt\n";
      return 0;
    }
    if (cmd_hyp->parsed()) {
      Scenario sc = load(hyp_args);
      sc.run_hyperbolicity = true;
      sc.p.clear();
      sc.q.clear();
      OJson rep = run_pipeline(sc, overrides_from(hyp_args));
      print_and_emit(rep, sc, hyp_args);
      return 0;
    }
    if (cmd_ce->parsed()) {
      Scenario sc = load(ce_args);
      OJson rep = stationary_battery(sc, sc.m, 2 * sc.m, sc.stationary_count);
      std::string dir = ce_args.out_dir.empty() ? sc.out_dir : ce_args.out_dir;
      write_text_file(dir + "/counterexample.json", dump_json(rep));
      std::cout << "wrote " << dir << "/counterexample.json\n";
      return 0;
    }
    if (cmd_list->parsed()) {
      for (const auto& f : list_scenarios(list_dir)) std::cout << f << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::ParseError:
      case ErrorKind::ValidationError:
      case ErrorKind::IoError:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
