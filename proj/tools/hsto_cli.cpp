/// Command-line driver: noise/config validation, single-path runs, ensemble
/// Monte Carlo, continuous-dependence experiments, and a quick self-test.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsto/diagnostics.hpp"
#include "hsto/harness.hpp"
#include "hsto/ops.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int paths = 0;
  std::string outdir;
  std::string strat_mode;
};

hsto::RunConfig load(const CommonOpts& o) {
  hsto::RunConfig cfg = hsto::load_config_file(o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.paths > 0) cfg.paths = o.paths;
  if (!o.outdir.empty()) cfg.outdir = o.outdir;
  if (!o.strat_mode.empty()) {
    if (o.strat_mode != "ito-corrected" && o.strat_mode != "heun")
      throw std::invalid_argument("--stratonovich must be ito-corrected or heun");
    cfg.scheme = o.strat_mode;
    cfg.stratonovich = true;
  }
  return cfg;
}

void add_common(CLI::App* app, CommonOpts& o, bool with_paths = true) {
  app->add_option("--config", o.config_path, "Run configuration (flat JSON)")->required();
  app->add_option("--seed", o.seed, "Master seed override")->each([&](const std::string&) {
    o.seed_set = true;
  });
  if (with_paths) app->add_option("--paths", o.paths, "Path count override");
  app->add_option("--out", o.outdir, "Output directory override");
  app->add_option("--stratonovich", o.strat_mode,
                  "Stratonovich stepping mode: ito-corrected | heun");
}

int cmd_validate(const CommonOpts& o) {
  hsto::RunConfig cfg = load(o);
  hsto::RunSetup setup(cfg);
  nlohmann::json j;
  j["config_hash"] = hsto::config_hash(cfg);
  j["config"] = hsto::to_json(cfg);
  j["nu_phi"] = setup.report.nu_phi;
  j["nu_psi"] = setup.report.nu_psi;
  j["violations"] = setup.report.violations;
  j["pass"] = setup.report.pass();
  j["xi"] = setup.forcing.xi();
  std::cout << j.dump(2) << "\n";
  return setup.report.pass() ? 0 : 1;
}

int cmd_run(const CommonOpts& o, int path_index) {
  hsto::RunConfig cfg = load(o);
  hsto::RunSetup setup(cfg);
  if (!setup.report.pass()) {
    std::cerr << "noise validation failed\n";
    return 1;
  }
  hsto::PathResult res = hsto::run_path(setup, cfg, path_index);
  std::filesystem::create_directories(cfg.outdir);
  const std::string path =
      (std::filesystem::path(cfg.outdir) / ("path-" + std::to_string(path_index) + ".ndjson"))
          .string();
  std::ofstream out(path);
  hsto::write_path_ndjson(out, cfg, setup.report, res);
  if (cfg.emit_fields && res.ok() && res.final_state.valid) {
    hsto::ScalarField w = hsto::vint(hsto::div_h(res.final_state.v));
    w *= -1.0;
    hsto::write_snapshot(
        (std::filesystem::path(cfg.outdir) / ("fields-" + std::to_string(path_index) + ".bin"))
            .string(),
        {{"v1", &res.final_state.v.u1},
         {"v2", &res.final_state.v.u2},
         {"theta", &res.final_state.theta},
         {"w", &w}});
  }
  std::cout << "wrote " << path << (res.blew_up ? " (blow-up suspected)" : "") << "\n";
  if (!res.ok()) {
    std::cerr << "path error: " << res.error << "\n";
    return 1;
  }
  return 0;
}

int cmd_ensemble(const CommonOpts& o) {
  hsto::RunConfig cfg = load(o);
  hsto::EnsembleSummary sum = hsto::run_ensemble(cfg, true);
  std::cout << hsto::to_json(sum).dump(2) << "\n";
  return sum.failed_paths.empty() ? 0 : 1;
}

int cmd_contdep(const CommonOpts& o, double delta, int pairs) {
  hsto::RunConfig cfg = load(o);
  hsto::ContdepReport rep = hsto::continuous_dependence(cfg, delta, pairs);
  std::filesystem::create_directories(cfg.outdir);
  const std::string path = (std::filesystem::path(cfg.outdir) / "contdep.json").string();
  std::ofstream out(path);
  out << hsto::to_json(rep).dump(2) << "\n";
  std::cout << hsto::to_json(rep).dump(2) << "\n";
  return 0;
}

int check(bool ok, const char* what, int& failures) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
  if (!ok) ++failures;
  return failures;
}

int cmd_selftest() {
  using namespace hsto;
  int failures = 0;
  Grid g(16, 16, 9, 1.0, 0.0);
  Projector proj(g);
  PathStream rs(42, 0);

  // adjointness of grad_h / div_h
  ScalarField f = make_scalar_field(g, "random_smooth 3 2 0.7", 11, false);
  HVectorField u{make_scalar_field(g, "random_smooth 3 2 0.5", 12, false),
                 make_scalar_field(g, "random_smooth 3 2 0.5", 13, false)};
  const double lhs = l2_inner(div_h(u), f);
  const double rhs = -l2_inner(u.u1, grad_h(f).u1) - l2_inner(u.u2, grad_h(f).u2);
  check(std::abs(lhs - rhs) < 1e-10, "grad_h/div_h adjointness", failures);

  // projection idempotency and orthogonality
  HVectorField pu = proj.apply_p(u);
  HVectorField ppu = proj.apply_p(pu);
  check((ppu - pu).max_abs() < 1e-12, "hydrostatic projection idempotent", failures);
  HVectorField qu = proj.apply_q(u);
  check(std::abs(l2_inner(pu, {broadcast_full(qu.u1), broadcast_full(qu.u2)})) < 1e-10,
        "P/Q orthogonality", failures);
  check(divergence_residual(pu) < 1e-11, "projected field integral-incompressible", failures);

  // vertical calculus identities
  ScalarField vt = vtilde(f);
  check(vbar(vt).max_abs() < 1e-12, "vbar(vtilde) = 0", failures);
  ScalarField vi = vint(f);
  double bottom = 0.0;
  for (std::size_t n = 0; n < g.plane(); ++n) bottom = std::max(bottom, std::abs(vi.level(0)[n]));
  check(bottom == 0.0, "vint vanishes at z = -h", failures);

  // parabolicity certificate on a known pair
  NoiseModel nm;
  nm.N = 2;
  nm.phi = make_vec3_family(g, "constant 1 0 0; constant 0 1 0", 2, "phi");
  nm.psi = make_vec3_family(g, "none", 2, "psi");
  nm.sigma = make_scalar_family(g, "none", 2, "sigma");
  ValidationReport rep = validate(nm);
  check(rep.pass() && std::abs(rep.nu_phi - 1.0) < 1e-12, "gram certificate nu = 1", failures);

  // one deterministic step reproduces itself
  RunConfig cfg;
  cfg.n1 = cfg.n2 = 8;
  cfg.n3 = 5;
  cfg.init_v = "random_smooth 2 1 0.3";
  cfg.init_theta = "random_smooth 2 1 0.3";
  cfg.noise_phi = "constant 0.4 0 0";
  cfg.noise_N = 1;
  cfg.dt = 1e-3;
  cfg.T_end = 5e-3;
  cfg.seed = 7;
  PathResult a = run_path(cfg, 0);
  PathResult b = run_path(cfg, 0);
  bool same = a.records.size() == b.records.size();
  if (same)
    for (std::size_t i = 0; i < a.records.size(); ++i)
      same = same && to_ndjson(a.records[i]) == to_ndjson(b.records[i]);
  check(same, "path replay bit-identical", failures);

  std::cout << (failures == 0 ? "selftest OK" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic primitive-equations simulator"};
  app.require_subcommand(1);

  CommonOpts vo, ro, eo, co;
  int run_path_index = 0;
  double delta = 1e-2;
  int pairs = 8;

  CLI::App* validate = app.add_subcommand("validate", "Validate config and noise coefficients");
  add_common(validate, vo, false);
  CLI::App* run = app.add_subcommand("run", "Run a single path");
  add_common(run, ro, false);
  run->add_option("--path", run_path_index, "Path index");
  CLI::App* ens = app.add_subcommand("ensemble", "Run a Monte Carlo ensemble");
  add_common(ens, eo);
  CLI::App* cd = app.add_subcommand("contdep", "Continuous-dependence experiment");
  add_common(cd, co, false);
  cd->add_option("--delta", delta, "Initial-data perturbation size (H-norm)");
  cd->add_option("--pairs", pairs, "Number of seed pairs");
  app.add_subcommand("selftest", "Run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(vo);
    if (run->parsed()) return cmd_run(ro, run_path_index);
    if (ens->parsed()) return cmd_ensemble(eo);
    if (cd->parsed()) return cmd_contdep(co, delta, pairs);
    return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
