#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsto/harness.hpp"
#include "hsto/ops.hpp"
#include "oracles.hpp"

using namespace hsto;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.n1 = cfg.n2 = 8;
  cfg.n3 = 5;
  cfg.dt = 1e-3;
  cfg.T_end = 1e-2;
  cfg.seed = 11;
  return cfg;
}

std::string dump_records(const PathResult& r) {
  std::ostringstream os;
  for (const auto& rec : r.records) os << to_ndjson(rec) << "\n";
  return os.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config parsing is strict") {
  SUBCASE("unknown keys abort") {
    nlohmann::json j = {{"n1", 8}, {"n2", 8}, {"n3", 5}, {"dtt", 1e-3}};
    CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  }
  SUBCASE("range violations abort") {
    CHECK_THROWS_AS(parse_config({{"n1", 7}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config({{"dt", 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config({{"gamma_grid", {2.0, 1.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config({{"scheme", "milstein"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_config({{"scheme", "heun"}}), std::invalid_argument);  // needs strat
  }
  SUBCASE("defaults round-trip and hash is stable") {
    RunConfig a = parse_config(nlohmann::json::object());
    RunConfig b = parse_config(to_json(a));
    CHECK(config_hash(a) == config_hash(b));
    b.dt = 2e-3;
    CHECK(config_hash(a) != config_hash(b));
  }
  SUBCASE("scheme resolution") {
    RunConfig c;
    CHECK(c.effective_scheme() == "ito");
    c.stratonovich = true;
    CHECK(c.effective_scheme() == "ito-corrected");
    c.scheme = "heun";
    CHECK(c.effective_scheme() == "heun");
  }
}

TEST_CASE("run_path") {
  SUBCASE("zero data, zero noise: all-zero record stream") {
    RunConfig cfg = tiny_config();
    PathResult r = run_path(cfg, 0);
    REQUIRE(r.ok());
    CHECK(r.records.size() > 1);
    for (const auto& rec : r.records) {
      CHECK(rec.l2_v == 0.0);
      CHECK(rec.l2_theta == 0.0);
      CHECK_FALSE(rec.blowup_flag);
    }
  }

  SUBCASE("identical (seed, path) replays bit-identically") {
    RunConfig cfg = tiny_config();
    cfg.init_v = "random_smooth 2 1 0.3";
    cfg.init_theta = "random_smooth 2 1 0.3";
    cfg.noise_phi = "constant 0.5 0 0";
    cfg.noise_psi = "constant 0 0.4 0";
    cfg.noise_N = 1;
    PathResult a = run_path(cfg, 2);
    PathResult b = run_path(cfg, 2);
    CHECK(dump_records(a) == dump_records(b));
    PathResult c = run_path(cfg, 3);
    CHECK(dump_records(a) != dump_records(c));
  }

  SUBCASE("100 steps on the 8x8x5 grid complete within the budget") {
    RunConfig cfg = tiny_config();
    cfg.T_end = 0.1;  // 100 steps
    cfg.init_v = "random_smooth 2 1 0.3";
    cfg.noise_phi = "constant 0.4 0 0";
    cfg.noise_N = 1;
    const auto t0 = std::chrono::steady_clock::now();
    PathResult r = run_path(cfg, 0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(r.ok());
    CHECK(secs < 1.0);
  }

  SUBCASE("blow-up ceiling aborts with a flagged record") {
    RunConfig cfg = tiny_config();
    cfg.init_v = "random_smooth 2 1 0.5";
    cfg.blowup_ceiling = 1e-6;
    PathResult r = run_path(cfg, 0);
    REQUIRE(r.ok());
    CHECK(r.blew_up);
    CHECK(r.records.back().blowup_flag);
  }
}

TEST_CASE("ensemble aggregation") {
  SUBCASE("deterministic ensemble: exceedance is a 0/1 step function") {
    RunConfig cfg = tiny_config();
    cfg.paths = 4;
    cfg.init_v = "single_mode 1 0 0 0.4";
    cfg.gamma_grid = {1e-6, 1e-3, 1.0, 1e3};
    EnsembleSummary s = run_ensemble(cfg, false);
    CHECK(s.failed_paths.empty());
    for (double f : s.v_h1h2.freq) CHECK((f == 0.0 || f == 1.0));
    for (std::size_t i = 1; i < s.v_h1h2.freq.size(); ++i)
      CHECK(s.v_h1h2.freq[i] <= s.v_h1h2.freq[i - 1]);
  }

  SUBCASE("exceedance non-increasing for a noisy ensemble") {
    RunConfig cfg = tiny_config();
    cfg.paths = 6;
    cfg.init_v = "random_smooth 2 1 0.3";
    cfg.noise_phi = "constant 0.6 0 0";
    cfg.noise_N = 1;
    EnsembleSummary s = run_ensemble(cfg, false);
    for (const ExceedanceCurve* c : {&s.v_h1h2, &s.theta_h1h2, &s.v_l2h1, &s.theta_l2h1})
      for (std::size_t i = 1; i < c->freq.size(); ++i) CHECK(c->freq[i] <= c->freq[i - 1]);
  }

  SUBCASE("a failing path is reported and the others are unaffected") {
    RunConfig cfg = tiny_config();
    cfg.paths = 2;
    cfg.init_v = "single_mode 1 0 0 50.0";  // CFL-hostile
    cfg.dt = 0.05;
    cfg.T_end = 0.5;
    cfg.cfl_max = 0.01;
    EnsembleSummary s = run_ensemble(cfg, false);
    CHECK(s.failed_paths.size() == 2);  // deterministic: both paths hit the guard
  }
}

TEST_CASE("wilson intervals") {
  auto [lo0, hi0] = wilson_interval(0, 50);
  CHECK(lo0 < 1e-12);
  CHECK(hi0 < 0.15);
  auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.404).epsilon(0.02));
  CHECK(hi == doctest::Approx(0.596).epsilon(0.02));
  auto [lo1, hi1] = wilson_interval(100, 100);
  CHECK(hi1 == 1.0);
  CHECK(lo1 > 0.95);
}

TEST_CASE("continuous dependence") {
  SUBCASE("delta = 0 gives a bit-zero gap") {
    RunConfig cfg = tiny_config();
    cfg.init_v = "random_smooth 2 1 0.3";
    cfg.noise_phi = "constant 0.4 0 0";
    cfg.noise_N = 1;
    ContdepReport rep = continuous_dependence(cfg, 0.0, 2);
    for (const auto& row : rep.pairs)
      for (const auto& pt : row) {
        CHECK(pt.sup_h_gap == 0.0);
        CHECK(pt.l2v_gap == 0.0);
      }
  }

  SUBCASE("zero-noise linear mode: the gap follows the implicit-Euler decay exactly") {
    Grid g(8, 8, 5, 1.0);
    Projector proj(g);
    NoiseModel nm;
    nm.N = 0;
    validate(nm);
    Forcing f;
    StepControls ctl;
    ctl.dt = 1e-3;
    ctl.linear_only = true;
    const double delta = 1e-3;
    SimState a;
    a.v = HVectorField::full(g);
    a.theta = ScalarField::full(g);
    SimState b = a;
    b.theta = oracles::sample(g, [&](double x1, double, double) { return delta * std::cos(x1); });
    const double lambda = 1.0;  // |k|^2 of the perturbation mode, z-independent
    const double g0 = std::sqrt(l2_sq(b.theta));
    BrownianIncrements dw{{}, ctl.dt};
    for (int k = 0; k < 50; ++k) {
      a = step_ito(a, nm, f, proj, ctl, dw);
      b = step_ito(b, nm, f, proj, ctl, dw);
    }
    ScalarField diff = b.theta - a.theta;
    const double want = g0 * std::pow(1.0 + ctl.dt * lambda, -50.0);
    CHECK(std::sqrt(l2_sq(diff)) == doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("gaps shrink with delta") {
    RunConfig cfg = tiny_config();
    cfg.init_v = "random_smooth 2 1 0.3";
    cfg.init_theta = "random_smooth 2 1 0.3";
    ContdepReport rep = continuous_dependence(cfg, 1e-2, 2);
    for (const auto& row : rep.pairs) {
      REQUIRE(row.size() == 3);
      CHECK(row[1].sup_h_gap < row[0].sup_h_gap);
      CHECK(row[2].sup_h_gap < row[1].sup_h_gap);
    }
  }
}

TEST_CASE("field snapshots round-trip") {
  Grid g(8, 8, 5, 1.0);
  ScalarField a = make_scalar_field(g, "random_smooth 2 1 0.7", 3, false);
  ScalarField b = make_scalar_field(g, "random_smooth 2 1 0.7", 4, false);
  const std::string path = "/tmp/hsto_test_snapshot.bin";
  write_snapshot(path, {{"alpha", &a}, {"beta", &b}});
  auto fields = read_snapshot(path, g);
  REQUIRE(fields.size() == 2);
  CHECK(fields[0].first == "alpha");
  CHECK((fields[0].second - a).max_abs() == 0.0);
  CHECK((fields[1].second - b).max_abs() == 0.0);
  // magic bytes
  std::string raw = slurp(path);
  CHECK(raw.substr(0, 5) == "HSTO1");
  std::remove(path.c_str());
}

TEST_CASE("ensemble outputs are byte-identical across reruns") {
  RunConfig cfg = tiny_config();
  cfg.paths = 2;
  cfg.init_v = "random_smooth 2 1 0.3";
  cfg.noise_phi = "constant 0.5 0 0";
  cfg.noise_N = 1;
  cfg.record_every = 2;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "hsto_determinism";
  fs::remove_all(base);
  cfg.outdir = (base / "a").string();
  run_ensemble(cfg, true);
  cfg.outdir = (base / "b").string();
  run_ensemble(cfg, true);
  for (const char* name : {"summary.json", "path-0.ndjson", "path-1.ndjson"}) {
    const std::string fa = slurp(base / "a" / name);
    const std::string fb = slurp(base / "b" / name);
    CHECK(fa.size() > 0);
    CHECK(fa == fb);
  }
  fs::remove_all(base);
}

TEST_CASE("path NDJSON self-describes") {
  RunConfig cfg = tiny_config();
  cfg.noise_phi = "constant 0.5 0 0";
  cfg.noise_N = 1;
  RunSetup setup(cfg);
  PathResult r = run_path(setup, cfg, 0);
  std::ostringstream os;
  write_path_ndjson(os, cfg, setup.report, r);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  nlohmann::json h = nlohmann::json::parse(header);
  CHECK(h.at("config_hash").get<std::string>() == config_hash(cfg));
  CHECK(h.at("nu_phi").get<double>() == doctest::Approx(0.25));
  CHECK(h.contains("path_seed"));
}

TEST_CASE("failed paths carry a structured error line") {
  RunConfig cfg = tiny_config();
  cfg.init_v = "single_mode 1 0 0 50.0";
  cfg.dt = 0.05;
  cfg.T_end = 0.5;
  cfg.cfl_max = 0.01;
  RunSetup setup(cfg);
  PathResult r = run_path(setup, cfg, 0);
  CHECK_FALSE(r.ok());
  std::ostringstream os;
  write_path_ndjson(os, cfg, setup.report, r);
  CHECK(os.str().find("path_error") != std::string::npos);
  CHECK(os.str().find("CFL") != std::string::npos);
}

TEST_CASE("noise family loads from an NDJSON field file") {
  Grid g(8, 8, 5, 1.0);
  const std::string path = "/tmp/hsto_family.ndjson";
  {
    std::ofstream out(path);
    nlohmann::json line;
    line["family"] = "phi";
    line["n"] = 0;
    line["component"] = 1;
    line["x3_independent"] = true;
    std::vector<double> data(g.plane(), 0.25);
    line["data"] = data;
    out << line.dump() << "\n";
  }
  auto fam = make_vec3_family(g, "file " + path, 2, "phi");
  REQUIRE(fam.size() == 2);
  CHECK(fam[0].c1.at(2, 3, 0) == 0.25);
  CHECK(fam[0].c2.max_abs() == 0.0);
  CHECK(fam[1].c1.max_abs() == 0.0);  // padded to N
  std::remove(path.c_str());
}
