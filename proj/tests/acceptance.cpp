/// Acceptance suite: runs every verification gate at its stated tolerance
/// and prints one pass/fail line per criterion. Exit code is the number of
/// failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hsto/diagnostics.hpp"
#include "hsto/generators.hpp"
#include "hsto/harness.hpp"
#include "hsto/ops.hpp"
#include "oracles.hpp"

using namespace hsto;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

int g_failures = 0;

void criterion(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, title,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

HVectorField random_u(const Grid& g, std::uint64_t seed) {
  return {make_scalar_field(g, "random_smooth 4 3 0.6", seed, false),
          make_scalar_field(g, "random_smooth 4 3 0.6", seed + 1000, false)};
}

// ---------------------------------------------------------------- 1 & 2

void criterion_projection_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Grid g(16, 16, 9, 1.0);
  Projector proj(g);
  double worst_idem = 0.0, worst_orth = 0.0, worst_div = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    HVectorField u = random_u(g, 10000 + trial);
    HVectorField ph = proj.apply_ph(u);
    HVectorField phh = proj.apply_ph(ph);
    worst_idem = std::max(worst_idem, (phh - ph).max_abs());
    HVectorField qh = proj.apply_qh(u);
    worst_orth = std::max(worst_orth, std::abs(l2_inner(ph, qh)));
    HVectorField p = proj.apply_p(u);
    HVectorField pp = proj.apply_p(p);
    worst_idem = std::max(worst_idem, (pp - p).max_abs());
    HVectorField q = proj.apply_q(u);
    worst_orth = std::max(worst_orth,
                          std::abs(l2_inner(p, {broadcast_full(q.u1), broadcast_full(q.u2)})));
    worst_div = std::max(worst_div, divergence_residual(p));
  }
  const double secs = elapsed_since(t0);
  const bool pass =
      worst_idem <= 1e-11 && worst_orth <= 1e-11 && worst_div <= 1e-11 && secs < 5.0;
  criterion(1, "projection idempotency/orthogonality on 200 random fields", pass,
            fmt("idem=%.2e orth=%.2e div=%.2e, %.2f s", worst_idem, worst_orth, worst_div,
                secs));
}

void criterion_projection_closed_form() {
  Grid g(16, 16, 9, 1.0);
  Projector proj(g);
  ScalarField mode = oracles::sample(
      g, [](double x1, double x2, double) { return std::sin(x1 + x2); });
  ScalarField half = oracles::sample(
      g, [](double x1, double x2, double) { return 0.5 * std::sin(x1 + x2); });
  HVectorField u{mode, ScalarField::full(g)};
  HVectorField q = proj.apply_qh(u);
  HVectorField p = proj.apply_ph(u);
  const double e1 = std::max((q.u1 - half).max_abs(), (q.u2 - half).max_abs());
  const double e2 = std::max((p.u1 - half).max_abs(), (p.u2 + half).max_abs());
  criterion(2, "closed-form projection of (sin(x1+x2), 0)", e1 <= 1e-12 && e2 <= 1e-12,
            fmt("Q err=%.2e, P err=%.2e", e1, e2));
}

// ------------------------------------------------------------------- 3

void criterion_w_reconstruction() {
  const double a = 0.8;
  std::vector<double> errs;
  for (int n3 : {9, 17, 33}) {
    Grid g(16, 16, n3, 1.0);
    HVectorField v{oracles::sample(g, [&](double x1, double, double z) {
                     return a * std::sin(x1) * std::cos(kPi * (z + 1.0));
                   }),
                   ScalarField::full(g)};
    ScalarField w = reconstruct_w(v, 1e-10);
    ScalarField want = oracles::sample(g, [&](double x1, double, double z) {
      return -(a / kPi) * std::cos(x1) * std::sin(kPi * (z + 1.0));
    });
    errs.push_back((w - want).max_abs());
  }
  const double order = oracles::fit_order(errs);
  criterion(3, "hydrostatic w reconstruction converges at order >= 1.9", order >= 1.9,
            fmt("errors %.2e %.2e %.2e, order %.2f", errs[0], errs[1], errs[2], order));
}

// ------------------------------------------------------------------- 4

struct CancelCase {
  HVectorField v;
  ScalarField w, f, g;
};

CancelCase cancel_fields(const Grid& g) {
  const double eps = 0.02;
  CancelCase c;
  c.w = oracles::sample(g, [&](double x1, double x2, double z) {
    return eps * (std::cos(x1 + 0.3) + std::sin(x2 - 0.6)) * z * (z + 1.0);
  });
  c.v = HVectorField{oracles::sample(g, [&](double x1, double, double z) {
                       return -eps * (2.0 * z + 1.0) * std::sin(x1 + 0.3) - 0.4;
                     }),
                     oracles::sample(g, [&](double, double x2, double z) {
                       return eps * (2.0 * z + 1.0) * std::cos(x2 - 0.6);
                     })};
  c.v.u1 += oracles::sample(g, [](double, double x2, double) { return std::sin(x2 + 1.1); });
  c.v.u2 += oracles::sample(g, [](double x1, double, double) { return std::cos(x1 - 0.8); });
  c.f = oracles::sample(g, [&](double x1, double x2, double z) {
    return 1.0 + 0.3 * std::cos(x1 + 0.9) + eps * std::sin(x2 + 0.2) * (z + 1.0) * (z + 1.0);
  });
  c.g = oracles::sample(g, [&](double x1, double x2, double z) {
    return 1.0 + 0.25 * std::sin(x1 + x2 + 0.4) + eps * std::cos(x2 + 0.7) * z * z;
  });
  return c;
}

void criterion_cancellation() {
  bool pass = true;
  std::string detail;
  for (int r : {2, 4}) {
    std::vector<double> res;
    double rel_fine = 0.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
      const int n = 8 << lvl;
      Grid g(n, n, n / 2 + 1, 1.0);
      CancelCase c = cancel_fields(g);
      CancellationTerms t = cancellation_terms(c.v, c.w, c.f, c.g, r, 1e-12);
      res.push_back(std::abs(t.residual()));
      if (lvl == 2)
        rel_fine = std::abs(t.residual()) / std::max(std::abs(t.i1), std::abs(t.i2));
    }
    const double order = oracles::fit_order(res);
    pass = pass && order >= 1.9 && rel_fine <= 1e-4;
    detail += fmt("r=%d: order %.2f rel@32=%.2e  ", r, order, rel_fine);
  }
  criterion(4, "cancellation residual decays at order >= 1.9, <= 1e-4 at 32x32x17", pass,
            detail);
}

// ------------------------------------------------------------------- 5

void criterion_parabolicity() {
  Grid g(8, 8, 5, 1.0);
  PathStream rng(31415, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    NoiseModel nm;
    nm.N = 3;
    std::array<std::array<double, 3>, 3> gram{};
    for (int n = 0; n < 3; ++n) {
      Vec3Field c{ScalarField::slab(g), ScalarField::slab(g), ScalarField::slab(g)};
      std::array<double, 3> p;
      for (int j = 0; j < 3; ++j)
        p[j] = rng.uniform(trial, 8ull * n + j) - 0.5;
      c.c1.fill(p[0]);
      c.c2.fill(p[1]);
      c.c3.fill(p[2]);
      nm.phi.push_back(std::move(c));
      nm.psi.push_back(
          Vec3Field{ScalarField::slab(g), ScalarField::slab(g), ScalarField::slab(g)});
      nm.sigma.push_back(ScalarField::slab(g));
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) gram[a][b] += p[a] * p[b];
    }
    ValidationReport rep = validate(nm);
    worst = std::max(worst, std::abs(rep.nu_phi - oracles::jacobi_lambda_max(gram)));
  }

  auto boundary = [&](double amp) {
    NoiseModel nm;
    nm.N = 1;
    Vec3Field c{ScalarField::slab(g), ScalarField::slab(g), ScalarField::slab(g)};
    c.c1.fill(amp);
    nm.phi.push_back(std::move(c));
    nm.psi.push_back(Vec3Field{ScalarField::slab(g), ScalarField::slab(g), ScalarField::slab(g)});
    nm.sigma.push_back(ScalarField::slab(g));
    return validate(nm).pass();
  };
  const double eps = 1e-9;
  const bool below = boundary(std::sqrt(2.0) - eps);
  const bool above = boundary(std::sqrt(2.0) + eps);
  criterion(5, "Gram certificate matches the dense eigensolver, exact nu = 2 boundary",
            worst <= 1e-10 && below && !above,
            fmt("max |closed-form - Jacobi| = %.2e, boundary pass/fail = %d/%d", worst, below,
                !above));
}

// ------------------------------------------------------------------- 6

void criterion_ou_moment() {
  const auto t0 = std::chrono::steady_clock::now();
  Grid g(8, 8, 5, 1.0);
  Projector proj(g);
  Forcing f;
  NoiseModel nm;
  nm.N = 1;
  nm.phi = make_vec3_family(g, "constant 1 0 0", 1, "phi");
  nm.psi = make_vec3_family(g, "none", 1, "psi");
  nm.sigma = make_scalar_family(g, "none", 1, "sigma");
  validate(nm);
  StepControls ctl;
  ctl.dt = 1e-3;
  const double T = 0.5;
  const int nsteps = 500;
  const int npaths = 2000;
  SimState init;
  init.v = HVectorField::full(g);
  for (int k = 0; k < g.n3; ++k)
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) init.v.u2.at(i, j, k) = 0.3 * std::sin(g.x1(i));
  init.theta = ScalarField::full(g);
  const double e0 = l2_sq(init.v);
  oracles::Moments ratio;
  for (int p = 0; p < npaths; ++p) {
    SimState s = init;
    PathStream stream(606, p);
    for (int k = 0; k < nsteps; ++k)
      s = step_ito(s, nm, f, proj, ctl, sample_increments(stream, k, 1, ctl.dt));
    ratio.add(l2_sq(s.v) / e0);
  }
  const double expect = std::exp(-T);
  const double gap = std::abs(ratio.mean - expect);
  const double tol = 3.0 * ratio.stderr_mean();
  const double secs = elapsed_since(t0);
  criterion(6, "OU mode moment E|v_k(T)|^2 within 3 SE of exp(-0.5)",
            gap <= tol && secs < 60.0,
            fmt("mean %.5f vs %.5f, |gap| %.2e <= 3SE %.2e, %.1f s", ratio.mean, expect, gap,
                tol, secs));
}

// ------------------------------------------------------------------- 7

void criterion_strat_consistency() {
  Grid g(16, 16, 9, 1.0, 0.0);
  Projector proj(g);
  Forcing f;
  NoiseModel raw;
  raw.N = 2;
  raw.phi = make_vec3_family(g, "constant 0.4 0.18 0; single_fourier_mode 1 0 0.2", 2, "phi");
  raw.psi = make_vec3_family(g, "constant 0.25 0.1 0", 2, "psi");
  raw.sigma = make_scalar_family(g, "constant 0.25", 2, "sigma");
  raw.kappa = ScalarField::slab(g);
  raw.kappa.fill(0.4);
  validate(raw);
  NoiseModel conv = strat_to_ito(raw);
  validate(conv);
  SimState init;
  init.v = proj.apply_p(HVectorField{make_scalar_field(g, "random_smooth 1 1 0.25", 1, false),
                                     make_scalar_field(g, "random_smooth 1 1 0.25", 2, false)});
  init.theta = make_scalar_field(g, "random_smooth 1 1 0.25", 3, false);
  dealias(init.v);
  dealias(init.theta);
  init.v = proj.apply_p(init.v);
  std::vector<double> gaps;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    StepControls ctl;
    ctl.dt = dt;
    double mean_gap = 0.0;
    const int npaths = 8;
    for (int p = 0; p < npaths; ++p) {
      SimState h = init, i = init;
      PathStream stream(5, p);
      double gap = 0.0;
      for (int k = 0; k < 100; ++k) {
        BrownianIncrements dw = sample_increments(stream, k, raw.N, dt);
        h = step_stratonovich_heun(h, raw, f, proj, ctl, dw);
        i = step_ito(i, conv, f, proj, ctl, dw);
        const double scale = std::sqrt(l2_sq(h.v) + l2_sq(h.theta));
        gap = std::max(gap, std::sqrt(l2_sq(h.v - i.v) + l2_sq(h.theta - i.theta)) / scale);
      }
      mean_gap += gap / npaths;
    }
    gaps.push_back(mean_gap);
  }
  const double order = oracles::fit_order(gaps);
  criterion(7, "Heun vs corrected-Ito pathwise sup-gap decays at order >= 0.9", order >= 0.9,
            fmt("relative gaps %.2e %.2e %.2e, fitted order %.2f", gaps[0], gaps[1], gaps[2],
                order));
}

// ------------------------------------------------------------------- 8

void criterion_energy_inequality() {
  Grid g(16, 16, 9, 1.0, 0.0);
  Projector proj(g);
  NoiseModel nm;
  nm.N = 0;
  validate(nm);
  Forcing f;
  StepControls ctl;
  ctl.dt = 2e-3;
  SimState s;
  s.v = proj.apply_p(HVectorField{make_scalar_field(g, "random_smooth 3 2 0.3", 77, false),
                                  make_scalar_field(g, "random_smooth 3 2 0.3", 78, false)});
  s.theta = make_scalar_field(g, "random_smooth 3 2 0.3", 79, false);
  dealias(s.v);
  dealias(s.theta);
  s.v = proj.apply_p(s.v);
  double prev = l2_sq(s.v) + l2_sq(s.theta);
  double worst = 0.0;
  bool pass = true;
  BrownianIncrements dw{{}, ctl.dt};
  for (int k = 0; k < 200; ++k) {
    s = step_ito(s, nm, f, proj, ctl, dw);
    if (!s.valid) {
      pass = false;
      break;
    }
    const double e = l2_sq(s.v) + l2_sq(s.theta);
    worst = std::max(worst, (e - prev) / prev);
    if (e > prev * (1.0 + 1e-8)) pass = false;
    prev = e;
  }
  criterion(8, "deterministic energy non-increasing at every step (relative slack 1e-8)", pass,
            fmt("max relative increment %.2e over 200 steps", worst));
}

// ------------------------------------------------------------------- 9

void criterion_split_consistency() {
  Grid g(16, 16, 9, 1.0, 0.0);
  Projector proj(g);
  Forcing f;
  NoiseModel raw;
  raw.N = 2;
  raw.phi = make_vec3_family(g, "single_fourier_mode 1 0 0.4; constant 0.3 0.15 0", 2, "phi");
  raw.psi = make_vec3_family(g, "constant 0.3 0.2 0", 2, "psi");
  raw.sigma = make_scalar_family(g, "constant 0.4", 2, "sigma");
  raw.kappa = ScalarField::slab(g);
  raw.kappa.fill(0.8);
  validate(raw);
  NoiseModel nm = strat_to_ito(raw);  // exercise gamma/pi/L terms in the re-assembly
  validate(nm);
  SimState s;
  s.v = proj.apply_p(HVectorField{make_scalar_field(g, "random_smooth 2 2 0.4", 31, false),
                                  make_scalar_field(g, "random_smooth 2 2 0.4", 32, false)});
  s.theta = make_scalar_field(g, "random_smooth 2 2 0.4", 33, false);
  dealias(s.v);
  dealias(s.theta);
  s.v = proj.apply_p(s.v);
  PathStream stream(3, 0);
  std::vector<double> res;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    BrownianIncrements dw = sample_increments(stream, 0, nm.N, dt);
    res.push_back(split_residual(s, nm, f, proj, dt, dw));
  }
  const double order = oracles::fit_order(res);
  criterion(9, "barotropic/weighted-average re-assembly decays at order >= 0.9 in dt",
            order >= 0.9,
            fmt("residuals %.2e %.2e %.2e, fitted order %.2f", res[0], res[1], res[2], order));
}

// ------------------------------------------------------------------ 10

void criterion_tail_curves() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.n1 = cfg.n2 = 16;
  cfg.n3 = 9;
  cfg.noise_phi =
      "constant 0.4 0.18 0; single_fourier_mode 1 0 0.25; single_fourier_mode 0 1 0.25";
  cfg.noise_psi = "constant 0.3 0.1 0";
  cfg.noise_sigma = "constant 0.45; single_fourier_mode 1 1 0.3";
  cfg.noise_N = 5;
  cfg.kappa = "constant 0.8";
  cfg.init_v = "random_smooth 1 1 0.3";
  cfg.init_theta = "random_smooth 1 1 0.5";
  cfg.dt = 2.5e-3;
  cfg.T_end = 0.25;
  cfg.paths = 200;
  cfg.seed = 2026;
  cfg.record_every = 10;
  cfg.gamma_grid = {5.0, 20.55, 20.8, 21.2, 80.0};
  EnsembleSummary s = run_ensemble(cfg, false);
  const double secs = elapsed_since(t0);
  bool monotone = s.failed_paths.empty();
  for (std::size_t i = 1; i < s.v_h1h2.freq.size(); ++i)
    monotone = monotone && s.v_h1h2.freq[i] <= s.v_h1h2.freq[i - 1];
  const std::size_t last = s.v_h1h2.freq.size() - 1;
  const bool disjoint_ends = s.v_h1h2.hi[last] < s.v_h1h2.lo[0];
  const bool disjoint_inner = s.v_h1h2.hi[last - 1] < s.v_h1h2.lo[1];
  std::string freqs = "freq ";
  for (double fq : s.v_h1h2.freq) freqs += fmt("%.3f ", fq);
  criterion(10, "tail exceedance non-increasing, Wilson intervals disjoint across gamma",
            monotone && disjoint_ends && disjoint_inner && secs < 600.0,
            freqs + fmt(", inner CI [%.3f,%.3f] vs [%.3f,%.3f], %.0f s",
                        s.v_h1h2.lo[1], s.v_h1h2.hi[1], s.v_h1h2.lo[last - 1],
                        s.v_h1h2.hi[last - 1], secs));
}

// ------------------------------------------------------------------ 11

void criterion_contdep() {
  RunConfig cfg;
  cfg.n1 = cfg.n2 = 8;
  cfg.n3 = 5;
  cfg.noise_phi = "constant 0.4 0.2 0";
  cfg.noise_psi = "constant 0.3 0.1 0";
  cfg.noise_N = 1;
  cfg.init_v = "random_smooth 1 1 0.3";
  cfg.init_theta = "random_smooth 1 1 0.3";
  cfg.dt = 1e-3;
  cfg.T_end = 0.05;
  cfg.seed = 99;
  bool pass = true;
  double worst_ratio = 0.0;
  for (double d : {1e-2, 1e-3}) {
    ContdepReport rep = continuous_dependence(cfg, d, 20);
    for (const auto& row : rep.pairs) {
      const double rh = row[1].sup_h_gap / row[0].sup_h_gap;
      const double rv = row[1].l2v_gap / row[0].l2v_gap;
      worst_ratio = std::max({worst_ratio, rh, rv});
      if (rh >= 1.0 || rv >= 1.0) pass = false;
    }
  }
  ContdepReport zero = continuous_dependence(cfg, 0.0, 2);
  for (const auto& row : zero.pairs)
    for (const auto& pt : row)
      if (pt.sup_h_gap != 0.0 || pt.l2v_gap != 0.0) pass = false;
  criterion(11, "continuous dependence: gap(d/2)/gap(d) < 1 over 20 pairs, bit-zero at d=0",
            pass, fmt("worst ratio %.3f", worst_ratio));
}

// ------------------------------------------------------------------ 12

void criterion_determinism() {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.n1 = cfg.n2 = 8;
  cfg.n3 = 5;
  cfg.noise_phi = "constant 0.5 0 0";
  cfg.noise_psi = "constant 0 0.4 0";
  cfg.noise_N = 1;
  cfg.init_v = "random_smooth 2 1 0.3";
  cfg.init_theta = "random_smooth 2 1 0.3";
  cfg.dt = 1e-3;
  cfg.T_end = 0.04;
  cfg.paths = 4;
  cfg.seed = 404;
  cfg.record_every = 5;
  const fs::path base = fs::temp_directory_path() / "hsto_acceptance_det";
  fs::remove_all(base);
  cfg.outdir = (base / "a").string();
  run_ensemble(cfg, true);
  cfg.outdir = (base / "b").string();
  run_ensemble(cfg, true);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  bool pass = true;
  for (const std::string name :
       {std::string("summary.json"), std::string("path-0.ndjson"), std::string("path-1.ndjson"),
        std::string("path-2.ndjson"), std::string("path-3.ndjson")}) {
    const std::string a = slurp(base / "a" / name);
    pass = pass && !a.empty() && a == slurp(base / "b" / name);
  }
  fs::remove_all(base);
  criterion(12, "ensemble reruns produce byte-identical NDJSON and summaries", pass,
            pass ? "all files identical" : "byte mismatch");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_projection_suite();
  criterion_projection_closed_form();
  criterion_w_reconstruction();
  criterion_cancellation();
  criterion_parabolicity();
  criterion_ou_moment();
  criterion_strat_consistency();
  criterion_energy_inequality();
  criterion_split_consistency();
  criterion_tail_curves();
  criterion_contdep();
  criterion_determinism();
  std::printf("%d/12 criteria passed in %.0f s\n", 12 - g_failures, elapsed_since(t0));
  return g_failures;
}
