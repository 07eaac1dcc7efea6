#include "hsto/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "hsto/ops.hpp"
#include "hsto/rng.hpp"

namespace hsto {

namespace {

NoiseModel build_noise(const Grid& g, const RunConfig& cfg, ValidationReport& rep) {
  NoiseModel nm;
  nm.N = cfg.noise_N;
  nm.phi = make_vec3_family(g, cfg.noise_phi, cfg.noise_N, "phi");
  nm.psi = make_vec3_family(g, cfg.noise_psi, cfg.noise_N, "psi");
  nm.sigma = make_scalar_family(g, cfg.noise_sigma, cfg.noise_N, "sigma");
  if (cfg.kappa != "zero" && cfg.kappa != "none")
    nm.kappa = make_scalar_field(g, cfg.kappa, mix64(cfg.seed) ^ 0xAAULL, false);
  // Keep generated coefficients in the 2/3-truncated space so every product
  // in the dynamics stays alias-free.
  for (auto* fam : {&nm.phi, &nm.psi})
    for (Vec3Field& c : *fam) {
      dealias(c.c1);
      dealias(c.c2);
      dealias(c.c3);
    }
  for (ScalarField& s : nm.sigma) dealias(s);
  if (!nm.kappa.empty()) dealias(nm.kappa);
  rep = validate(nm);
  if (!rep.pass()) return nm;
  if (cfg.stratonovich && cfg.effective_scheme() == "ito-corrected") {
    nm = strat_to_ito(nm);
    rep = validate(nm);
  }
  return nm;
}

Forcing build_forcing(const Grid& g, const RunConfig& cfg) {
  Forcing f;
  f.coriolis_k0 = cfg.coriolis_k0;
  if (cfg.forcing_v != "zero" && cfg.forcing_v != "none") {
    f.f_v = make_vector_field(g, cfg.forcing_v, mix64(cfg.seed) ^ 0xF1ULL);
    dealias(f.f_v);
  }
  if (cfg.forcing_theta != "zero" && cfg.forcing_theta != "none") {
    f.f_theta = make_scalar_field(g, cfg.forcing_theta, mix64(cfg.seed) ^ 0xF2ULL, false);
    dealias(f.f_theta);
  }
  return f;
}

SimState build_initial(const Grid& g, const RunConfig& cfg, const Projector& proj) {
  SimState s;
  HVectorField v = make_vector_field(g, cfg.init_v, mix64(cfg.seed) ^ 0x10ULL);
  dealias(v);
  s.v = proj.apply_p(v);
  s.theta = make_scalar_field(g, cfg.init_theta, mix64(cfg.seed) ^ 0x20ULL, false);
  dealias(s.theta);
  s.t = 0.0;
  s.step = 0;
  s.valid = true;
  return s;
}

}  // namespace

RunSetup::RunSetup(const RunConfig& cfg)
    : grid(cfg.n1, cfg.n2, cfg.n3, cfg.h, cfg.alpha),
      proj(grid),
      noise(build_noise(grid, cfg, report)),
      forcing(build_forcing(grid, cfg)),
      initial(build_initial(grid, cfg, proj)) {}

PathResult run_path(const RunSetup& setup, const RunConfig& cfg, int path_index) {
  PathResult res;
  res.path_index = path_index;
  PathStream stream(cfg.seed, static_cast<std::uint64_t>(path_index));
  res.path_seed = stream.stream_id();
  if (!setup.report.pass()) {
    res.error = "noise validation failed";
    return res;
  }

  const bool heun = cfg.effective_scheme() == "heun";
  StepControls ctl;
  ctl.dt = cfg.dt;
  ctl.cfl_max = cfg.cfl_max;
  ctl.tol_div = cfg.tol_div;

  SimState state = setup.initial;
  BlowupMonitor monitor;
  monitor.update(state, 0.0);
  double int_h1v = 0.0, int_h1th = 0.0, int_h2v = 0.0, int_h2th = 0.0;
  double sup_h1v = 0.0, sup_h1th = 0.0;
  auto track = [&](const SimState& s, double dt_weight) {
    const double l2v = l2_sq(s.v);
    const double l2t = l2_sq(s.theta);
    const double h1v = h1_sq(s.v), h1t = h1_sq(s.theta, Bc::RobinTopNeumannBottom);
    const double h2v = h2_sq(s.v), h2t = h2_sq(s.theta, Bc::RobinTopNeumannBottom);
    res.sup_l2_sq_v = std::max(res.sup_l2_sq_v, l2v);
    res.sup_l2_sq_theta = std::max(res.sup_l2_sq_theta, l2t);
    sup_h1v = std::max(sup_h1v, h1v);
    sup_h1th = std::max(sup_h1th, h1t);
    int_h1v += dt_weight * h1v;
    int_h1th += dt_weight * h1t;
    int_h2v += dt_weight * h2v;
    int_h2th += dt_weight * h2t;
  };
  track(state, 0.0);
  res.records.push_back(record(state, setup.noise));

  const long nsteps = static_cast<long>(std::llround(cfg.T_end / cfg.dt));
  DiagnosticsRecord last_good = res.records.back();
  try {
    for (long k = 0; k < nsteps; ++k) {
      BrownianIncrements dw =
          sample_increments(stream, static_cast<std::uint64_t>(k), setup.noise.N, cfg.dt);
      const bool will_record = ((k + 1) % cfg.record_every == 0) || (k + 1 == nsteps);
      std::optional<double> split;
      if (will_record && state.v.max_abs() + state.theta.max_abs() > 0.0)
        split = split_residual(state, setup.noise, setup.forcing, setup.proj, cfg.dt, dw);
      state = heun ? step_stratonovich_heun(state, setup.noise, setup.forcing, setup.proj, ctl, dw)
                   : step_ito(state, setup.noise, setup.forcing, setup.proj, ctl, dw);
      if (!state.valid) {
        res.blew_up = true;
        DiagnosticsRecord r = last_good;
        r.t = state.t;
        r.blowup_flag = true;
        res.records.push_back(r);
        break;
      }
      track(state, cfg.dt);
      monitor.update(state, cfg.dt);
      if (monitor.exceeded(cfg.blowup_ceiling)) {
        res.blew_up = true;
        DiagnosticsRecord r = record(state, setup.noise, split, true);
        res.records.push_back(r);
        break;
      }
      if (will_record) {
        last_good = record(state, setup.noise, split, false);
        res.records.push_back(last_good);
      }
    }
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  res.final_state = std::move(state);
  res.u_v_l2h1 = res.sup_l2_sq_v + int_h1v;
  res.u_th_l2h1 = res.sup_l2_sq_theta + int_h1th;
  res.u_v_h1h2 = sup_h1v + int_h2v;
  res.u_th_h1h2 = sup_h1th + int_h2th;
  return res;
}

PathResult run_path(const RunConfig& cfg, int path_index) {
  RunSetup setup(cfg);
  return run_path(setup, cfg, path_index);
}

void write_path_ndjson(std::ostream& os, const RunConfig& cfg, const ValidationReport& rep,
                       const PathResult& res) {
  nlohmann::json head;
  head["config_hash"] = config_hash(cfg);
  head["path"] = res.path_index;
  head["path_seed"] = res.path_seed;
  head["nu_phi"] = rep.nu_phi;
  head["nu_psi"] = rep.nu_psi;
  head["violations"] = rep.violations;
  os << head.dump() << "\n";
  for (const auto& r : res.records) os << to_ndjson(r) << "\n";
  if (!res.error.empty()) {
    nlohmann::json err;
    err["path_error"] = res.error;
    os << err.dump() << "\n";
  }
}

std::pair<double, double> wilson_interval(int successes, int n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // 95%
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

ExceedanceCurve exceedance(const std::vector<double>& values, const std::vector<double>& grid) {
  ExceedanceCurve c;
  const int n = static_cast<int>(values.size());
  for (double gmm : grid) {
    int cnt = 0;
    for (double v : values)
      if (v >= gmm) ++cnt;
    c.freq.push_back(n ? static_cast<double>(cnt) / n : 0.0);
    auto [lo, hi] = wilson_interval(cnt, n);
    c.lo.push_back(lo);
    c.hi.push_back(hi);
  }
  return c;
}

nlohmann::json to_json(const ExceedanceCurve& c) {
  nlohmann::json j;
  j["freq"] = c.freq;
  j["wilson_lo"] = c.lo;
  j["wilson_hi"] = c.hi;
  return j;
}

}  // namespace

EnsembleSummary run_ensemble(const RunConfig& cfg, bool write_outputs) {
  RunSetup setup(cfg);
  EnsembleSummary sum;
  sum.hash = config_hash(cfg);
  sum.report = setup.report;
  sum.paths = cfg.paths;
  sum.gamma_grid = cfg.effective_gamma_grid();

  std::vector<PathResult> results(cfg.paths);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, cfg.paths);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.paths) return;
      try {
        results[i] = run_path(setup, cfg, i);
      } catch (const std::exception& e) {
        results[i].path_index = i;
        results[i].error = e.what();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> uv2, uth2, uv1, uth1;
  double final_l2_acc = 0.0;
  int ok = 0;
  for (const auto& r : results) {
    sum.path_seeds.push_back(r.path_seed);
    if (!r.ok()) {
      sum.failed_paths.push_back(r.path_index);
      continue;
    }
    ++ok;
    if (r.blew_up) ++sum.blowup_count;
    uv2.push_back(r.u_v_h1h2);
    uth2.push_back(r.u_th_h1h2);
    uv1.push_back(r.u_v_l2h1);
    uth1.push_back(r.u_th_l2h1);
    sum.max_sup_l2 = std::max(sum.max_sup_l2, r.sup_l2_sq_v + r.sup_l2_sq_theta);
    if (r.final_state.valid)
      final_l2_acc += l2_sq(r.final_state.v) + l2_sq(r.final_state.theta);
  }
  if (ok > 0) sum.mean_final_l2 = final_l2_acc / ok;
  sum.v_h1h2 = exceedance(uv2, sum.gamma_grid);
  sum.theta_h1h2 = exceedance(uth2, sum.gamma_grid);
  sum.v_l2h1 = exceedance(uv1, sum.gamma_grid);
  sum.theta_l2h1 = exceedance(uth1, sum.gamma_grid);

  if (write_outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.outdir);
    {
      std::ofstream out(fs::path(cfg.outdir) / "summary.json");
      out << to_json(sum).dump(2) << "\n";
    }
    for (const auto& r : results) {
      std::ofstream out(fs::path(cfg.outdir) / ("path-" + std::to_string(r.path_index) +
                                                ".ndjson"));
      write_path_ndjson(out, cfg, setup.report, r);
      if (cfg.emit_fields && r.ok() && r.final_state.valid) {
        ScalarField w = vint(div_h(r.final_state.v));
        w *= -1.0;
        write_snapshot((fs::path(cfg.outdir) / ("fields-" + std::to_string(r.path_index) +
                                                ".bin")).string(),
                       {{"v1", &r.final_state.v.u1},
                        {"v2", &r.final_state.v.u2},
                        {"theta", &r.final_state.theta},
                        {"w", &w}});
      }
    }
  }
  return sum;
}

nlohmann::json to_json(const EnsembleSummary& s) {
  nlohmann::json j;
  j["config_hash"] = s.hash;
  nlohmann::json rep;
  rep["nu_phi"] = s.report.nu_phi;
  rep["nu_psi"] = s.report.nu_psi;
  rep["violations"] = s.report.violations;
  j["noise_report"] = rep;
  j["paths"] = s.paths;
  j["failed_paths"] = s.failed_paths;
  j["path_seeds"] = s.path_seeds;
  j["gamma_grid"] = s.gamma_grid;
  j["exceedance"] = {{"v_h1h2", to_json(s.v_h1h2)},
                     {"theta_h1h2", to_json(s.theta_h1h2)},
                     {"v_l2h1", to_json(s.v_l2h1)},
                     {"theta_l2h1", to_json(s.theta_l2h1)}};
  j["mean_final_l2"] = s.mean_final_l2;
  j["max_sup_l2"] = s.max_sup_l2;
  j["blowup_count"] = s.blowup_count;
  return j;
}

ContdepReport continuous_dependence(const RunConfig& cfg, double delta, int pairs) {
  if (!(delta >= 0.0)) throw std::invalid_argument("continuous_dependence: delta must be >= 0");
  RunSetup setup(cfg);
  if (!setup.report.pass())
    throw std::invalid_argument("continuous_dependence: noise validation failed");
  ContdepReport rep;
  rep.deltas = {delta, delta / 2.0, delta / 4.0};
  const bool heun = cfg.effective_scheme() == "heun";
  StepControls ctl;
  ctl.dt = cfg.dt;
  ctl.cfl_max = cfg.cfl_max;
  ctl.tol_div = cfg.tol_div;
  const long nsteps = static_cast<long>(std::llround(cfg.T_end / cfg.dt));

  for (int p = 0; p < pairs; ++p) {
    std::vector<ContdepPoint> row;
    // Perturbation direction, normalized to unit H-norm, seeded per pair.
    HVectorField dv = setup.proj.apply_p(
        make_vector_field(setup.grid, "random_smooth 2 1 1.0", mix64(cfg.seed) ^ (0xC0DEULL + p)));
    ScalarField dth = make_scalar_field(setup.grid, "random_smooth 2 1 1.0",
                                        mix64(cfg.seed) ^ (0xD0DEULL + p), false);
    const double hn = std::sqrt(h1_sq(dv) + h1_sq(dth, Bc::RobinTopNeumannBottom));
    for (double d : rep.deltas) {
      const double scale = (hn > 0.0 && d > 0.0) ? d / hn : 0.0;
      SimState a = setup.initial;
      SimState b = setup.initial;
      if (scale != 0.0) {
        b.v.add_scaled(dv, scale);
        b.theta.add_scaled(dth, scale);
        b.v = setup.proj.apply_p(b.v);
      }

      PathStream stream(cfg.seed, static_cast<std::uint64_t>(p));
      ContdepPoint pt;
      pt.delta = d;
      auto gap = [&](const SimState& x, const SimState& y) {
        HVectorField ev = x.v;
        ev -= y.v;
        ScalarField eth = x.theta;
        eth -= y.theta;
        const double hgap = h1_sq(ev) + h1_sq(eth, Bc::RobinTopNeumannBottom);
        const double vgap = h2_sq(ev) + h2_sq(eth, Bc::RobinTopNeumannBottom);
        return std::make_pair(hgap, vgap);
      };
      auto [h0, v0] = gap(a, b);
      pt.sup_h_gap = h0;
      double int_v = 0.0;
      for (long k = 0; k < nsteps; ++k) {
        BrownianIncrements dw =
            sample_increments(stream, static_cast<std::uint64_t>(k), setup.noise.N, cfg.dt);
        a = heun ? step_stratonovich_heun(a, setup.noise, setup.forcing, setup.proj, ctl, dw)
                 : step_ito(a, setup.noise, setup.forcing, setup.proj, ctl, dw);
        b = heun ? step_stratonovich_heun(b, setup.noise, setup.forcing, setup.proj, ctl, dw)
                 : step_ito(b, setup.noise, setup.forcing, setup.proj, ctl, dw);
        if (!a.valid || !b.valid) throw std::runtime_error("continuous_dependence: blow-up");
        auto [hg, vg] = gap(a, b);
        pt.sup_h_gap = std::max(pt.sup_h_gap, hg);
        int_v += cfg.dt * vg;
      }
      pt.sup_h_gap = std::sqrt(pt.sup_h_gap);
      pt.l2v_gap = std::sqrt(int_v);
      row.push_back(pt);
    }
    rep.pairs.push_back(std::move(row));
  }
  return rep;
}

nlohmann::json to_json(const ContdepReport& r) {
  nlohmann::json j;
  j["deltas"] = r.deltas;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : r.pairs) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& pt : row)
      jr.push_back({{"delta", pt.delta}, {"sup_h_gap", pt.sup_h_gap}, {"l2v_gap", pt.l2v_gap}});
    arr.push_back(jr);
  }
  j["pairs"] = arr;
  return j;
}

void write_snapshot(const std::string& path,
                    const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
  out.write("HSTO1", 5);
  if (fields.empty()) throw std::invalid_argument("write_snapshot: no fields");
  const Grid& g = fields.front().second->grid();
  const std::uint32_t dims[4] = {static_cast<std::uint32_t>(g.n1),
                                 static_cast<std::uint32_t>(g.n2),
                                 static_cast<std::uint32_t>(fields.front().second->levels()),
                                 static_cast<std::uint32_t>(fields.size())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (const auto& [name, f] : fields) {
    char buf[32] = {0};
    std::strncpy(buf, name.c_str(), sizeof(buf) - 1);
    out.write(buf, sizeof(buf));
    out.write(reinterpret_cast<const char*>(f->data()),
              static_cast<std::streamsize>(sizeof(double) * f->size()));
  }
}

std::vector<std::pair<std::string, ScalarField>> read_snapshot(const std::string& path,
                                                               const Grid& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
  char magic[5];
  in.read(magic, 5);
  if (std::memcmp(magic, "HSTO1", 5) != 0) throw std::runtime_error("read_snapshot: bad magic");
  std::uint32_t dims[4];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (dims[0] != static_cast<std::uint32_t>(g.n1) || dims[1] != static_cast<std::uint32_t>(g.n2))
    throw std::runtime_error("read_snapshot: grid mismatch");
  std::vector<std::pair<std::string, ScalarField>> out;
  for (std::uint32_t f = 0; f < dims[3]; ++f) {
    char buf[32];
    in.read(buf, sizeof(buf));
    ScalarField fld(g, static_cast<int>(dims[2]));
    in.read(reinterpret_cast<char*>(fld.data()),
            static_cast<std::streamsize>(sizeof(double) * fld.size()));
    out.emplace_back(std::string(buf), std::move(fld));
  }
  return out;
}

}  // namespace hsto
