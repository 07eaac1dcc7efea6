#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hsto/config.hpp"
#include "hsto/diagnostics.hpp"
#include "hsto/dynamics.hpp"
#include "hsto/generators.hpp"

namespace hsto {

/// Everything a run needs, built deterministically from a config.
struct RunSetup {
  Grid grid;
  Projector proj;
  ValidationReport report;  // filled while building the noise model
  NoiseModel noise;
  Forcing forcing;
  SimState initial;

  explicit RunSetup(const RunConfig& cfg);
};

/// Scalar outcomes of one path: records plus the energy functionals the
/// tail curves are built from.
struct PathResult {
  int path_index = 0;
  std::uint64_t path_seed = 0;
  std::vector<DiagnosticsRecord> records;
  SimState final_state;
  bool blew_up = false;
  std::string error;  // non-empty when the path aborted

  double sup_l2_sq_v = 0.0, sup_l2_sq_theta = 0.0;
  double u_v_l2h1 = 0.0;    // sup ||v||_{L2}^2 + int ||v||_{H1}^2
  double u_th_l2h1 = 0.0;
  double u_v_h1h2 = 0.0;    // sup ||v||_{H1}^2 + int ||v||_{H2}^2
  double u_th_h1h2 = 0.0;

  bool ok() const { return error.empty(); }
};

/// Deterministic in (cfg.seed, path_index); emits one record every
/// record_every steps plus the initial and final states, and terminates at
/// T_end or on the blow-up monitor.
PathResult run_path(const RunSetup& setup, const RunConfig& cfg, int path_index);
PathResult run_path(const RunConfig& cfg, int path_index);

void write_path_ndjson(std::ostream& os, const RunConfig& cfg, const ValidationReport& rep,
                       const PathResult& res);

/// 95% Wilson score interval for a binomial frequency.
std::pair<double, double> wilson_interval(int successes, int n);

struct ExceedanceCurve {
  std::vector<double> freq, lo, hi;  // indexed like the gamma grid
};

struct EnsembleSummary {
  std::string hash;
  ValidationReport report;
  int paths = 0;
  std::vector<int> failed_paths;
  std::vector<std::uint64_t> path_seeds;
  std::vector<double> gamma_grid;
  ExceedanceCurve v_h1h2, theta_h1h2, v_l2h1, theta_l2h1;
  double mean_final_l2 = 0.0;
  double max_sup_l2 = 0.0;
  int blowup_count = 0;
};

/// Runs cfg.paths independent paths and aggregates the tail exceedance
/// frequencies of the energy functionals. When write_outputs is set, emits summary.json and
/// path-<i>.ndjson (and optional field snapshots) under cfg.outdir.
EnsembleSummary run_ensemble(const RunConfig& cfg, bool write_outputs = true);

nlohmann::json to_json(const EnsembleSummary& s);

struct ContdepPoint {
  double delta = 0.0;
  double sup_h_gap = 0.0;  // sup_t of the H-norm of the difference
  double l2v_gap = 0.0;    // L^2(0,T;V) norm of the difference
};

struct ContdepReport {
  std::vector<std::vector<ContdepPoint>> pairs;  // [pair][delta level]
  std::vector<double> deltas;                    // {d, d/2, d/4}
};

/// Pairs of runs with identical Brownian draws whose initial data differ by
/// a perturbation of H-norm delta; reports the trajectory gaps for
/// delta, delta/2, delta/4.
ContdepReport continuous_dependence(const RunConfig& cfg, double delta, int pairs);

nlohmann::json to_json(const ContdepReport& r);

/// Raw field snapshot: magic "HSTO1", u32 {n1, n2, nlevels, nfields}, then
/// per field a 32-byte zero-padded name and nlevels*n1*n2 little-endian
/// doubles, level-major row-major.
void write_snapshot(const std::string& path, const std::vector<std::pair<std::string,
                    const ScalarField*>>& fields);
std::vector<std::pair<std::string, ScalarField>> read_snapshot(const std::string& path,
                                                               const Grid& g);

}  // namespace hsto
