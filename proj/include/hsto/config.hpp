#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hsto {

/// Flat typed run configuration. Every run parameter is declared here,
/// hashed, and echoed into the outputs; unknown keys are rejected before
/// any allocation.
struct RunConfig {
  // grid
  int n1 = 16, n2 = 16, n3 = 9;
  double h = 1.0;
  double alpha = 0.0;

  // noise
  std::string noise_phi = "none";
  std::string noise_psi = "none";
  std::string noise_sigma = "none";
  int noise_N = 0;
  bool stratonovich = false;

  // physics
  std::string kappa = "zero";
  double coriolis_k0 = 0.0;
  std::string forcing_v = "zero";
  std::string forcing_theta = "zero";

  // initial data
  std::string init_v = "zero";
  std::string init_theta = "zero";

  // time
  double dt = 1e-3;
  double T_end = 0.1;
  double cfl_max = 0.5;

  // ensemble
  int paths = 1;
  std::uint64_t seed = 0;
  std::vector<double> gamma_grid;  // empty -> geometric default ladder

  // io
  std::string outdir = "out";
  bool emit_fields = false;
  int record_every = 1;

  // tolerances
  double tol_div = 1e-10;
  double blowup_ceiling = 1e9;

  // scheme: "auto" (ito, or ito-corrected when stratonovich), "ito",
  // "ito-corrected", "heun"
  std::string scheme = "auto";

  /// Effective stepping scheme after resolving "auto".
  std::string effective_scheme() const;
  std::vector<double> effective_gamma_grid() const;
};

/// Strict parse: unknown keys, bad types and out-of-range values abort.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

/// Canonical (sorted-key) JSON of the effective configuration.
nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace hsto
