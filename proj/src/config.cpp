#include "hsto/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace hsto {

std::string RunConfig::effective_scheme() const {
  if (scheme == "auto") return stratonovich ? "ito-corrected" : "ito";
  return scheme;
}

std::vector<double> RunConfig::effective_gamma_grid() const {
  if (!gamma_grid.empty()) return gamma_grid;
  // Geometric ladder: the tail bounds decay in log log log gamma, so only
  // geometric spacing reveals a trend.
  std::vector<double> gg;
  double x = 1.0;
  for (int i = 0; i < 9; ++i) {
    gg.push_back(x);
    x *= 4.0;
  }
  return gg;
}

namespace {

void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

template <typename T>
void read(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) fail("top level must be an object");
  static const std::set<std::string> known = {
      "n1",        "n2",          "n3",           "h",           "alpha",
      "noise_phi", "noise_psi",   "noise_sigma",  "noise_N",     "stratonovich",
      "kappa",     "coriolis_k0", "forcing_v",    "forcing_theta",
      "init_v",    "init_theta",  "dt",           "T_end",       "cfl_max",
      "paths",     "seed",        "gamma_grid",   "outdir",      "emit_fields",
      "record_every", "tol_div",  "blowup_ceiling", "scheme"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) fail("unknown key '" + it.key() + "'");

  RunConfig c;
  read(j, "n1", c.n1);
  read(j, "n2", c.n2);
  read(j, "n3", c.n3);
  read(j, "h", c.h);
  read(j, "alpha", c.alpha);
  read(j, "noise_phi", c.noise_phi);
  read(j, "noise_psi", c.noise_psi);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "noise_N", c.noise_N);
  read(j, "stratonovich", c.stratonovich);
  read(j, "kappa", c.kappa);
  read(j, "coriolis_k0", c.coriolis_k0);
  read(j, "forcing_v", c.forcing_v);
  read(j, "forcing_theta", c.forcing_theta);
  read(j, "init_v", c.init_v);
  read(j, "init_theta", c.init_theta);
  read(j, "dt", c.dt);
  read(j, "T_end", c.T_end);
  read(j, "cfl_max", c.cfl_max);
  read(j, "paths", c.paths);
  read(j, "seed", c.seed);
  read(j, "gamma_grid", c.gamma_grid);
  read(j, "outdir", c.outdir);
  read(j, "emit_fields", c.emit_fields);
  read(j, "record_every", c.record_every);
  read(j, "tol_div", c.tol_div);
  read(j, "blowup_ceiling", c.blowup_ceiling);
  read(j, "scheme", c.scheme);

  if (c.n1 < 4 || c.n1 % 2) fail("n1 must be even and >= 4");
  if (c.n2 < 4 || c.n2 % 2) fail("n2 must be even and >= 4");
  if (c.n3 < 4) fail("n3 must be >= 4");
  if (!(c.h > 0.0)) fail("h must be positive");
  if (!std::isfinite(c.alpha)) fail("alpha must be finite");
  if (c.noise_N < 0) fail("noise_N must be >= 0");
  if (!(c.dt > 0.0)) fail("dt must be positive");
  if (!(c.T_end >= 0.0)) fail("T_end must be >= 0");
  if (!(c.cfl_max > 0.0)) fail("cfl_max must be positive");
  if (c.paths < 1) fail("paths must be >= 1");
  if (c.record_every < 1) fail("record_every must be >= 1");
  if (!(c.tol_div > 0.0)) fail("tol_div must be positive");
  if (!(c.blowup_ceiling > 0.0)) fail("blowup_ceiling must be positive");
  for (double gmm : c.gamma_grid)
    if (!(gmm > 0.0)) fail("gamma_grid entries must be positive");
  for (std::size_t i = 1; i < c.gamma_grid.size(); ++i)
    if (c.gamma_grid[i] <= c.gamma_grid[i - 1]) fail("gamma_grid must be strictly increasing");
  if (c.scheme != "auto" && c.scheme != "ito" && c.scheme != "ito-corrected" &&
      c.scheme != "heun")
    fail("scheme must be auto|ito|ito-corrected|heun");
  if ((c.scheme == "ito-corrected" || c.scheme == "heun") && !c.stratonovich)
    fail("scheme '" + c.scheme + "' requires stratonovich = true");
  if (c.scheme == "ito" && c.stratonovich)
    fail("stratonovich = true cannot be stepped with plain ito; use ito-corrected or heun");
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["n1"] = c.n1;
  j["n2"] = c.n2;
  j["n3"] = c.n3;
  j["h"] = c.h;
  j["alpha"] = c.alpha;
  j["noise_phi"] = c.noise_phi;
  j["noise_psi"] = c.noise_psi;
  j["noise_sigma"] = c.noise_sigma;
  j["noise_N"] = c.noise_N;
  j["stratonovich"] = c.stratonovich;
  j["kappa"] = c.kappa;
  j["coriolis_k0"] = c.coriolis_k0;
  j["forcing_v"] = c.forcing_v;
  j["forcing_theta"] = c.forcing_theta;
  j["init_v"] = c.init_v;
  j["init_theta"] = c.init_theta;
  j["dt"] = c.dt;
  j["T_end"] = c.T_end;
  j["cfl_max"] = c.cfl_max;
  j["paths"] = c.paths;
  j["seed"] = c.seed;
  j["gamma_grid"] = c.effective_gamma_grid();
  j["outdir"] = c.outdir;
  j["emit_fields"] = c.emit_fields;
  j["record_every"] = c.record_every;
  j["tol_div"] = c.tol_div;
  j["blowup_ceiling"] = c.blowup_ceiling;
  j["scheme"] = c.effective_scheme();
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  // The hash identifies the scientific run; the output location is not part
  // of it, so reruns into different directories compare byte-identical.
  RunConfig keyed = cfg;
  keyed.outdir.clear();
  const std::string s = to_json(keyed).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace hsto
