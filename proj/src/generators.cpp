#include "hsto/generators.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hsto/ops.hpp"
#include "hsto/rng.hpp"

namespace hsto {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

struct SpecArgs {
  std::string name;
  std::vector<std::string> args;
  double num(std::size_t i) const {
    if (i >= args.size())
      throw std::invalid_argument("generator '" + name + "': missing argument");
    try {
      return std::stod(args[i]);
    } catch (const std::exception&) {
      throw std::invalid_argument("generator '" + name + "': bad numeric argument '" +
                                  args[i] + "'");
    }
  }
  int inum(std::size_t i) const { return static_cast<int>(std::llround(num(i))); }
};

SpecArgs parse_spec(const std::string& spec) {
  std::vector<std::string> tok = split(spec, ' ');
  if (tok.empty()) throw std::invalid_argument("empty generator spec");
  SpecArgs s;
  s.name = tok[0];
  s.args.assign(tok.begin() + 1, tok.end());
  return s;
}

ScalarField cosine_mode(const Grid& g, int k1, int k2, int m, double amp, double phase,
                        bool slab) {
  ScalarField f = slab ? ScalarField::slab(g) : ScalarField::full(g);
  for (int k = 0; k < f.levels(); ++k) {
    const double vert = (m == 0) ? 1.0 : std::cos(m * kPi * (g.z(k) + g.h) / g.h);
    double* p = f.level(k);
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j)
        p[static_cast<std::size_t>(i) * g.n2 + j] =
            amp * vert * std::cos(k1 * g.x1(i) + k2 * g.x2(j) + phase);
  }
  return f;
}

ScalarField random_smooth(const Grid& g, int kmax, int mmax, double amp, std::uint64_t seed,
                          bool slab) {
  ScalarField f = slab ? ScalarField::slab(g) : ScalarField::full(g);
  PathStream rng(seed, 0x5eedULL);
  std::uint64_t idx = 0;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = 0; k2 <= kmax; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      if (k2 == 0 && k1 < 0) continue;  // cosine modes: k and -k coincide
      for (int m = 0; m <= (slab ? 0 : mmax); ++m) {
        const double a = amp * (2.0 * rng.uniform(0, idx++) - 1.0);
        const double phase = 2.0 * kPi * rng.uniform(0, idx++);
        f += cosine_mode(g, k1, k2, m, a, phase, slab);
      }
    }
  return f;
}

void solenoidal_direction(int k1, int k2, double& e1, double& e2) {
  const double kn = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
  if (kn == 0.0) {
    e1 = 1.0;
    e2 = 0.0;
    return;
  }
  e1 = -k2 / kn;
  e2 = k1 / kn;
}

struct FileEntry {
  int n = 0;
  int component = 0;  // 1..3 for vectors, 0 for scalars
  std::vector<double> data;
  bool x3_independent = true;
};

std::vector<FileEntry> load_field_file(const std::string& path, const std::string& family,
                                       const Grid& g) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("field file not found: " + path);
  std::vector<FileEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.at("family").get<std::string>() != family) continue;
    FileEntry e;
    e.n = j.at("n").get<int>();
    e.component = j.value("component", 0);
    e.x3_independent = j.value("x3_independent", true);
    e.data = j.at("data").get<std::vector<double>>();
    const std::size_t want = e.x3_independent ? g.plane() : g.volume();
    if (e.data.size() != want)
      throw std::invalid_argument("field file " + path + ": entry for " + family +
                                  " has wrong length");
    out.push_back(std::move(e));
  }
  return out;
}

ScalarField field_from_entry(const Grid& g, const FileEntry& e) {
  ScalarField f = e.x3_independent ? ScalarField::slab(g) : ScalarField::full(g);
  std::copy(e.data.begin(), e.data.end(), f.data());
  return f;
}

}  // namespace

ScalarField make_scalar_field(const Grid& g, const std::string& spec, std::uint64_t seed,
                              bool force_slab) {
  SpecArgs s = parse_spec(spec);
  if (s.name == "zero" || s.name == "none")
    return force_slab ? ScalarField::slab(g) : ScalarField::full(g);
  if (s.name == "constant") {
    ScalarField f = force_slab ? ScalarField::slab(g) : ScalarField::full(g);
    f.fill(s.num(0));
    return f;
  }
  if (s.name == "single_fourier_mode")
    return cosine_mode(g, s.inum(0), s.inum(1), 0, s.num(2), 0.0, force_slab);
  if (s.name == "single_mode") {
    if (force_slab && s.inum(2) != 0)
      throw std::invalid_argument("single_mode: vertical mode on an x3-independent family");
    return cosine_mode(g, s.inum(0), s.inum(1), s.inum(2), s.num(3), 0.0, force_slab);
  }
  if (s.name == "random_smooth")
    return random_smooth(g, s.inum(0), s.inum(1), s.num(2), seed, force_slab);
  throw std::invalid_argument("unknown scalar generator: " + s.name);
}

HVectorField make_vector_field(const Grid& g, const std::string& spec, std::uint64_t seed) {
  SpecArgs s = parse_spec(spec);
  if (s.name == "zero" || s.name == "none") return HVectorField::full(g);
  if (s.name == "single_fourier_mode" || s.name == "single_mode") {
    const int k1 = s.inum(0), k2 = s.inum(1);
    const int m = (s.name == "single_mode") ? s.inum(2) : 0;
    const double amp = (s.name == "single_mode") ? s.num(3) : s.num(2);
    double e1, e2;
    solenoidal_direction(k1, k2, e1, e2);
    ScalarField base = cosine_mode(g, k1, k2, m, amp, 0.0, false);
    return {e1 * base, e2 * base};
  }
  if (s.name == "random_smooth") {
    ScalarField a = random_smooth(g, s.inum(0), s.inum(1), s.num(2), mix64(seed) ^ 0x11, false);
    ScalarField b = random_smooth(g, s.inum(0), s.inum(1), s.num(2), mix64(seed) ^ 0x22, false);
    return {std::move(a), std::move(b)};
  }
  throw std::invalid_argument("unknown vector generator: " + s.name);
}

std::vector<Vec3Field> make_vec3_family(const Grid& g, const std::string& spec, int n_target,
                                        const std::string& family_name) {
  std::vector<Vec3Field> fam;
  auto zero_mode = [&] {
    return Vec3Field{ScalarField::slab(g), ScalarField::slab(g), ScalarField::slab(g)};
  };
  for (const std::string& entry : split(spec, ';')) {
    SpecArgs s = parse_spec(entry);
    if (s.name == "none" || s.name == "zero") continue;
    if (s.name == "constant") {
      Vec3Field c = zero_mode();
      c.c1.fill(s.num(0));
      c.c2.fill(s.num(1));
      c.c3.fill(s.num(2));
      fam.push_back(std::move(c));
    } else if (s.name == "single_fourier_mode") {
      const int k1 = s.inum(0), k2 = s.inum(1);
      double e1, e2;
      solenoidal_direction(k1, k2, e1, e2);
      ScalarField base = cosine_mode(g, k1, k2, 0, s.num(2), 0.0, true);
      fam.push_back(Vec3Field{e1 * base, e2 * base, ScalarField::slab(g)});
    } else if (s.name == "kraichnan_spectrum") {
      const double slope = s.num(0);
      const int cutoff = s.inum(1);
      const double amp = s.args.size() > 2 ? s.num(2) : 1.0;
      for (int k1 = 0; k1 <= cutoff && static_cast<int>(fam.size()) < n_target; ++k1)
        for (int k2 = (k1 == 0 ? 1 : -cutoff); k2 <= cutoff; ++k2) {
          const double kk = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
          if (kk == 0.0 || kk > static_cast<double>(cutoff) * cutoff) continue;
          double e1, e2;
          solenoidal_direction(k1, k2, e1, e2);
          const double a = amp * std::pow(std::sqrt(kk), -slope / 2.0);
          for (double phase : {0.0, -kPi / 2.0}) {  // cos and sin phases
            if (static_cast<int>(fam.size()) >= n_target) break;
            ScalarField base = cosine_mode(g, k1, k2, 0, a, phase, true);
            fam.push_back(Vec3Field{e1 * base, e2 * base, ScalarField::slab(g)});
          }
        }
    } else if (s.name == "file") {
      if (s.args.empty()) throw std::invalid_argument("file generator: missing path");
      auto entries = load_field_file(s.args[0], family_name, g);
      for (const auto& e : entries) {
        while (static_cast<int>(fam.size()) <= e.n) fam.push_back(zero_mode());
        ScalarField f = field_from_entry(g, e);
        if (e.component == 1)
          fam[e.n].c1 = std::move(f);
        else if (e.component == 2)
          fam[e.n].c2 = std::move(f);
        else if (e.component == 3)
          fam[e.n].c3 = std::move(f);
        else
          throw std::invalid_argument("field file: vector component must be 1..3");
      }
    } else {
      throw std::invalid_argument("unknown " + family_name + " generator: " + s.name);
    }
  }
  if (static_cast<int>(fam.size()) > n_target)
    throw std::invalid_argument(family_name + ": generators yield " +
                                std::to_string(fam.size()) + " modes > N = " +
                                std::to_string(n_target));
  while (static_cast<int>(fam.size()) < n_target) fam.push_back(zero_mode());
  return fam;
}

std::vector<ScalarField> make_scalar_family(const Grid& g, const std::string& spec, int n_target,
                                            const std::string& family_name) {
  std::vector<ScalarField> fam;
  for (const std::string& entry : split(spec, ';')) {
    SpecArgs s = parse_spec(entry);
    if (s.name == "none" || s.name == "zero") continue;
    if (s.name == "file") {
      if (s.args.empty()) throw std::invalid_argument("file generator: missing path");
      auto entries = load_field_file(s.args[0], family_name, g);
      for (const auto& e : entries) {
        while (static_cast<int>(fam.size()) <= e.n) fam.push_back(ScalarField::slab(g));
        fam[e.n] = field_from_entry(g, e);
      }
    } else {
      fam.push_back(make_scalar_field(g, entry, 0, /*force_slab=*/true));
    }
  }
  if (static_cast<int>(fam.size()) > n_target)
    throw std::invalid_argument(family_name + ": generators yield more modes than N");
  while (static_cast<int>(fam.size()) < n_target) fam.push_back(ScalarField::slab(g));
  return fam;
}

}  // namespace hsto
