#include "hsto/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hsto/ops.hpp"

namespace hsto {

namespace {

bool nonzero(const ScalarField& f) { return !f.empty() && f.max_abs() > 0.0; }

bool nonzero(const Vec3Field& c) { return nonzero(c.c1) || nonzero(c.c2) || nonzero(c.c3); }

/// Largest eigenvalue of a symmetric 3x3 matrix, trigonometric closed form.
double sym3_lambda_max(double a11, double a22, double a33, double a12, double a13, double a23) {
  const double p1 = a12 * a12 + a13 * a13 + a23 * a23;
  if (p1 == 0.0) return std::max({a11, a22, a33});
  const double q = (a11 + a22 + a33) / 3.0;
  const double p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + (a33 - q) * (a33 - q) +
                    2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const double b11 = (a11 - q) / p, b22 = (a22 - q) / p, b33 = (a33 - q) / p;
  const double b12 = a12 / p, b13 = a13 / p, b23 = a23 / p;
  const double detb = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) +
                      b13 * (b12 * b23 - b22 * b13);
  double r = detb / 2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi);
}

double coeff_at(const ScalarField& f, std::size_t n, int k) {
  if (f.empty()) return 0.0;
  return f.data()[f.is_slab() ? n : f.grid().plane() * k + n];
}

/// Max deviation of a coefficient across levels (0 for slabs).
double x3_deviation(const ScalarField& f) {
  if (f.empty() || f.is_slab()) return 0.0;
  const Grid& g = f.grid();
  double dev = 0.0;
  for (std::size_t n = 0; n < g.plane(); ++n) {
    double lo = f.at(0, 0, 0), hi = lo;
    for (int k = 0; k < g.n3; ++k) {
      const double x = f.data()[g.plane() * k + n];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    dev = std::max(dev, hi - lo);
  }
  return dev;
}

void check_x3_independent(const ScalarField& f, const char* name,
                          std::vector<std::string>& violations) {
  const double dev = x3_deviation(f);
  if (dev > 1e-12)
    violations.push_back(std::string(name) + " depends on x3 (max deviation " +
                         std::to_string(dev) + ")");
}

void check_finite(const ScalarField& f, const char* name, std::vector<std::string>& violations) {
  if (!f.empty() && !f.finite())
    violations.push_back(std::string(name) + " has non-finite entries");
}

}  // namespace

bool NoiseModel::has_sigma() const {
  for (const auto& s : sigma)
    if (nonzero(s)) return true;
  return false;
}

bool NoiseModel::has_kappa() const { return nonzero(kappa); }

bool NoiseModel::has_pi() const {
  return nonzero(pi.c1) || nonzero(pi.c2) || nonzero(pi.c3);
}

bool NoiseModel::has_gamma() const {
  for (const auto& gm : gamma)
    if (nonzero(gm.g11) || nonzero(gm.g12) || nonzero(gm.g21) || nonzero(gm.g22)) return true;
  return false;
}

double gram_nu(const std::vector<Vec3Field>& family, const Grid& g) {
  double nu = 0.0;
  for (int k = 0; k < g.n3; ++k) {
    for (std::size_t n = 0; n < g.plane(); ++n) {
      double a11 = 0, a22 = 0, a33 = 0, a12 = 0, a13 = 0, a23 = 0;
      for (const auto& c : family) {
        const double c1 = coeff_at(c.c1, n, k);
        const double c2 = coeff_at(c.c2, n, k);
        const double c3 = coeff_at(c.c3, n, k);
        a11 += c1 * c1;
        a22 += c2 * c2;
        a33 += c3 * c3;
        a12 += c1 * c2;
        a13 += c1 * c3;
        a23 += c2 * c3;
      }
      nu = std::max(nu, sym3_lambda_max(a11, a22, a33, a12, a13, a23));
    }
    // With every component x3-independent one pass over levels suffices.
    bool any_full = false;
    for (const auto& c : family)
      any_full |= (!c.c1.empty() && !c.c1.is_slab()) || (!c.c2.empty() && !c.c2.is_slab()) ||
                  (!c.c3.empty() && !c.c3.is_slab());
    if (!any_full) break;
  }
  return nu;
}

ValidationReport validate(NoiseModel& nm) {
  ValidationReport rep;
  if (static_cast<int>(nm.phi.size()) != nm.N || static_cast<int>(nm.psi.size()) != nm.N ||
      static_cast<int>(nm.sigma.size()) != nm.N) {
    rep.violations.push_back("phi/psi/sigma family sizes must equal N");
    return rep;
  }
  if (nm.N > 0) {
    const Grid* g = nullptr;
    for (const auto& c : nm.phi)
      if (!c.c1.empty()) g = &c.c1.grid();
    if (g) {
      rep.nu_phi = gram_nu(nm.phi, *g);
      rep.nu_psi = gram_nu(nm.psi, *g);
    }
  }
  for (int n = 0; n < nm.N; ++n) {
    const std::string tag = "[" + std::to_string(n) + "]";
    check_finite(nm.phi[n].c1, "phi1", rep.violations);
    check_finite(nm.phi[n].c2, "phi2", rep.violations);
    check_finite(nm.phi[n].c3, "phi3", rep.violations);
    check_finite(nm.psi[n].c1, "psi1", rep.violations);
    check_finite(nm.psi[n].c2, "psi2", rep.violations);
    check_finite(nm.psi[n].c3, "psi3", rep.violations);
    check_finite(nm.sigma[n], "sigma", rep.violations);
    check_x3_independent(nm.phi[n].c1, ("phi1" + tag).c_str(), rep.violations);
    check_x3_independent(nm.phi[n].c2, ("phi2" + tag).c_str(), rep.violations);
    check_x3_independent(nm.psi[n].c1, ("psi1" + tag).c_str(), rep.violations);
    check_x3_independent(nm.psi[n].c2, ("psi2" + tag).c_str(), rep.violations);
    check_x3_independent(nm.sigma[n], ("sigma" + tag).c_str(), rep.violations);
  }
  for (std::size_t n = 0; n < nm.gamma.size(); ++n) {
    const std::string tag = "[" + std::to_string(n) + "]";
    for (const ScalarField* f : {&nm.gamma[n].g11, &nm.gamma[n].g12, &nm.gamma[n].g21,
                                 &nm.gamma[n].g22}) {
      check_finite(*f, ("gamma" + tag).c_str(), rep.violations);
      check_x3_independent(*f, ("gamma" + tag).c_str(), rep.violations);
    }
  }
  check_finite(nm.pi.c1, "pi1", rep.violations);
  check_finite(nm.pi.c2, "pi2", rep.violations);
  check_finite(nm.pi.c3, "pi3", rep.violations);
  check_x3_independent(nm.pi.c1, "pi1", rep.violations);
  check_x3_independent(nm.pi.c2, "pi2", rep.violations);
  check_finite(nm.kappa, "kappa", rep.violations);
  if (rep.nu_phi >= 2.0)
    rep.violations.push_back("parabolicity failure: nu_phi = " + std::to_string(rep.nu_phi) +
                             " >= 2");
  if (rep.nu_psi >= 2.0)
    rep.violations.push_back("parabolicity failure: nu_psi = " + std::to_string(rep.nu_psi) +
                             " >= 2");
  nm.validated = rep.pass();
  return rep;
}

NoiseModel strat_to_ito(const NoiseModel& nm) {
  NoiseModel out = nm;
  if (nm.N == 0) {
    out.strat_corrected = true;
    return out;
  }
  const Grid* g = nullptr;
  for (const auto& c : nm.phi)
    if (!c.c1.empty()) g = &c.c1.grid();
  if (!g) throw std::invalid_argument("strat_to_ito: phi family has no grid");

  // phi^3 must vanish on both horizontal boundaries for the conversion.
  for (int n = 0; n < nm.N; ++n) {
    const ScalarField& p3 = nm.phi[n].c3;
    if (p3.empty()) continue;
    double trace = 0.0;
    for (std::size_t m = 0; m < g->plane(); ++m) {
      trace = std::max(trace, std::abs(p3.level(0)[m]));
      trace = std::max(trace, std::abs(p3.level(p3.is_slab() ? 0 : g->n3 - 1)[m]));
    }
    if (trace > 1e-12)
      throw std::invalid_argument("strat_to_ito: phi3[" + std::to_string(n) +
                                  "] does not vanish at z in {-h, 0}");
  }

  ScalarField pi1 = ScalarField::slab(*g), pi2 = ScalarField::slab(*g);
  ScalarField pi3;  // full if any psi3 varies in x3
  bool pi3_full = false;
  for (int n = 0; n < nm.N; ++n)
    if (!nm.psi[n].c3.empty() && !nm.psi[n].c3.is_slab()) pi3_full = true;
  pi3 = pi3_full ? ScalarField::full(*g) : ScalarField::slab(*g);

  out.gamma.clear();
  out.gamma.reserve(nm.N);
  for (int n = 0; n < nm.N; ++n) {
    const ScalarField sig = nm.sigma[n].empty() ? ScalarField::slab(*g) : nm.sigma[n];
    auto accum = [&](ScalarField& dst, const ScalarField& src) {
      if (!src.empty()) dst.add_scaled(multiply(sig, src), 0.5);
    };
    accum(pi1, nm.psi[n].c1);
    accum(pi1, nm.phi[n].c1);
    accum(pi2, nm.psi[n].c2);
    accum(pi2, nm.phi[n].c2);
    if (!nm.psi[n].c3.empty()) {
      ScalarField term = multiply(sig, nm.psi[n].c3);
      if (term.is_slab() && pi3_full) term = broadcast_full(term);
      pi3.add_scaled(term, 0.5);
    }

    GammaSlab gm;
    const ScalarField p1 = nm.phi[n].c1.empty() ? ScalarField::slab(*g) : nm.phi[n].c1;
    const ScalarField p2 = nm.phi[n].c2.empty() ? ScalarField::slab(*g) : nm.phi[n].c2;
    HVectorField d1 = grad_h(p1);  // (d1 phi^1, d2 phi^1)
    HVectorField d2 = grad_h(p2);
    gm.g11 = 0.5 * d1.u1;  // gamma^{i,j} = (1/2) d_i phi^j
    gm.g21 = 0.5 * d1.u2;
    gm.g12 = 0.5 * d2.u1;
    gm.g22 = 0.5 * d2.u2;
    out.gamma.push_back(std::move(gm));
  }
  out.pi = Vec3Field{std::move(pi1), std::move(pi2), std::move(pi3)};
  out.strat_corrected = true;
  out.validated = false;  // revalidate after filling derived coefficients
  return out;
}

ScalarField transport(const Vec3Field& c, const ScalarField& f, Bc bc) {
  const Grid& g = f.grid();
  ScalarField out(g, f.levels());
  bool have = false;
  auto add = [&](const ScalarField& coeff, ScalarField deriv) {
    ScalarField term = dmul(coeff, deriv);
    if (!have && term.levels() != out.levels()) out = ScalarField(g, term.levels());
    if (term.levels() != out.levels()) {
      if (out.is_slab()) out = broadcast_full(out);
      if (term.is_slab()) term = broadcast_full(term);
    }
    out += term;
    have = true;
  };
  if (!c.c1.empty() && c.c1.max_abs() != 0.0) add(c.c1, d_h(f, 1));
  if (!c.c2.empty() && c.c2.max_abs() != 0.0) add(c.c2, d_h(f, 2));
  if (!c.c3.empty() && c.c3.max_abs() != 0.0) add(c.c3, dz(f, bc));
  return out;
}

HVectorField transport(const Vec3Field& c, const HVectorField& v) {
  return {transport(c, v.u1, Bc::NeumannNeumann), transport(c, v.u2, Bc::NeumannNeumann)};
}

HVectorField noise_coeff_v(const NoiseModel& nm, int n, const HVectorField& v,
                           const ScalarField& theta) {
  HVectorField out = transport(nm.phi[n], v);
  if (!nm.sigma[n].empty() && nm.sigma[n].max_abs() != 0.0 && theta.max_abs() != 0.0) {
    ScalarField st = dmul(nm.sigma[n], vint(theta));
    HVectorField gs = grad_h(st);
    out.u1 = out.u1 + gs.u1;
    out.u2 = out.u2 + gs.u2;
  } else if (out.u1.is_slab() && !v.u1.is_slab()) {
    // keep level structure aligned with v
    out = {broadcast_full(out.u1), broadcast_full(out.u2)};
  }
  return out;
}

ScalarField noise_coeff_theta(const NoiseModel& nm, int n, const ScalarField& theta) {
  return transport(nm.psi[n], theta, Bc::RobinTopNeumannBottom);
}

std::pair<HVectorField, ScalarField> apply_diffusion(const NoiseModel& nm, const Projector& proj,
                                                     const HVectorField& v,
                                                     const ScalarField& theta,
                                                     const BrownianIncrements& dw) {
  if (!nm.validated) throw std::invalid_argument("apply_diffusion: unvalidated noise model");
  if (static_cast<int>(dw.dW.size()) != nm.N)
    throw std::invalid_argument("apply_diffusion: increment count != N");
  const Grid& g = v.grid();
  HVectorField dv = HVectorField::full(g);
  ScalarField dtheta = ScalarField::full(g);
  for (int n = 0; n < nm.N; ++n) {
    const double w = dw.dW[n];
    if (w == 0.0) continue;
    HVectorField cv = noise_coeff_v(nm, n, v, theta);
    dv.add_scaled({broadcast_full(cv.u1), broadcast_full(cv.u2)}, w);
    ScalarField ct = noise_coeff_theta(nm, n, theta);
    dtheta.add_scaled(ct.is_slab() ? broadcast_full(ct) : ct, w);
  }
  dv = proj.apply_p(dv);
  return {std::move(dv), std::move(dtheta)};
}

HVectorField lphi_v(const NoiseModel& nm, const HVectorField& v) {
  const Grid& g = v.grid();
  HVectorField out = HVectorField::full(g);
  for (int n = 0; n < nm.N; ++n) {
    if (!nonzero(nm.phi[n])) continue;
    HVectorField inner = transport(nm.phi[n], v);
    HVectorField outer{transport(nm.phi[n], inner.u1, Bc::Interior),
                       transport(nm.phi[n], inner.u2, Bc::Interior)};
    out.add_scaled({broadcast_full(outer.u1), broadcast_full(outer.u2)}, 0.5);
  }
  return out;
}

ScalarField lpsi_theta(const NoiseModel& nm, const ScalarField& theta) {
  const Grid& g = theta.grid();
  ScalarField out = ScalarField::full(g);
  for (int n = 0; n < nm.N; ++n) {
    if (!nonzero(nm.psi[n])) continue;
    ScalarField inner = transport(nm.psi[n], theta, Bc::RobinTopNeumannBottom);
    ScalarField outer = transport(nm.psi[n], inner, Bc::Interior);
    out.add_scaled(outer.is_slab() ? broadcast_full(outer) : outer, 0.5);
  }
  return out;
}

}  // namespace hsto
