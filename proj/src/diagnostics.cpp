#include "hsto/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "hsto/ops.hpp"

namespace hsto {

namespace {

double plane_sum_sq(const Grid& g, const double* p) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.plane(); ++n) s += p[n] * p[n];
  return s;
}

/// Trapezoid-in-z, collocation-in-x_H quadrature of a pointwise functional.
template <typename Fn>
double volume_quadrature(const Grid& g, int levels, Fn&& value_at) {
  double acc = 0.0;
  for (int k = 0; k < levels; ++k) {
    double s = 0.0;
    for (std::size_t n = 0; n < g.plane(); ++n) s += value_at(k, n);
    const double w = (levels == 1) ? g.h : ((k == 0 || k == levels - 1) ? 0.5 * g.dz() : g.dz());
    acc += s * w;
  }
  return acc * g.cell_area();
}

}  // namespace

double l2_sq(const ScalarField& f) { return l2_inner(f, f); }
double l2_sq(const HVectorField& u) { return l2_inner(u, u); }

double l4_pow4(const ScalarField& f) {
  const Grid& g = f.grid();
  return volume_quadrature(g, f.levels(), [&](int k, std::size_t n) {
    const double x = f.level(k)[n];
    return x * x * x * x;
  });
}

double l4_pow4(const HVectorField& u) {
  const Grid& g = u.grid();
  return volume_quadrature(g, u.u1.levels(), [&](int k, std::size_t n) {
    const double m2 = u.u1.level(k)[n] * u.u1.level(k)[n] + u.u2.level(k)[n] * u.u2.level(k)[n];
    return m2 * m2;
  });
}

double h1_sq(const ScalarField& f, Bc bc) {
  HVectorField gh = grad_h(f);
  return l2_sq(f) + l2_sq(gh.u1) + l2_sq(gh.u2) + l2_sq(dz(f, bc));
}

double h1_sq(const HVectorField& u) {
  return h1_sq(u.u1, Bc::NeumannNeumann) + h1_sq(u.u2, Bc::NeumannNeumann);
}

double h2_sq(const ScalarField& f, Bc bc) {
  double acc = h1_sq(f, bc);
  HVectorField gh = grad_h(f);
  HVectorField g11 = grad_h(gh.u1);
  HVectorField g22 = grad_h(gh.u2);
  acc += l2_sq(g11.u1) + l2_sq(g22.u2) + 2.0 * l2_sq(g11.u2);  // d11, d22, 2*d12
  ScalarField fz = dz(f, bc);
  HVectorField gz = grad_h(fz);
  acc += 2.0 * (l2_sq(gz.u1) + l2_sq(gz.u2));  // mixed d13, d23 (counted twice)
  acc += l2_sq(d2z(f, bc));
  return acc;
}

double h2_sq(const HVectorField& u) {
  return h2_sq(u.u1, Bc::NeumannNeumann) + h2_sq(u.u2, Bc::NeumannNeumann);
}

double slab_l2_sq(const ScalarField& f) {
  return plane_sum_sq(f.grid(), f.level(0)) * f.grid().cell_area();
}

double slab_h1_sq(const ScalarField& f) {
  HVectorField gh = grad_h(f);
  return slab_l2_sq(f) + slab_l2_sq(gh.u1) + slab_l2_sq(gh.u2);
}

double slab_h2_sq(const ScalarField& f) {
  double acc = slab_h1_sq(f);
  HVectorField gh = grad_h(f);
  HVectorField g11 = grad_h(gh.u1);
  HVectorField g22 = grad_h(gh.u2);
  acc += slab_l2_sq(g11.u1) + slab_l2_sq(g22.u2) + 2.0 * slab_l2_sq(g11.u2);
  return acc;
}

namespace {

/// |grad b|^2 pointwise, all three directions.
std::vector<ScalarField> gradient_fields(const ScalarField& b, Bc bc) {
  HVectorField gh = grad_h(b);
  return {std::move(gh.u1), std::move(gh.u2), dz(b, bc)};
}

}  // namespace

double mixed_sq(const ScalarField& a, const HVectorField& b, Bc bc_b) {
  const Grid& g = a.grid();
  std::vector<ScalarField> d1 = gradient_fields(b.u1, bc_b);
  std::vector<ScalarField> d2 = gradient_fields(b.u2, bc_b);
  const ScalarField af = broadcast_full(a);
  return volume_quadrature(g, g.n3, [&](int k, std::size_t n) {
    double gsq = 0.0;
    for (const auto& d : d1) gsq += d.level(k)[n] * d.level(k)[n];
    for (const auto& d : d2) gsq += d.level(k)[n] * d.level(k)[n];
    return af.level(k)[n] * af.level(k)[n] * gsq;
  });
}

double mixed_sq(const ScalarField& a, const ScalarField& b, Bc bc_b) {
  const Grid& g = a.grid();
  std::vector<ScalarField> d = gradient_fields(b, bc_b);
  const ScalarField af = broadcast_full(a);
  return volume_quadrature(g, g.n3, [&](int k, std::size_t n) {
    double gsq = 0.0;
    for (const auto& dd : d) gsq += dd.level(k)[n] * dd.level(k)[n];
    return af.level(k)[n] * af.level(k)[n] * gsq;
  });
}

namespace {

/// ||  |vt| |grad b| ||^2 with vt a vector weight.
double vec_mixed_sq(const HVectorField& vt, const std::vector<const ScalarField*>& derivs) {
  const Grid& g = vt.grid();
  return volume_quadrature(g, g.n3, [&](int k, std::size_t n) {
    const double m2 =
        vt.u1.level(k)[n] * vt.u1.level(k)[n] + vt.u2.level(k)[n] * vt.u2.level(k)[n];
    double gsq = 0.0;
    for (const ScalarField* d : derivs) gsq += d->level(k)[n] * d->level(k)[n];
    return m2 * gsq;
  });
}

}  // namespace

std::pair<double, double> energy_xy(const SimState& s) {
  if (!s.valid) throw std::invalid_argument("energy_xy: invalid state");
  HVectorField vb{vbar(s.v.u1), vbar(s.v.u2)};
  HVectorField vt{s.v.u1 - vb.u1, s.v.u2 - vb.u2};
  ScalarField dzv1 = dz(s.v.u1, Bc::NeumannNeumann);
  ScalarField dzv2 = dz(s.v.u2, Bc::NeumannNeumann);
  ScalarField dzth = dz(s.theta, Bc::RobinTopNeumannBottom);

  const double x = l4_pow4(vt) + slab_h1_sq(vb.u1) + slab_h1_sq(vb.u2) + l2_sq(dzv1) +
                   l2_sq(dzv2) + l2_sq(dzth);

  std::vector<ScalarField> dv1 = gradient_fields(vt.u1, Bc::NeumannNeumann);
  std::vector<ScalarField> dv2 = gradient_fields(vt.u2, Bc::NeumannNeumann);
  std::vector<const ScalarField*> all_dv;
  for (const auto& d : dv1) all_dv.push_back(&d);
  for (const auto& d : dv2) all_dv.push_back(&d);
  std::vector<ScalarField> dth = gradient_fields(s.theta, Bc::RobinTopNeumannBottom);
  std::vector<const ScalarField*> all_dth;
  for (const auto& d : dth) all_dth.push_back(&d);

  const double y = vec_mixed_sq(vt, all_dv) + slab_h2_sq(vb.u1) + slab_h2_sq(vb.u2) +
                   h1_sq(dzv1, Bc::Interior) + h1_sq(dzv2, Bc::Interior) +
                   h1_sq(dzth, Bc::Interior) + vec_mixed_sq(vt, all_dth);
  return {x, y};
}

CancellationTerms cancellation_terms(const HVectorField& v, const ScalarField& w,
                                     const ScalarField& f, const ScalarField& g, int r,
                                     double tol_div) {
  if (r < 2) throw std::invalid_argument("cancellation_terms: r must be >= 2");
  const Grid& gr = v.grid();
  const double* w_bot = w.level(0);
  const double* w_top = w.level(w.is_slab() ? 0 : gr.n3 - 1);
  double trace = 0.0;
  for (std::size_t n = 0; n < gr.plane(); ++n)
    trace = std::max({trace, std::abs(w_bot[n]), std::abs(w_top[n])});
  if (trace > tol_div)
    throw std::invalid_argument("cancellation_terms: w trace " + std::to_string(trace) +
                                " exceeds tol_div");

  const ScalarField ff = broadcast_full(f);
  const ScalarField gf = broadcast_full(g);
  HVectorField gg = grad_h(gf);
  ScalarField gz = dz(gf, Bc::Interior);
  HVectorField gfld = grad_h(ff);
  ScalarField fz = dz(ff, Bc::Interior);
  const ScalarField wf = broadcast_full(w);

  CancellationTerms out;
  out.i1 = volume_quadrature(gr, gr.n3, [&](int k, std::size_t n) {
    const double ug = v.u1.level(k)[n] * gg.u1.level(k)[n] +
                      v.u2.level(k)[n] * gg.u2.level(k)[n] + wf.level(k)[n] * gz.level(k)[n];
    const double fa = std::abs(ff.level(k)[n]);
    return std::pow(fa, r) * std::pow(gf.level(k)[n], r - 1) * ug;
  });
  out.i2 = volume_quadrature(gr, gr.n3, [&](int k, std::size_t n) {
    const double uf = v.u1.level(k)[n] * gfld.u1.level(k)[n] +
                      v.u2.level(k)[n] * gfld.u2.level(k)[n] + wf.level(k)[n] * fz.level(k)[n];
    const double fv = ff.level(k)[n];
    const double fa = std::abs(fv);
    const double weight = (r == 2) ? 1.0 : std::pow(fa, r - 2);
    return std::pow(gf.level(k)[n], r) * weight * fv * uf;
  });
  return out;
}

double cancellation_residual(const HVectorField& v, const ScalarField& w, const ScalarField& f,
                             const ScalarField& g, int r, double tol_div) {
  return cancellation_terms(v, w, f, g, r, tol_div).residual();
}

void BlowupMonitor::update(const SimState& s, double dt) {
  if (!s.valid) return;
  const double h1 = h1_sq(s.v) + h1_sq(s.theta, Bc::RobinTopNeumannBottom);
  const double h2 = h2_sq(s.v) + h2_sq(s.theta, Bc::RobinTopNeumannBottom);
  sup_h1_sq_ = std::max(sup_h1_sq_, h1);
  int_v_sq_ += dt * h2;
}

double split_residual(const SimState& s, const NoiseModel& nm, const Forcing& f,
                      const Projector& proj, double dt, const BrownianIncrements& dw) {
  if (!s.valid) throw std::invalid_argument("split_residual: invalid state");
  if (static_cast<int>(dw.dW.size()) != nm.N)
    throw std::invalid_argument("split_residual: missing dW record");
  const Grid& g = s.v.grid();

  // --- Full-system explicit-Euler increment.
  auto [drift_v, drift_th] = assemble_drift(s, nm, f, proj, false);
  std::vector<HVectorField> coeffs;
  coeffs.reserve(nm.N);
  HVectorField noise_v = HVectorField::full(g);
  ScalarField noise_th = ScalarField::full(g);
  for (int n = 0; n < nm.N; ++n) {
    coeffs.push_back(noise_coeff_v(nm, n, s.v, s.theta));
    if (dw.dW[n] != 0.0) {
      noise_v.add_scaled(coeffs[n], dw.dW[n]);
      ScalarField ct = noise_coeff_theta(nm, n, s.theta);
      noise_th.add_scaled(ct, dw.dW[n]);
    }
  }
  noise_v = proj.apply_p(noise_v);
  HVectorField inc_v_full = dt * drift_v;
  inc_v_full += noise_v;
  ScalarField inc_th_full = dt * drift_th;
  inc_th_full += noise_th;
  HVectorField bar_full = vbar(inc_v_full);
  ScalarField hat_full = vhat(inc_th_full);

  // --- Barotropic re-assembly.
  HVectorField vb = vbar(s.v);
  HVectorField vt{s.v.u1 - vb.u1, s.v.u2 - vb.u2};
  // theta-hat realized through the averaging identity vbar(Theta) = -that,
  // which the discrete double trapezoid satisfies exactly in the interior.
  ScalarField theta_int = vint(s.theta);
  ScalarField hat_avg = vbar(theta_int);  // = -theta_hat

  HVectorField drift_bar = HVectorField::slab(g);
  // -(vbar.grad_H)vbar
  HVectorField gb1 = grad_h(vb.u1);
  HVectorField gb2 = grad_h(vb.u2);
  drift_bar.u1 -= dmul(vb.u1, gb1.u1) + dmul(vb.u2, gb1.u2);
  drift_bar.u2 -= dmul(vb.u1, gb2.u1) + dmul(vb.u2, gb2.u2);
  // -F(vtilde) = -vbar[(vt.grad_H)vt + vt div_H vt]
  HVectorField gt1 = grad_h(vt.u1);
  HVectorField gt2 = grad_h(vt.u2);
  ScalarField dvt = div_h(vt);
  drift_bar.u1 -= vbar(dmul(vt.u1, gt1.u1) + dmul(vt.u2, gt1.u2) + dmul(vt.u1, dvt));
  drift_bar.u2 -= vbar(dmul(vt.u1, gt2.u1) + dmul(vt.u2, gt2.u2) + dmul(vt.u2, dvt));
  // kappa coupling: vbar of int grad_H(kappa theta) = grad_H vbar(int kappa theta)
  if (nm.has_kappa() && s.theta.max_abs() != 0.0) {
    HVectorField kt = grad_h(vbar(vint(dmul(nm.kappa, s.theta))));
    drift_bar.u1 += kt.u1;
    drift_bar.u2 += kt.u2;
  }
  // pi coupling
  if (nm.has_pi() && s.theta.max_abs() != 0.0) {
    const bool pi1 = !nm.pi.c1.empty() && nm.pi.c1.max_abs() != 0.0;
    const bool pi2 = !nm.pi.c2.empty() && nm.pi.c2.max_abs() != 0.0;
    if (pi1 || pi2) {
      HVectorField jbar = grad_h(hat_avg);  // vbar(int grad_H theta)
      HVectorField gj1 = grad_h(jbar.u1);
      HVectorField gj2 = grad_h(jbar.u2);
      if (pi1) {
        drift_bar.u1 += dmul(nm.pi.c1, gj1.u1);
        drift_bar.u2 += dmul(nm.pi.c1, gj2.u1);
      }
      if (pi2) {
        drift_bar.u1 += dmul(nm.pi.c2, gj1.u2);
        drift_bar.u2 += dmul(nm.pi.c2, gj2.u2);
      }
    }
    if (!nm.pi.c3.empty() && nm.pi.c3.max_abs() != 0.0) {
      HVectorField gth = grad_h(s.theta);
      drift_bar.u1 += vbar(vint(dmul(nm.pi.c3, dz(gth.u1, Bc::RobinTopNeumannBottom))));
      drift_bar.u2 += vbar(vint(dmul(nm.pi.c3, dz(gth.u2, Bc::RobinTopNeumannBottom))));
    }
  }
  // gamma feedback (x3-independent on both sides)
  if (nm.has_gamma()) {
    for (int n = 0; n < nm.N; ++n) {
      const GammaSlab& gm = nm.gamma[n];
      if (gm.empty()) continue;
      HVectorField q = proj.apply_qh(vbar(coeffs[n]));
      drift_bar.u1 += multiply(gm.g11, q.u1) + multiply(gm.g12, q.u2);
      drift_bar.u2 += multiply(gm.g21, q.u1) + multiply(gm.g22, q.u2);
    }
  }
  if (f.coriolis_k0 != 0.0) {
    drift_bar.u1.add_scaled(vb.u2, f.coriolis_k0);
    drift_bar.u2.add_scaled(vb.u1, -f.coriolis_k0);
  }
  if (!f.f_v.empty()) {
    drift_bar.u1 += vbar(f.f_v.u1);
    drift_bar.u2 += vbar(f.f_v.u2);
  }
  if (nm.strat_corrected) {
    HVectorField lp = lphi_v(nm, s.v);
    drift_bar.u1 += vbar(lp.u1);
    drift_bar.u2 += vbar(lp.u2);
    if (nm.has_sigma() && s.theta.max_abs() != 0.0) {
      for (int n = 0; n < nm.N; ++n) {
        const ScalarField& p3 = nm.phi[n].c3;
        if (p3.empty() || p3.max_abs() == 0.0) continue;
        if (nm.sigma[n].empty() || nm.sigma[n].max_abs() == 0.0) continue;
        HVectorField gs = grad_h(dmul(nm.sigma[n], s.theta));
        drift_bar.u1 += vbar(0.5 * dmul(p3, gs.u1));
        drift_bar.u2 += vbar(0.5 * dmul(p3, gs.u2));
      }
    }
  }
  HVectorField drift_bar_p = proj.apply_ph(drift_bar);
  drift_bar_p.u1 += laplacian_h(vb.u1);
  drift_bar_p.u2 += laplacian_h(vb.u2);

  HVectorField noise_bar = HVectorField::slab(g);
  for (int n = 0; n < nm.N; ++n) {
    if (dw.dW[n] == 0.0) continue;
    HVectorField term = HVectorField::slab(g);
    // (phi_H . grad_H) vbar
    if (!nm.phi[n].c1.empty() && nm.phi[n].c1.max_abs() != 0.0) {
      term.u1 += dmul(nm.phi[n].c1, gb1.u1);
      term.u2 += dmul(nm.phi[n].c1, gb2.u1);
    }
    if (!nm.phi[n].c2.empty() && nm.phi[n].c2.max_abs() != 0.0) {
      term.u1 += dmul(nm.phi[n].c2, gb1.u2);
      term.u2 += dmul(nm.phi[n].c2, gb2.u2);
    }
    // vbar(phi^3 d3 v)
    if (!nm.phi[n].c3.empty() && nm.phi[n].c3.max_abs() != 0.0) {
      term.u1 += vbar(dmul(nm.phi[n].c3, dz(s.v.u1, Bc::NeumannNeumann)));
      term.u2 += vbar(dmul(nm.phi[n].c3, dz(s.v.u2, Bc::NeumannNeumann)));
    }
    // grad_H(sigma_n vbar(Theta)) = -grad_H(sigma_n theta_hat)
    if (!nm.sigma[n].empty() && nm.sigma[n].max_abs() != 0.0 && s.theta.max_abs() != 0.0) {
      HVectorField gs = grad_h(dmul(nm.sigma[n], hat_avg));
      term.u1 += gs.u1;
      term.u2 += gs.u2;
    }
    noise_bar.add_scaled(term, dw.dW[n]);
  }
  noise_bar = proj.apply_ph(noise_bar);

  HVectorField bar_split = dt * drift_bar_p;
  bar_split += noise_bar;

  // --- Weighted-average (theta-hat) re-assembly.
  ScalarField th_hat = vhat(s.theta);
  ScalarField drift_hat = laplacian_h(th_hat);
  {
    // vhat(d3^2 theta) with the bottom Neumann condition
    ScalarField bd = ScalarField::slab(g);
    const double* bot = s.theta.level(0);
    const double* top = s.theta.level(g.n3 - 1);
    double* p = bd.level(0);
    for (std::size_t n = 0; n < g.plane(); ++n) p[n] = (bot[n] - top[n]) / g.h;
    drift_hat += bd;
  }
  if (s.theta.max_abs() != 0.0 && s.v.max_abs() != 0.0) {
    HVectorField gth = grad_h(s.theta);
    // -vhat((vtilde.grad_H)theta)
    drift_hat -= vhat(dmul(vt.u1, gth.u1) + dmul(vt.u2, gth.u2));
    // -(vbar.grad_H) theta_hat
    HVectorField ghat = grad_h(th_hat);
    drift_hat -= dmul(vb.u1, ghat.u1) + dmul(vb.u2, ghat.u2);
    // -R(v,theta) = -vbar[-Theta div_H vt + theta div_H vt zeta]
    ScalarField zc = z_coordinate(g);
    drift_hat -= vbar(multiply(zc, dmul(s.theta, dvt)) - dmul(theta_int, dvt));
  }
  if (!f.f_theta.empty()) drift_hat += vhat(f.f_theta);
  if (nm.strat_corrected && s.theta.max_abs() != 0.0) drift_hat += vhat(lpsi_theta(nm, s.theta));

  ScalarField noise_hat = ScalarField::slab(g);
  HVectorField ghat2 = grad_h(th_hat);
  for (int n = 0; n < nm.N; ++n) {
    if (dw.dW[n] == 0.0) continue;
    ScalarField term = ScalarField::slab(g);
    if (!nm.psi[n].c1.empty() && nm.psi[n].c1.max_abs() != 0.0)
      term += dmul(nm.psi[n].c1, ghat2.u1);
    if (!nm.psi[n].c2.empty() && nm.psi[n].c2.max_abs() != 0.0)
      term += dmul(nm.psi[n].c2, ghat2.u2);
    if (!nm.psi[n].c3.empty() && nm.psi[n].c3.max_abs() != 0.0)
      term += vhat(dmul(nm.psi[n].c3, dz(s.theta, Bc::RobinTopNeumannBottom)));
    noise_hat.add_scaled(term, dw.dW[n]);
  }
  ScalarField hat_split = dt * drift_hat;
  hat_split += noise_hat;

  // Normalized by the state scale: the exact noise re-assembly leaves a
  // drift mismatch of size dt * O(dx^2) * scale.
  const double rv = std::max((bar_full.u1 - bar_split.u1).max_abs(),
                             (bar_full.u2 - bar_split.u2).max_abs());
  const double rt = (hat_full - hat_split).max_abs();
  const double scale = std::max(s.v.max_abs(), s.theta.max_abs());
  const double mismatch = std::max(rv, rt);
  return scale > 0.0 ? mismatch / scale : mismatch;
}

DiagnosticsRecord record(const SimState& s, const NoiseModel& nm, std::optional<double> split_res,
                         bool blowup_flag) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.blowup_flag = blowup_flag || !s.valid;
  if (!s.valid) return r;
  (void)nm;
  r.l2_v = std::sqrt(l2_sq(s.v));
  r.l2_theta = std::sqrt(l2_sq(s.theta));
  r.h1_v = std::sqrt(h1_sq(s.v));
  r.h1_theta = std::sqrt(h1_sq(s.theta, Bc::RobinTopNeumannBottom));
  r.h2_v = std::sqrt(h2_sq(s.v));
  r.h2_theta = std::sqrt(h2_sq(s.theta, Bc::RobinTopNeumannBottom));
  r.l4_theta = std::pow(l4_pow4(s.theta), 0.25);
  HVectorField vt{vtilde(s.v.u1), vtilde(s.v.u2)};
  r.l4_vtilde = std::pow(l4_pow4(vt), 0.25);
  auto [x, y] = energy_xy(s);
  r.X = x;
  r.Y = y;
  r.div_residual = divergence_residual(s.v);
  if (s.v.max_abs() != 0.0 && s.theta.max_abs() != 0.0 && r.div_residual <= 1e-6) {
    ScalarField w = vint(div_h(s.v));
    w *= -1.0;
    ScalarField one = ScalarField::slab(s.v.grid());
    one.fill(1.0);
    r.cancel_residual = cancellation_residual(s.v, w, s.theta, one, 2, 1e-6);
  }
  if (split_res) r.split_residual = *split_res;
  return r;
}

std::string to_ndjson(const DiagnosticsRecord& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["l2_v"] = r.l2_v;
  j["l2_theta"] = r.l2_theta;
  j["h1_v"] = r.h1_v;
  j["h1_theta"] = r.h1_theta;
  j["h2_v"] = r.h2_v;
  j["h2_theta"] = r.h2_theta;
  j["l4_theta"] = r.l4_theta;
  j["l4_vtilde"] = r.l4_vtilde;
  j["X"] = r.X;
  j["Y"] = r.Y;
  j["div_residual"] = r.div_residual;
  j["cancel_residual"] = r.cancel_residual;
  j["split_residual"] = r.split_residual;
  j["blowup_flag"] = r.blowup_flag;
  return j.dump();
}

}  // namespace hsto
