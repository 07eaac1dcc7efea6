#include "hsto/dynamics.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "hsto/fft.hpp"
#include "hsto/ops.hpp"

namespace hsto {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double l2_norm(const ScalarField& f) { return std::sqrt(l2_inner(f, f)); }

}  // namespace

double Forcing::xi() const {
  double s = 0.0;
  if (!f_v.empty()) s += std::sqrt(l2_inner(f_v, f_v));
  if (!f_theta.empty()) s += l2_norm(f_theta);
  return s;
}

double divergence_residual(const HVectorField& v) {
  ScalarField d = div_h(vbar(v));
  return v.grid().h * d.max_abs();
}

ScalarField reconstruct_w(const HVectorField& v, double tol_div) {
  if (!v.finite()) throw std::invalid_argument("reconstruct_w: non-finite velocity");
  const double res = divergence_residual(v);
  if (res > tol_div) {
    std::ostringstream os;
    os << "reconstruct_w: integral incompressibility violated (residual " << res << " > "
       << tol_div << ")";
    throw std::invalid_argument(os.str());
  }
  ScalarField w = vint(div_h(v));
  w *= -1.0;
  return w;
}

namespace detail {

std::pair<HVectorField, ScalarField> explicit_drift(const SimState& s, const NoiseModel& nm,
                                                    const Forcing& f, const Projector& proj,
                                                    bool linear_only, double tol_div,
                                                    const std::vector<HVectorField>* vcoeffs) {
  const Grid& g = s.v.grid();
  HVectorField dv = HVectorField::full(g);
  ScalarField dtheta = ScalarField::full(g);
  const bool theta_live = s.theta.max_abs() != 0.0;
  const bool v_live = s.v.max_abs() != 0.0;

  if (!linear_only && v_live) {
    ScalarField w = reconstruct_w(s.v, tol_div);
    const bool w_live = w.max_abs() != 0.0;
    HVectorField gv1 = grad_h(s.v.u1);
    HVectorField gv2 = grad_h(s.v.u2);
    dv.u1 -= dmul(s.v.u1, gv1.u1) + dmul(s.v.u2, gv1.u2);
    dv.u2 -= dmul(s.v.u1, gv2.u1) + dmul(s.v.u2, gv2.u2);
    if (w_live) {
      dv.u1 -= dmul(w, dz(s.v.u1, Bc::NeumannNeumann));
      dv.u2 -= dmul(w, dz(s.v.u2, Bc::NeumannNeumann));
    }
    if (theta_live) {
      HVectorField gt = grad_h(s.theta);
      dtheta -= dmul(s.v.u1, gt.u1) + dmul(s.v.u2, gt.u2);
      if (w_live) dtheta -= dmul(w, dz(s.theta, Bc::RobinTopNeumannBottom));
    }
  }

  // Hydrostatic temperature coupling: grad_H int (kappa theta) dzeta.
  if (nm.has_kappa() && theta_live) {
    HVectorField kt = grad_h(vint(dmul(nm.kappa, s.theta)));
    dv += kt;
  }

  // Ito-correction transport L_{pi,gamma} theta.
  if (nm.has_pi() && theta_live) {
    const bool pi1 = !nm.pi.c1.empty() && nm.pi.c1.max_abs() != 0.0;
    const bool pi2 = !nm.pi.c2.empty() && nm.pi.c2.max_abs() != 0.0;
    if (pi1 || pi2) {
      HVectorField j = grad_h(vint(s.theta));  // = int_{-h}^{.} grad_H theta dzeta
      HVectorField gj1 = grad_h(j.u1);
      HVectorField gj2 = grad_h(j.u2);
      if (pi1) {
        dv.u1 += dmul(nm.pi.c1, gj1.u1);
        dv.u2 += dmul(nm.pi.c1, gj2.u1);
      }
      if (pi2) {
        dv.u1 += dmul(nm.pi.c2, gj1.u2);
        dv.u2 += dmul(nm.pi.c2, gj2.u2);
      }
    }
    if (!nm.pi.c3.empty() && nm.pi.c3.max_abs() != 0.0) {
      HVectorField gt = grad_h(s.theta);
      dv.u1 += vint(dmul(nm.pi.c3, dz(gt.u1, Bc::RobinTopNeumannBottom)));
      dv.u2 += vint(dmul(nm.pi.c3, dz(gt.u2, Bc::RobinTopNeumannBottom)));
    }
  }

  // Pressure feedback P_gamma = sum_n gamma_n * Q[noise coefficient_n].
  if (nm.has_gamma()) {
    std::vector<HVectorField> local;
    const std::vector<HVectorField>* coeffs = vcoeffs;
    if (!coeffs) {
      local.reserve(nm.N);
      for (int n = 0; n < nm.N; ++n) local.push_back(noise_coeff_v(nm, n, s.v, s.theta));
      coeffs = &local;
    }
    ScalarField acc1 = ScalarField::slab(g), acc2 = ScalarField::slab(g);
    for (int n = 0; n < nm.N; ++n) {
      const GammaSlab& gm = nm.gamma[n];
      if (gm.empty()) continue;
      HVectorField q = proj.apply_qh(vbar((*coeffs)[n]));
      acc1 += multiply(gm.g11, q.u1) + multiply(gm.g12, q.u2);
      acc2 += multiply(gm.g21, q.u1) + multiply(gm.g22, q.u2);
    }
    dv.u1 += acc1;
    dv.u2 += acc2;
  }

  if (f.coriolis_k0 != 0.0 && v_live) {
    dv.u1.add_scaled(s.v.u2, f.coriolis_k0);
    dv.u2.add_scaled(s.v.u1, -f.coriolis_k0);
  }
  if (!f.f_v.empty()) {
    dv.u1 += f.f_v.u1;
    dv.u2 += f.f_v.u2;
  }
  if (!f.f_theta.empty()) dtheta += f.f_theta;

  if (nm.strat_corrected) {
    if (v_live) dv += lphi_v(nm, s.v);
    if (theta_live) {
      dtheta += lpsi_theta(nm, s.theta);
      if (nm.has_sigma()) {
        // (1/2) sum_n phi_n^3 grad_H(sigma_n theta)
        for (int n = 0; n < nm.N; ++n) {
          const ScalarField& p3 = nm.phi[n].c3;
          if (p3.empty() || p3.max_abs() == 0.0) continue;
          if (nm.sigma[n].empty() || nm.sigma[n].max_abs() == 0.0) continue;
          HVectorField gs = grad_h(dmul(nm.sigma[n], s.theta));
          dv.u1.add_scaled(dmul(p3, gs.u1), 0.5);
          dv.u2.add_scaled(dmul(p3, gs.u2), 0.5);
        }
      }
    }
  }

  return {std::move(dv), std::move(dtheta)};
}

}  // namespace detail

std::pair<HVectorField, ScalarField> assemble_drift(const SimState& s, const NoiseModel& nm,
                                                    const Forcing& f, const Projector& proj,
                                                    bool linear_only) {
  if (!s.valid) throw std::invalid_argument("assemble_drift: invalid state");
  if (!nm.validated && nm.N > 0)
    throw std::invalid_argument("assemble_drift: unvalidated noise model");
  auto [dv, dtheta] = detail::explicit_drift(s, nm, f, proj, linear_only, 1e-8, nullptr);
  dv = proj.apply_p(dv);
  dv.u1 += laplacian(s.v.u1, Bc::NeumannNeumann);
  dv.u2 += laplacian(s.v.u2, Bc::NeumannNeumann);
  dtheta += laplacian(s.theta, Bc::RobinTopNeumannBottom);
  return {std::move(dv), std::move(dtheta)};
}

ScalarField solve_helmholtz(const ScalarField& rhs, Bc bc, double dt) {
  const Grid& g = rhs.grid();
  const ScalarField src = broadcast_full(rhs);
  Spectral& sp = spectral_for(g);
  const std::size_t ns = sp.spec_size();
  const int n3 = g.n3;
  std::vector<std::complex<double>> spec(ns * n3);
  for (int k = 0; k < n3; ++k) sp.forward(src.level(k), spec.data() + ns * k);

  // Vertical operator entries: interior (1,-2,1)/dz^2, boundary rows by ghosts.
  const double idz2 = 1.0 / (g.dz() * g.dz());
  std::vector<double> lower(n3), diag0(n3), upper(n3);
  for (int k = 0; k < n3; ++k) {
    lower[k] = idz2;
    diag0[k] = -2.0 * idz2;
    upper[k] = idz2;
  }
  upper[0] = 2.0 * idz2;
  lower[n3 - 1] = 2.0 * idz2;
  if (bc == Bc::RobinTopNeumannBottom)
    diag0[n3 - 1] = -(2.0 + 2.0 * g.dz() * g.alpha) * idz2;
  else if (bc == Bc::Interior)
    throw std::invalid_argument("solve_helmholtz: Interior BC has no closed system");

  std::vector<std::complex<double>> dpr(n3);
  std::vector<double> cpr(n3);
  for (std::size_t m = 0; m < ns; ++m) {
    const int i = static_cast<int>(m / sp.nc());
    const int j = static_cast<int>(m % sp.nc());
    const double k1 = sp.freq1(i);
    const double kk = k1 * k1 + static_cast<double>(j) * j;
    // Thomas on ((1 + dt kk) I - dt D2z) x = rhs
    const double a = 1.0 + dt * kk;
    double denom = a - dt * diag0[0];
    cpr[0] = -dt * upper[0] / denom;
    dpr[0] = spec[m] / denom;
    for (int k = 1; k < n3; ++k) {
      const double sub = -dt * lower[k];
      denom = (a - dt * diag0[k]) - sub * cpr[k - 1];
      cpr[k] = -dt * upper[k] / denom;
      dpr[k] = (spec[ns * k + m] - sub * dpr[k - 1]) / denom;
    }
    spec[ns * (n3 - 1) + m] = dpr[n3 - 1];
    for (int k = n3 - 2; k >= 0; --k)
      spec[ns * k + m] = dpr[k] - cpr[k] * spec[ns * (k + 1) + m];
  }

  ScalarField out = ScalarField::full(g);
  for (int k = 0; k < n3; ++k) sp.backward(spec.data() + ns * k, out.level(k));
  return out;
}

namespace {

void check_cfl(const SimState& s, const StepControls& ctl) {
  const Grid& g = s.v.grid();
  const double dx = std::min(kTwoPi / g.n1, kTwoPi / g.n2);
  const double vmax = s.v.max_abs();
  if (ctl.dt * vmax / dx > ctl.cfl_max) {
    const double ok = ctl.cfl_max * dx / vmax;
    std::ostringstream os;
    os << "CFL violation: dt*max|v|/dx = " << ctl.dt * vmax / dx << " > " << ctl.cfl_max
       << "; suggest dt <= " << ok;
    throw CflViolation(os.str(), ok);
  }
}

/// Unprojected sum of per-mode v noise coefficients weighted by dW, plus the
/// theta noise increment.
std::pair<HVectorField, ScalarField> noise_increment(const NoiseModel& nm, const SimState& s,
                                                     const BrownianIncrements& dw,
                                                     std::vector<HVectorField>* keep_coeffs) {
  const Grid& g = s.v.grid();
  HVectorField nv = HVectorField::full(g);
  ScalarField nth = ScalarField::full(g);
  for (int n = 0; n < nm.N; ++n) {
    HVectorField cv = noise_coeff_v(nm, n, s.v, s.theta);
    if (dw.dW[n] != 0.0) {
      nv.u1.add_scaled(cv.u1, dw.dW[n]);
      nv.u2.add_scaled(cv.u2, dw.dW[n]);
      ScalarField ct = noise_coeff_theta(nm, n, s.theta);
      nth.add_scaled(ct, dw.dW[n]);
    }
    if (keep_coeffs) keep_coeffs->push_back(std::move(cv));
  }
  return {std::move(nv), std::move(nth)};
}

SimState advance(const SimState& s, const Projector& proj, const StepControls& ctl,
                 const HVectorField& rhs_v, const ScalarField& rhs_th) {
  SimState out;
  out.t = s.t + ctl.dt;
  out.step = s.step + 1;
  HVectorField vstar{solve_helmholtz(rhs_v.u1, Bc::NeumannNeumann, ctl.dt),
                     solve_helmholtz(rhs_v.u2, Bc::NeumannNeumann, ctl.dt)};
  ScalarField thstar = solve_helmholtz(rhs_th, Bc::RobinTopNeumannBottom, ctl.dt);
  vstar = proj.apply_p(vstar);
  if (!vstar.finite() || !thstar.finite()) {
    out.v = s.v;  // keep last finite fields; harness emits a blow-up record
    out.theta = s.theta;
    out.valid = false;
    return out;
  }
  out.v = std::move(vstar);
  out.theta = std::move(thstar);
  out.valid = true;
  return out;
}

}  // namespace

SimState step_ito(const SimState& s, const NoiseModel& nm, const Forcing& f,
                  const Projector& proj, const StepControls& ctl, const BrownianIncrements& dw) {
  if (!s.valid) throw std::invalid_argument("step_ito: invalid state");
  if (!(ctl.dt > 0.0)) throw std::invalid_argument("step_ito: dt must be positive");
  if (nm.N > 0 && !nm.validated) throw std::invalid_argument("step_ito: unvalidated noise model");
  if (static_cast<int>(dw.dW.size()) != nm.N)
    throw std::invalid_argument("step_ito: increment count != N");
  check_cfl(s, ctl);

  std::vector<HVectorField> coeffs;
  coeffs.reserve(nm.N);
  auto [nv, nth] = noise_increment(nm, s, dw, nm.has_gamma() ? &coeffs : nullptr);
  auto [dv, dth] = detail::explicit_drift(s, nm, f, proj, ctl.linear_only, ctl.tol_div,
                                          nm.has_gamma() ? &coeffs : nullptr);

  HVectorField rhs_v = s.v;
  rhs_v.add_scaled(dv, ctl.dt);
  rhs_v += nv;
  ScalarField rhs_th = s.theta;
  rhs_th.add_scaled(dth, ctl.dt);
  rhs_th += nth;
  return advance(s, proj, ctl, rhs_v, rhs_th);
}

SimState step_stratonovich_heun(const SimState& s, const NoiseModel& nm, const Forcing& f,
                                const Projector& proj, const StepControls& ctl,
                                const BrownianIncrements& dw) {
  if (!s.valid) throw std::invalid_argument("step_heun: invalid state");
  if (nm.strat_corrected || nm.has_gamma() || nm.has_pi())
    throw std::invalid_argument(
        "step_heun: expects raw Stratonovich coefficients (no gamma/pi corrections)");
  if (nm.N > 0 && !nm.validated) throw std::invalid_argument("step_heun: unvalidated noise model");
  if (static_cast<int>(dw.dW.size()) != nm.N)
    throw std::invalid_argument("step_heun: increment count != N");
  check_cfl(s, ctl);

  // Midpoint-in-noise: the drift stays explicit Euler, only the noise
  // coefficient is averaged between the current and predicted states.
  auto [nv0, nth0] = noise_increment(nm, s, dw, nullptr);
  auto [dv0, dth0] = detail::explicit_drift(s, nm, f, proj, ctl.linear_only, ctl.tol_div, nullptr);

  HVectorField rhs_v = s.v;
  rhs_v.add_scaled(dv0, ctl.dt);
  rhs_v += nv0;
  ScalarField rhs_th = s.theta;
  rhs_th.add_scaled(dth0, ctl.dt);
  rhs_th += nth0;
  if (nm.N == 0) return advance(s, proj, ctl, rhs_v, rhs_th);
  SimState pred = advance(s, proj, ctl, rhs_v, rhs_th);
  if (!pred.valid) return pred;

  auto [nv1, nth1] = noise_increment(nm, pred, dw, nullptr);

  HVectorField rhs_v2 = s.v;
  rhs_v2.add_scaled(dv0, ctl.dt);
  rhs_v2.add_scaled(nv0, 0.5);
  rhs_v2.add_scaled(nv1, 0.5);
  ScalarField rhs_th2 = s.theta;
  rhs_th2.add_scaled(dth0, ctl.dt);
  rhs_th2.add_scaled(nth0, 0.5);
  rhs_th2.add_scaled(nth1, 0.5);
  return advance(s, proj, ctl, rhs_v2, rhs_th2);
}

PressureSet reconstruct_pressures(const SimState& s, const NoiseModel& nm, const Forcing& f,
                                  const Projector& proj) {
  if (!s.valid) throw std::invalid_argument("reconstruct_pressures: invalid state");
  const Grid& g = s.v.grid();
  PressureSet out;

  auto [dv, dth] = detail::explicit_drift(s, nm, f, proj, false, 1e-8, nullptr);
  (void)dth;
  dv.u1 += laplacian(s.v.u1, Bc::NeumannNeumann);
  dv.u2 += laplacian(s.v.u2, Bc::NeumannNeumann);
  ScalarField p = proj.qh_potential(vbar(dv));
  out.p_surface = p;

  // P = p - int (kappa theta + (pi . grad) theta) dzeta
  ScalarField inner(g, 1);
  bool have_inner = false;
  if (nm.has_kappa() && s.theta.max_abs() != 0.0) {
    inner = dmul(nm.kappa, s.theta);
    have_inner = true;
  }
  if (nm.has_pi() && s.theta.max_abs() != 0.0) {
    ScalarField pt = transport(nm.pi, s.theta, Bc::RobinTopNeumannBottom);
    inner = have_inner ? inner + pt : pt;
    have_inner = true;
  }
  out.P = broadcast_full(p);
  if (have_inner) out.P -= vint(inner);

  out.p_tilde.reserve(nm.N);
  out.p_tilde_surface.reserve(nm.N);
  for (int n = 0; n < nm.N; ++n) {
    HVectorField cv = noise_coeff_v(nm, n, s.v, s.theta);
    ScalarField pt = proj.qh_potential(vbar(cv));
    ScalarField ptilde = broadcast_full(pt);
    if (!nm.sigma[n].empty() && nm.sigma[n].max_abs() != 0.0 && s.theta.max_abs() != 0.0)
      ptilde -= vint(dmul(nm.sigma[n], s.theta));
    out.p_tilde.push_back(std::move(ptilde));
    out.p_tilde_surface.push_back(std::move(pt));
  }
  return out;
}

}  // namespace hsto
