#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "hsto/field.hpp"
#include "hsto/noise.hpp"
#include "hsto/projection.hpp"
#include "hsto/rng.hpp"

namespace hsto {

/// Prognostic pair (v, theta) plus clock. A state is valid while all fields
/// are finite and the vertically integrated velocity is divergence-free to
/// tol_div; a step that produces non-finite values marks the state invalid
/// instead of throwing (blow-up handling is the harness's job).
struct SimState {
  HVectorField v;
  ScalarField theta;
  double t = 0.0;
  long step = 0;
  bool valid = true;
};

/// State-independent sources plus the built-in Coriolis rotation
/// F_v += k0 (v^2, -v^1). xi is the L^2 size of the sources.
struct Forcing {
  HVectorField f_v;       // empty = 0
  ScalarField f_theta;    // empty = 0
  double coriolis_k0 = 0.0;

  double xi() const;
};

struct StepControls {
  double dt = 1e-3;
  double cfl_max = 0.5;
  double tol_div = 1e-10;
  bool linear_only = false;  // drop convection terms (linear test problems)
};

struct CflViolation : std::runtime_error {
  double suggested_dt;
  CflViolation(const std::string& msg, double dt_ok)
      : std::runtime_error(msg), suggested_dt(dt_ok) {}
};

/// h * max |div_H vbar(v)|: the integral-incompressibility residual.
double divergence_residual(const HVectorField& v);

/// Diagnostic vertical velocity w = -int_{-h}^{x3} div_H v dzeta.
/// Requires divergence_residual(v) <= tol_div (so that w(.,0) ~ 0).
ScalarField reconstruct_w(const HVectorField& v, double tol_div);

/// Hydrostatic pressures recovered from the state (diagnostic only; the
/// stepped equations are pressure-free after the projection):
///   P = p - int_{-h}^{x3} (kappa theta + (pi . grad) theta) dzeta,
///   Ptilde_n = ptilde_n - int_{-h}^{x3} sigma_n theta dzeta,
/// with the surface pressures p, ptilde_n obtained from the Q-parts of the
/// drift and noise coefficients via the mean-free Poisson solve.
struct PressureSet {
  ScalarField P;
  ScalarField p_surface;
  std::vector<ScalarField> p_tilde;
  std::vector<ScalarField> p_tilde_surface;
};
PressureSet reconstruct_pressures(const SimState& s, const NoiseModel& nm, const Forcing& f,
                                  const Projector& proj);

/// Full projected drift, Laplacians included:
///   dv = Delta v + P[-(v.grad_H)v - w d3 v + L_{pi,gamma} theta
///                    + P_{gamma,phi+g} + int grad_H(kappa theta) + F_v (+ L_phi v)]
///   dtheta = Delta theta - (v.grad_H)theta - w d3 theta + F_theta (+ L_psi theta)
std::pair<HVectorField, ScalarField> assemble_drift(const SimState& s, const NoiseModel& nm,
                                                    const Forcing& f, const Projector& proj,
                                                    bool linear_only = false);

/// Semi-implicit Euler-Maruyama step: implicit Laplacian, explicit
/// everything else, noise explicit, projection applied post-solve.
SimState step_ito(const SimState& s, const NoiseModel& nm, const Forcing& f,
                  const Projector& proj, const StepControls& ctl, const BrownianIncrements& dw);

/// Heun (midpoint-in-noise) predictor-corrector for the Stratonovich form,
/// both stages with implicit viscosity. The model must carry the raw
/// Stratonovich coefficients (no gamma/pi corrections).
SimState step_stratonovich_heun(const SimState& s, const NoiseModel& nm, const Forcing& f,
                                const Projector& proj, const StepControls& ctl,
                                const BrownianIncrements& dw);

/// (I - dt Delta)^{-1} with the given vertical BC (spectral horizontally,
/// tridiagonal vertically).
ScalarField solve_helmholtz(const ScalarField& rhs, Bc bc, double dt);

namespace detail {
/// Unprojected explicit v-drift and explicit theta-drift (no Laplacians).
/// vcoeffs, when non-null, supplies precomputed per-mode noise coefficients
/// for the gamma feedback terms.
std::pair<HVectorField, ScalarField> explicit_drift(const SimState& s, const NoiseModel& nm,
                                                    const Forcing& f, const Projector& proj,
                                                    bool linear_only, double tol_div,
                                                    const std::vector<HVectorField>* vcoeffs);
}  // namespace detail

}  // namespace hsto
