#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hsto/field.hpp"
#include "hsto/projection.hpp"
#include "hsto/rng.hpp"

namespace hsto {

/// Outcome of checking a NoiseModel against the structural assumptions:
/// stochastic parabolicity (nu < 2 for both families) and x3-independence
/// of the constrained coefficients. Validation is report-based; the
/// dynamics module refuses to run on a failing report.
struct ValidationReport {
  double nu_phi = 0.0;
  double nu_psi = 0.0;
  std::vector<std::string> violations;
  bool pass() const { return violations.empty(); }
};

/// 2x2 matrix-valued x3-independent coefficient slab; g(i,j) multiplies as a
/// matrix acting on 2-vectors, (g*q)^k = g^{k,1} q^1 + g^{k,2} q^2.
struct GammaSlab {
  ScalarField g11, g12, g21, g22;
  bool empty() const { return g11.empty(); }
};

/// Noise coefficient families phi_n, psi_n (transport), sigma_n
/// (turbulent-pressure/temperature coupling), kappa (hydrostatic coupling),
/// and the derived (gamma, pi) pressure-feedback/transport corrections.
/// Immutable after validation; coefficients are frozen within a run.
struct NoiseModel {
  std::vector<Vec3Field> phi;     // c1,c2 x3-independent; c3 may vary in x3
  std::vector<Vec3Field> psi;
  std::vector<ScalarField> sigma; // x3-independent slabs
  ScalarField kappa;              // scalar on O (slab or full); empty = 0
  std::vector<GammaSlab> gamma;   // empty, or one slab matrix per mode
  Vec3Field pi;                   // pi1, pi2 slabs; pi3 slab or full; empty = 0
  int N = 0;

  /// Set by strat_to_ito: the drift additionally carries L_phi v, L_psi theta
  /// and the (1/2) sum_n phi_n^3 grad_H(sigma_n theta) term.
  bool strat_corrected = false;
  bool validated = false;

  bool has_sigma() const;
  bool has_kappa() const;
  bool has_pi() const;
  bool has_gamma() const;
  bool has_any_noise() const { return N > 0; }
};

/// Computes the parabolicity certificates and structural checks; marks the
/// model validated when everything passes.
ValidationReport validate(NoiseModel& nm);

/// Largest eigenvalue of the pointwise Gram matrix sum_n c_n c_n^T over the
/// grid (closed-form symmetric 3x3 eigenvalue).
double gram_nu(const std::vector<Vec3Field>& family, const Grid& g);

/// Stratonovich -> Ito conversion: fills pi = (1/2) sum_n sigma_n (psi_n + phi_n)
/// (third component from psi alone) and gamma_n = (1/2)(d_i phi_n^j)_{i,j},
/// and flags the model so the drift picks up the L_phi/L_psi corrections.
/// Requires phi_n^3 to vanish on both boundaries. Recomputing on an already
/// converted model reproduces the same (gamma, pi).
NoiseModel strat_to_ito(const NoiseModel& nm);

/// Transport operator (c . grad) f with the given vertical BC for d3 f;
/// all products dealiased.
ScalarField transport(const Vec3Field& c, const ScalarField& f, Bc bc);
HVectorField transport(const Vec3Field& c, const HVectorField& v);

/// Unprojected v-equation noise coefficient of mode n:
///   (phi_n . grad) v + grad_H [ sigma_n * int_{-h}^{x3} theta dzeta ].
HVectorField noise_coeff_v(const NoiseModel& nm, int n, const HVectorField& v,
                           const ScalarField& theta);

/// theta-equation noise coefficient of mode n: (psi_n . grad) theta.
ScalarField noise_coeff_theta(const NoiseModel& nm, int n, const ScalarField& theta);

/// One balanced diffusion increment:
///   dv = P[ sum_n coeff_v_n dW_n ],   dtheta = sum_n coeff_theta_n dW_n.
std::pair<HVectorField, ScalarField> apply_diffusion(const NoiseModel& nm, const Projector& proj,
                                                     const HVectorField& v,
                                                     const ScalarField& theta,
                                                     const BrownianIncrements& dw);

/// Stratonovich drift corrections (1/2) sum_n (c_n . grad)[(c_n . grad) .].
/// The inner derivative uses the field's physical BC, the outer one-sided
/// interior stencils.
HVectorField lphi_v(const NoiseModel& nm, const HVectorField& v);
ScalarField lpsi_theta(const NoiseModel& nm, const ScalarField& theta);

}  // namespace hsto
