#pragma once

#include <vector>

#include "hsto/field.hpp"

namespace hsto {

/// Helmholtz projections on T^2 and the hydrostatic projection on O.
///
/// Q_H f = grad_H Psi with Delta_H Psi = div_H f and mean-free Psi;
/// P_H = I - Q_H. On O, Q f = Q_H[vertical average of f] (x3-independent)
/// and P = I - Q, so that div_H int_{-h}^0 (P f) dzeta = 0.
///
/// Stateless apart from the read-only inverse-Laplacian multiplier table;
/// safe for concurrent use.
class Projector {
 public:
  explicit Projector(const Grid& g);

  const Grid& grid() const { return *grid_; }

  /// Gradient part Q_H u, level by level (or on an x3-independent slab).
  HVectorField apply_qh(const HVectorField& u) const;

  /// P_H u = u - Q_H u; output is divergence-free per level.
  HVectorField apply_ph(const HVectorField& u) const;

  /// Hydrostatic complement Q u = Q_H[vbar u], returned as a slab pair.
  HVectorField apply_q(const HVectorField& u) const;

  /// Hydrostatic projection P u = u - Q u (broadcast subtraction).
  HVectorField apply_p(const HVectorField& u) const;

  /// The mean-free potential Psi with Delta_H Psi = div_H u, level by level.
  /// For the hydrostatic Q, call with the vertical average (slab input).
  ScalarField qh_potential(const HVectorField& u) const;

 private:
  const Grid* grid_;
  std::vector<double> inv_lap_;  // -1/(k1^2+k2^2), 0 at the zero mode
};

}  // namespace hsto
