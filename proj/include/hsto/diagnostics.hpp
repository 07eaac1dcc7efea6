#pragma once

#include <optional>
#include <string>
#include <utility>

#include "hsto/dynamics.hpp"

namespace hsto {

// --- Norms. Horizontal derivatives spectral, vertical ones second-order
// --- finite differences, matching the operator discretization so the
// --- blow-up monitor sees the same quantity the stepper controls.

double l2_sq(const ScalarField& f);
double l2_sq(const HVectorField& u);

/// int_O |f|^4 (for vectors, |u|^2 = u1^2 + u2^2 pointwise).
double l4_pow4(const ScalarField& f);
double l4_pow4(const HVectorField& u);

double h1_sq(const ScalarField& f, Bc bc);
double h1_sq(const HVectorField& u);  // Neumann vertical BC

double h2_sq(const ScalarField& f, Bc bc);
double h2_sq(const HVectorField& u);

/// T^2 norms of x3-independent slabs (no depth factor).
double slab_l2_sq(const ScalarField& f);
double slab_h1_sq(const ScalarField& f);
double slab_h2_sq(const ScalarField& f);

/// int_O a^2 |grad b|^2 tied quantities: ||a| |grad b||_{L^2}^2 with
/// |grad b|^2 summed over components and all three directions.
double mixed_sq(const ScalarField& a, const HVectorField& b, Bc bc_b);
double mixed_sq(const ScalarField& a, const ScalarField& b, Bc bc_b);

/// Energy functionals of the barotropic/baroclinic analysis:
///   X = ||vtilde||_{L^4}^4 + ||vbar||_{H^1(T^2)}^2 + ||d3 v||_{L^2}^2 + ||d3 theta||_{L^2}^2
///   Y = || |vtilde||grad vtilde| ||^2 + ||vbar||_{H^2}^2 + ||d3 v||_{H^1}^2
///       + ||d3 theta||_{H^1}^2 + || |vtilde||grad theta| ||^2
std::pair<double, double> energy_xy(const SimState& s);

/// Discrete convection-cancellation residual
///   int |f|^r g^{r-1} (u.grad)g + int g^r |f|^{r-2} f (u.grad)f
/// for u = (v, w) divergence-free with vanishing w traces (checked against
/// tol_div). Exactly zero in the continuum.
struct CancellationTerms {
  double i1 = 0.0, i2 = 0.0;
  double residual() const { return i1 + i2; }
};
CancellationTerms cancellation_terms(const HVectorField& v, const ScalarField& w,
                                     const ScalarField& f, const ScalarField& g, int r,
                                     double tol_div);
double cancellation_residual(const HVectorField& v, const ScalarField& w, const ScalarField& f,
                             const ScalarField& g, int r, double tol_div);

/// Re-assembles one explicit-Euler increment of the barotropic (vbar) and
/// weighted-average (theta-hat) equations from the split quantities and
/// compares against vbar/vhat of the full-system increment with the same
/// Brownian draws. Returns the max relative discrepancy; O(dt) + O(dx^2).
double split_residual(const SimState& s, const NoiseModel& nm, const Forcing& f,
                      const Projector& proj, double dt, const BrownianIncrements& dw);

/// Blow-up functional sup_t ||(v,theta)||_{H^1}^2 + int_0^t ||(v,theta)||_{H^2}^2 ds,
/// accumulated along the discrete trajectory.
class BlowupMonitor {
 public:
  void update(const SimState& s, double dt);
  double sup_h1_sq() const { return sup_h1_sq_; }
  double int_v_sq() const { return int_v_sq_; }
  double value() const { return sup_h1_sq_ + int_v_sq_; }
  bool exceeded(double ceiling) const { return value() > ceiling; }

 private:
  double sup_h1_sq_ = 0.0;
  double int_v_sq_ = 0.0;
};

/// Per-step scalar functionals, one NDJSON object per record.
struct DiagnosticsRecord {
  double t = 0.0;
  double l2_v = 0.0, l2_theta = 0.0;
  double h1_v = 0.0, h1_theta = 0.0;
  double h2_v = 0.0, h2_theta = 0.0;
  double l4_theta = 0.0, l4_vtilde = 0.0;
  double X = 0.0, Y = 0.0;
  double div_residual = 0.0;
  double cancel_residual = 0.0;
  double split_residual = 0.0;
  bool blowup_flag = false;
};

/// Assembles a record from a valid state. split_res, when available, is the
/// re-assembly residual of the step that produced this state.
DiagnosticsRecord record(const SimState& s, const NoiseModel& nm,
                         std::optional<double> split_res = std::nullopt,
                         bool blowup_flag = false);

std::string to_ndjson(const DiagnosticsRecord& r);

}  // namespace hsto
