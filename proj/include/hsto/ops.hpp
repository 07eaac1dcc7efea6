#pragma once

#include "hsto/field.hpp"

namespace hsto {

// --- Horizontal operators (pseudo-spectral, level by level) ---

/// Spectral horizontal gradient (d1 f, d2 f). Rejects non-finite input.
HVectorField grad_h(const ScalarField& f);

/// Single horizontal derivative, dim in {1, 2}.
ScalarField d_h(const ScalarField& f, int dim);

/// Spectral horizontal divergence d1 u1 + d2 u2.
ScalarField div_h(const HVectorField& u);

/// Spectral horizontal Laplacian.
ScalarField laplacian_h(const ScalarField& f);

/// Zeroes every mode with |k1| > n1/3 or k2 > n2/3 (2/3 rule). Applied to
/// all pointwise products entering nonlinear terms.
void dealias(ScalarField& f);
void dealias(HVectorField& u);

/// Dealiased pointwise product.
ScalarField dmul(const ScalarField& a, const ScalarField& b);

// --- Vertical operators (2nd-order centered differences with BC ghosts) ---

/// d3 f. Ghost values: Neumann mirrors, Robin top ghost
/// f_ghost = f_{n3-2} - 2 dz alpha f_{n3-1}; Interior uses one-sided
/// second-order stencils at both ends.
ScalarField dz(const ScalarField& f, Bc bc);

/// d3^2 f with the same ghost conventions.
ScalarField d2z(const ScalarField& f, Bc bc);

/// Full Laplacian: spectral horizontal part + finite-difference vertical part.
ScalarField laplacian(const ScalarField& f, Bc bc);

// --- Vertical calculus (trapezoid rule) ---

/// Vertical average (1/h) int_{-h}^0 f dzeta; returns an x3-independent slab.
ScalarField vbar(const ScalarField& f);

/// Deviation from the vertical average, f - vbar(f).
ScalarField vtilde(const ScalarField& f);

/// Weighted vertical average (1/h) int_{-h}^0 f(zeta) zeta dzeta (slab).
ScalarField vhat(const ScalarField& f);

/// Cumulative vertical integral int_{-h}^{x3} f dzeta; zero at z = -h.
ScalarField vint(const ScalarField& f);

HVectorField vbar(const HVectorField& u);
HVectorField vtilde(const HVectorField& u);

// --- Quadrature ---

/// Discrete L^2(O) inner product (trapezoid in z, collocation sum in x_H).
/// Slabs are treated as x3-independent integrands over the full depth.
double l2_inner(const ScalarField& a, const ScalarField& b);
double l2_inner(const HVectorField& a, const HVectorField& b);

/// int_O f dx.
double integral(const ScalarField& f);

/// int_{T^2} f dx_H for a slab (or of the given level of a full field).
double integral_slab(const ScalarField& f, int k = 0);

/// Field of vertical coordinates, f(i,j,k) = z_k.
ScalarField z_coordinate(const Grid& g);

}  // namespace hsto
