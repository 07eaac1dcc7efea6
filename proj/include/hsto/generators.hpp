#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsto/dynamics.hpp"
#include "hsto/noise.hpp"

namespace hsto {

/// Scalar-field generator grammar (used for sigma, kappa, forcing_theta,
/// init_theta):
///   "zero" | "none"
///   "constant C"
///   "single_fourier_mode K1 K2 AMP"          x3-independent cosine mode
///   "single_mode K1 K2 M AMP"                cosine mode times cos(M pi (z+h)/h)
///   "random_smooth KMAX MMAX AMP"            seeded band-limited field
ScalarField make_scalar_field(const Grid& g, const std::string& spec, std::uint64_t seed,
                              bool force_slab);

/// Horizontal vector generator for forcing_v / init_v; the same grammar,
/// producing a solenoidal direction for single modes and two independent
/// random components (then projected by the caller where needed).
HVectorField make_vector_field(const Grid& g, const std::string& spec, std::uint64_t seed);

/// Vector noise family grammar (phi, psi): entries separated by ';'
///   "none"
///   "constant CX CY CZ"                      one constant mode
///   "single_fourier_mode K1 K2 AMP"          one solenoidal horizontal mode
///   "kraichnan_spectrum SLOPE CUTOFF AMP"    solenoidal modes for 0<|k|<=CUTOFF,
///                                            amplitude AMP |k|^{-SLOPE/2}, cos/sin
///                                            phases, filled up to N
///   "file PATH"                              raw slabs from an NDJSON field file
std::vector<Vec3Field> make_vec3_family(const Grid& g, const std::string& spec, int n_target,
                                        const std::string& family_name);

/// Scalar noise family grammar (sigma): "none" | "constant S" |
/// "single_fourier_mode K1 K2 AMP" | "file PATH"; entries ';'-separated,
/// padded with zero slabs to N.
std::vector<ScalarField> make_scalar_family(const Grid& g, const std::string& spec, int n_target,
                                            const std::string& family_name);

}  // namespace hsto
