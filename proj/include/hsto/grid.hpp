#pragma once

#include <cstddef>

namespace hsto {

/// Boundary-condition tag for vertical derivatives on the slab (-h,0).
/// NeumannNeumann        : d3 f = 0 at z=-h and z=0 (velocity).
/// RobinTopNeumannBottom : d3 f(.,0) + alpha f(.,0) = 0, d3 f(.,-h) = 0 (temperature).
/// Interior              : no boundary condition; one-sided second-order stencils.
enum class Bc { NeumannNeumann, RobinTopNeumannBottom, Interior };

/// Discretization of T^2 x (-h,0): n1 x n2 collocation points on the
/// 2pi-periodic square, n3 uniformly spaced vertical levels
/// z_k = -h + k*dz with dz = h/(n3-1), so z_0 = -h and z_{n3-1} = 0.
struct Grid {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;
  double h = 1.0;
  double alpha = 0.0;  // Robin coefficient at the top surface

  Grid(int n1_, int n2_, int n3_, double h_, double alpha_ = 0.0);

  double dz() const { return h / (n3 - 1); }
  double z(int k) const { return -h + k * dz(); }
  double x1(int i) const;
  double x2(int j) const;

  std::size_t plane() const { return static_cast<std::size_t>(n1) * n2; }
  std::size_t volume() const { return plane() * n3; }

  /// Horizontal cell area, so that sum_{i,j} f_ij * cell_area() integrates over T^2.
  double cell_area() const;

  bool operator==(const Grid& o) const {
    return n1 == o.n1 && n2 == o.n2 && n3 == o.n3 && h == o.h && alpha == o.alpha;
  }
};

}  // namespace hsto
