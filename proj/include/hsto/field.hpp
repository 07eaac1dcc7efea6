#pragma once

#include <vector>

#include "hsto/grid.hpp"

namespace hsto {

/// Real scalar samples on the grid, stored level-major: level k is a
/// contiguous n1 x n2 plane in row-major (i,j) order.
///
/// levels() is either grid.n3 (full field) or 1 (an x3-independent slab,
/// e.g. a surface pressure or a vertically averaged quantity). Slabs
/// broadcast against full fields in all pointwise arithmetic.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(const Grid& g, int levels);

  static ScalarField full(const Grid& g) { return ScalarField(g, g.n3); }
  static ScalarField slab(const Grid& g) { return ScalarField(g, 1); }

  bool empty() const { return grid_ == nullptr; }
  const Grid& grid() const { return *grid_; }
  int levels() const { return levels_; }
  bool is_slab() const { return levels_ == 1; }

  double* level(int k) { return data_.data() + plane_ * level_index(k); }
  const double* level(int k) const { return data_.data() + plane_ * level_index(k); }

  double& at(int i, int j, int k) { return data_[plane_ * level_index(k) + idx(i, j)]; }
  double at(int i, int j, int k) const { return data_[plane_ * level_index(k) + idx(i, j)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  void fill(double value);
  bool finite() const;
  double max_abs() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

  /// this += s * o  (o may be a slab broadcast over this' levels)
  void add_scaled(const ScalarField& o, double s);

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * grid_->n2 + j; }
  int level_index(int k) const { return levels_ == 1 ? 0 : k; }

  const Grid* grid_ = nullptr;
  int levels_ = 0;
  std::size_t plane_ = 0;
  std::vector<double> data_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Pointwise product with slab broadcast; result is full if either factor is.
ScalarField multiply(const ScalarField& a, const ScalarField& b);

/// Expands a slab to a full field (copying the plane to every level).
ScalarField broadcast_full(const ScalarField& f);

/// Two-component horizontal vector field (v^1, v^2).
struct HVectorField {
  ScalarField u1, u2;

  HVectorField() = default;
  HVectorField(ScalarField a, ScalarField b) : u1(std::move(a)), u2(std::move(b)) {}
  static HVectorField full(const Grid& g) { return {ScalarField::full(g), ScalarField::full(g)}; }
  static HVectorField slab(const Grid& g) { return {ScalarField::slab(g), ScalarField::slab(g)}; }

  bool empty() const { return u1.empty(); }
  const Grid& grid() const { return u1.grid(); }
  bool finite() const { return u1.finite() && u2.finite(); }
  double max_abs() const;

  HVectorField& operator+=(const HVectorField& o);
  HVectorField& operator-=(const HVectorField& o);
  HVectorField& operator*=(double s);
  void add_scaled(const HVectorField& o, double s);
};

HVectorField operator+(HVectorField a, const HVectorField& b);
HVectorField operator-(HVectorField a, const HVectorField& b);
HVectorField operator*(double s, HVectorField a);

/// Three-component coefficient field (phi^1, phi^2, phi^3). For noise
/// coefficients the horizontal components are x3-independent slabs.
struct Vec3Field {
  ScalarField c1, c2, c3;
  bool empty() const { return c1.empty(); }
};

}  // namespace hsto
