#include "hsto/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsto {

namespace {

void check_compatible(const ScalarField& a, const ScalarField& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("field op on empty field");
  if (!(a.grid() == b.grid())) throw std::invalid_argument("field op: grid mismatch");
}

}  // namespace

ScalarField::ScalarField(const Grid& g, int levels)
    : grid_(&g), levels_(levels), plane_(g.plane()), data_(g.plane() * levels, 0.0) {
  if (levels != 1 && levels != g.n3)
    throw std::invalid_argument("ScalarField: levels must be 1 or grid.n3");
}

void ScalarField::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool ScalarField::finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  add_scaled(o, 1.0);
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  add_scaled(o, -1.0);
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

void ScalarField::add_scaled(const ScalarField& o, double s) {
  check_compatible(*this, o);
  if (o.levels() == levels_) {
    const double* src = o.data();
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += s * src[n];
  } else if (o.is_slab()) {
    for (int k = 0; k < levels_; ++k) {
      double* dst = level(k);
      const double* src = o.level(0);
      for (std::size_t n = 0; n < plane_; ++n) dst[n] += s * src[n];
    }
  } else {
    throw std::invalid_argument("add_scaled: cannot add full field to slab");
  }
}

ScalarField operator+(ScalarField a, const ScalarField& b) {
  if (a.is_slab() && !b.is_slab()) {
    ScalarField r = broadcast_full(a);
    r += b;
    return r;
  }
  a += b;
  return a;
}

ScalarField operator-(ScalarField a, const ScalarField& b) {
  if (a.is_slab() && !b.is_slab()) {
    ScalarField r = broadcast_full(a);
    r -= b;
    return r;
  }
  a -= b;
  return a;
}

ScalarField operator*(double s, ScalarField a) {
  a *= s;
  return a;
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  check_compatible(a, b);
  const Grid& g = a.grid();
  const int levels = std::max(a.levels(), b.levels());
  ScalarField r(g, levels);
  for (int k = 0; k < levels; ++k) {
    const double* pa = a.level(k);
    const double* pb = b.level(k);
    double* pr = r.level(k);
    for (std::size_t n = 0; n < g.plane(); ++n) pr[n] = pa[n] * pb[n];
  }
  return r;
}

ScalarField broadcast_full(const ScalarField& f) {
  if (!f.is_slab()) return f;
  ScalarField r = ScalarField::full(f.grid());
  for (int k = 0; k < f.grid().n3; ++k)
    std::copy(f.level(0), f.level(0) + f.grid().plane(), r.level(k));
  return r;
}

double HVectorField::max_abs() const { return std::max(u1.max_abs(), u2.max_abs()); }

HVectorField& HVectorField::operator+=(const HVectorField& o) {
  u1 += o.u1;
  u2 += o.u2;
  return *this;
}

HVectorField& HVectorField::operator-=(const HVectorField& o) {
  u1 -= o.u1;
  u2 -= o.u2;
  return *this;
}

HVectorField& HVectorField::operator*=(double s) {
  u1 *= s;
  u2 *= s;
  return *this;
}

void HVectorField::add_scaled(const HVectorField& o, double s) {
  u1.add_scaled(o.u1, s);
  u2.add_scaled(o.u2, s);
}

HVectorField operator+(HVectorField a, const HVectorField& b) {
  return {a.u1 + b.u1, a.u2 + b.u2};
}

HVectorField operator-(HVectorField a, const HVectorField& b) {
  return {a.u1 - b.u1, a.u2 - b.u2};
}

HVectorField operator*(double s, HVectorField a) {
  a *= s;
  return a;
}

}  // namespace hsto
