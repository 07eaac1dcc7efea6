#include "hsto/ops.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "hsto/fft.hpp"

namespace hsto {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void require_finite(const ScalarField& f, const char* who) {
  if (f.empty()) throw std::invalid_argument(std::string(who) + ": empty field");
  if (!f.finite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

void require_finite(const HVectorField& u, const char* who) {
  require_finite(u.u1, who);
  require_finite(u.u2, who);
  if (u.u1.levels() != u.u2.levels())
    throw std::invalid_argument(std::string(who) + ": component level mismatch");
}

/// Applies op(spec) to every level of f in spectral space.
template <typename Fn>
ScalarField spectral_map(const ScalarField& f, Fn&& op) {
  Spectral& sp = spectral_for(f.grid());
  ScalarField out(f.grid(), f.levels());
  std::vector<std::complex<double>> spec(sp.spec_size());
  for (int k = 0; k < f.levels(); ++k) {
    sp.forward(f.level(k), spec.data());
    op(sp, spec.data());
    sp.backward(spec.data(), out.level(k));
  }
  return out;
}

void derivative_x1(Spectral& sp, std::complex<double>* spec) {
  const int nc = sp.nc();
  for (int i = 0; i < sp.n1(); ++i) {
    const int f1 = sp.freq1(i);
    const std::complex<double> mul = (i == sp.n1() / 2) ? 0.0 : kI * static_cast<double>(f1);
    for (int j = 0; j < nc; ++j) spec[static_cast<std::size_t>(i) * nc + j] *= mul;
  }
}

void derivative_x2(Spectral& sp, std::complex<double>* spec) {
  const int nc = sp.nc();
  for (int i = 0; i < sp.n1(); ++i)
    for (int j = 0; j < nc; ++j) {
      const std::complex<double> mul = (j == sp.n2() / 2) ? 0.0 : kI * static_cast<double>(j);
      spec[static_cast<std::size_t>(i) * nc + j] *= mul;
    }
}

}  // namespace

HVectorField grad_h(const ScalarField& f) {
  require_finite(f, "grad_h");
  ScalarField d1 = spectral_map(f, derivative_x1);
  ScalarField d2 = spectral_map(f, derivative_x2);
  return {std::move(d1), std::move(d2)};
}

ScalarField d_h(const ScalarField& f, int dim) {
  require_finite(f, "d_h");
  if (dim == 1) return spectral_map(f, derivative_x1);
  if (dim == 2) return spectral_map(f, derivative_x2);
  throw std::invalid_argument("d_h: dim must be 1 or 2");
}

ScalarField div_h(const HVectorField& u) {
  require_finite(u, "div_h");
  ScalarField d1 = spectral_map(u.u1, derivative_x1);
  ScalarField d2 = spectral_map(u.u2, derivative_x2);
  d1 += d2;
  return d1;
}

ScalarField laplacian_h(const ScalarField& f) {
  require_finite(f, "laplacian_h");
  return spectral_map(f, [](Spectral& sp, std::complex<double>* spec) {
    const int nc = sp.nc();
    for (int i = 0; i < sp.n1(); ++i) {
      const double k1 = sp.freq1(i);
      for (int j = 0; j < nc; ++j)
        spec[static_cast<std::size_t>(i) * nc + j] *= -(k1 * k1 + static_cast<double>(j) * j);
    }
  });
}

void dealias(ScalarField& f) {
  require_finite(f, "dealias");
  const int c1 = f.grid().n1 / 3;
  const int c2 = f.grid().n2 / 3;
  f = spectral_map(f, [c1, c2](Spectral& sp, std::complex<double>* spec) {
    const int nc = sp.nc();
    for (int i = 0; i < sp.n1(); ++i) {
      const int f1 = std::abs(sp.freq1(i));
      for (int j = 0; j < nc; ++j)
        if (f1 > c1 || j > c2) spec[static_cast<std::size_t>(i) * nc + j] = 0.0;
    }
  });
}

void dealias(HVectorField& u) {
  dealias(u.u1);
  dealias(u.u2);
}

ScalarField dmul(const ScalarField& a, const ScalarField& b) {
  ScalarField r = multiply(a, b);
  dealias(r);
  return r;
}

namespace {

/// Vertical first-derivative stencil on one column; f has stride `stride`.
struct Column {
  const double* f;
  std::size_t stride;
  double operator[](int k) const { return f[stride * k]; }
};

}  // namespace

ScalarField dz(const ScalarField& f, Bc bc) {
  require_finite(f, "dz");
  const Grid& g = f.grid();
  if (f.is_slab()) return ScalarField::slab(g);  // x3-independent: derivative vanishes
  const int n3 = g.n3;
  const double d = g.dz();
  ScalarField out = ScalarField::full(g);
  const std::size_t plane = g.plane();
  for (std::size_t n = 0; n < plane; ++n) {
    Column c{f.data() + n, plane};
    double* o = out.data() + n;
    for (int k = 1; k < n3 - 1; ++k) o[plane * k] = (c[k + 1] - c[k - 1]) / (2.0 * d);
    switch (bc) {
      case Bc::NeumannNeumann:
        o[0] = 0.0;
        o[plane * (n3 - 1)] = 0.0;
        break;
      case Bc::RobinTopNeumannBottom:
        o[0] = 0.0;
        o[plane * (n3 - 1)] = -g.alpha * c[n3 - 1];
        break;
      case Bc::Interior:
        o[0] = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * d);
        o[plane * (n3 - 1)] = (3.0 * c[n3 - 1] - 4.0 * c[n3 - 2] + c[n3 - 3]) / (2.0 * d);
        break;
    }
  }
  return out;
}

ScalarField d2z(const ScalarField& f, Bc bc) {
  require_finite(f, "d2z");
  const Grid& g = f.grid();
  if (f.is_slab()) return ScalarField::slab(g);
  const int n3 = g.n3;
  const double d2 = g.dz() * g.dz();
  ScalarField out = ScalarField::full(g);
  const std::size_t plane = g.plane();
  for (std::size_t n = 0; n < plane; ++n) {
    Column c{f.data() + n, plane};
    double* o = out.data() + n;
    for (int k = 1; k < n3 - 1; ++k) o[plane * k] = (c[k + 1] - 2.0 * c[k] + c[k - 1]) / d2;
    switch (bc) {
      case Bc::NeumannNeumann:
        o[0] = 2.0 * (c[1] - c[0]) / d2;
        o[plane * (n3 - 1)] = 2.0 * (c[n3 - 2] - c[n3 - 1]) / d2;
        break;
      case Bc::RobinTopNeumannBottom:
        o[0] = 2.0 * (c[1] - c[0]) / d2;
        o[plane * (n3 - 1)] =
            (2.0 * c[n3 - 2] - (2.0 + 2.0 * g.dz() * g.alpha) * c[n3 - 1]) / d2;
        break;
      case Bc::Interior:
        o[0] = (2.0 * c[0] - 5.0 * c[1] + 4.0 * c[2] - c[3]) / d2;
        o[plane * (n3 - 1)] =
            (2.0 * c[n3 - 1] - 5.0 * c[n3 - 2] + 4.0 * c[n3 - 3] - c[n3 - 4]) / d2;
        break;
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& f, Bc bc) {
  ScalarField out = laplacian_h(f);
  if (!f.is_slab()) out += d2z(f, bc);
  return out;
}

namespace {

/// Trapezoid weights dz * {1/2, 1, ..., 1, 1/2}.
double trapz_weight(const Grid& g, int k) {
  return (k == 0 || k == g.n3 - 1) ? 0.5 * g.dz() : g.dz();
}

}  // namespace

ScalarField vbar(const ScalarField& f) {
  require_finite(f, "vbar");
  const Grid& g = f.grid();
  if (f.is_slab()) return f;
  ScalarField out = ScalarField::slab(g);
  double* o = out.level(0);
  for (int k = 0; k < g.n3; ++k) {
    const double w = trapz_weight(g, k) / g.h;
    const double* p = f.level(k);
    for (std::size_t n = 0; n < g.plane(); ++n) o[n] += w * p[n];
  }
  return out;
}

ScalarField vtilde(const ScalarField& f) {
  ScalarField out = broadcast_full(f);
  out -= vbar(f);
  return out;
}

ScalarField vhat(const ScalarField& f) {
  require_finite(f, "vhat");
  const Grid& g = f.grid();
  ScalarField out = ScalarField::slab(g);
  double* o = out.level(0);
  for (int k = 0; k < g.n3; ++k) {
    const double w = trapz_weight(g, k) * g.z(k) / g.h;
    const double* p = f.level(f.is_slab() ? 0 : k);
    for (std::size_t n = 0; n < g.plane(); ++n) o[n] += w * p[n];
  }
  return out;
}

ScalarField vint(const ScalarField& f) {
  require_finite(f, "vint");
  const Grid& g = f.grid();
  const ScalarField src = broadcast_full(f);
  ScalarField out = ScalarField::full(g);
  const std::size_t plane = g.plane();
  const double half_dz = 0.5 * g.dz();
  for (std::size_t n = 0; n < plane; ++n) {
    const double* p = src.data() + n;
    double* o = out.data() + n;
    o[0] = 0.0;
    for (int k = 1; k < g.n3; ++k)
      o[plane * k] = o[plane * (k - 1)] + half_dz * (p[plane * (k - 1)] + p[plane * k]);
  }
  return out;
}

HVectorField vbar(const HVectorField& u) { return {vbar(u.u1), vbar(u.u2)}; }
HVectorField vtilde(const HVectorField& u) { return {vtilde(u.u1), vtilde(u.u2)}; }

double l2_inner(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("l2_inner: grid mismatch");
  const Grid& g = a.grid();
  const double area = g.cell_area();
  double acc = 0.0;
  if (a.is_slab() && b.is_slab()) {
    const double* pa = a.level(0);
    const double* pb = b.level(0);
    double s = 0.0;
    for (std::size_t n = 0; n < g.plane(); ++n) s += pa[n] * pb[n];
    return s * area * g.h;
  }
  for (int k = 0; k < g.n3; ++k) {
    const double* pa = a.level(a.is_slab() ? 0 : k);
    const double* pb = b.level(b.is_slab() ? 0 : k);
    double s = 0.0;
    for (std::size_t n = 0; n < g.plane(); ++n) s += pa[n] * pb[n];
    acc += s * trapz_weight(g, k);
  }
  return acc * area;
}

double l2_inner(const HVectorField& a, const HVectorField& b) {
  return l2_inner(a.u1, b.u1) + l2_inner(a.u2, b.u2);
}

double integral(const ScalarField& f) {
  const Grid& g = f.grid();
  double acc = 0.0;
  if (f.is_slab()) {
    const double* p = f.level(0);
    double s = 0.0;
    for (std::size_t n = 0; n < g.plane(); ++n) s += p[n];
    return s * g.cell_area() * g.h;
  }
  for (int k = 0; k < g.n3; ++k) {
    const double* p = f.level(k);
    double s = 0.0;
    for (std::size_t n = 0; n < g.plane(); ++n) s += p[n];
    acc += s * trapz_weight(g, k);
  }
  return acc * g.cell_area();
}

double integral_slab(const ScalarField& f, int k) {
  const Grid& g = f.grid();
  const double* p = f.level(f.is_slab() ? 0 : k);
  double s = 0.0;
  for (std::size_t n = 0; n < g.plane(); ++n) s += p[n];
  return s * g.cell_area();
}

ScalarField z_coordinate(const Grid& g) {
  ScalarField out = ScalarField::full(g);
  for (int k = 0; k < g.n3; ++k) {
    double* p = out.level(k);
    const double zk = g.z(k);
    for (std::size_t n = 0; n < g.plane(); ++n) p[n] = zk;
  }
  return out;
}

}  // namespace hsto
