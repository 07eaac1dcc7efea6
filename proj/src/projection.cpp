#include "hsto/projection.hpp"

#include <complex>
#include <stdexcept>
#include <vector>

#include "hsto/fft.hpp"
#include "hsto/ops.hpp"

namespace hsto {

Projector::Projector(const Grid& g) : grid_(&g) {
  Spectral& sp = spectral_for(g);
  inv_lap_.assign(sp.spec_size(), 0.0);
  for (int i = 0; i < g.n1; ++i) {
    const double k1 = sp.freq1(i);
    for (int j = 0; j < sp.nc(); ++j) {
      const double kk = k1 * k1 + static_cast<double>(j) * j;
      inv_lap_[static_cast<std::size_t>(i) * sp.nc() + j] = (kk == 0.0) ? 0.0 : -1.0 / kk;
    }
  }
}

ScalarField Projector::qh_potential(const HVectorField& u) const {
  ScalarField div = div_h(u);
  Spectral& sp = spectral_for(*grid_);
  ScalarField psi(*grid_, div.levels());
  std::vector<std::complex<double>> spec(sp.spec_size());
  for (int k = 0; k < div.levels(); ++k) {
    sp.forward(div.level(k), spec.data());
    for (std::size_t n = 0; n < spec.size(); ++n) spec[n] *= inv_lap_[n];
    sp.backward(spec.data(), psi.level(k));
  }
  return psi;
}

HVectorField Projector::apply_qh(const HVectorField& u) const {
  return grad_h(qh_potential(u));
}

HVectorField Projector::apply_ph(const HVectorField& u) const {
  HVectorField q = apply_qh(u);
  return {u.u1 - q.u1, u.u2 - q.u2};
}

HVectorField Projector::apply_q(const HVectorField& u) const {
  return apply_qh(vbar(u));
}

HVectorField Projector::apply_p(const HVectorField& u) const {
  HVectorField q = apply_q(u);
  return {u.u1 - q.u1, u.u2 - q.u2};
}

}  // namespace hsto
