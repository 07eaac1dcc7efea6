#pragma once

#include <complex>
#include <vector>

#include "hsto/grid.hpp"

namespace hsto {

/// Per-plane 2D real<->complex transform on the n1 x n2 periodic layer.
/// Spectral planes hold n1 x (n2/2+1) coefficients, row-major in (i,j);
/// the k1 frequency of row i is i for i <= n1/2 and i-n1 otherwise, the
/// k2 frequency of column j is j.
///
/// Instances own FFTW plans plus scratch buffers and are not safe for
/// concurrent use; spectral_for() hands out one instance per thread.
class Spectral {
 public:
  Spectral(int n1, int n2);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int nc() const { return n2_ / 2 + 1; }
  std::size_t spec_size() const { return static_cast<std::size_t>(n1_) * nc(); }

  int freq1(int i) const { return i <= n1_ / 2 ? i : i - n1_; }

  void forward(const double* phys, std::complex<double>* spec);
  /// Inverse transform, normalized so backward(forward(f)) == f.
  void backward(const std::complex<double>* spec, double* phys);

 private:
  int n1_, n2_;
  void* plan_fwd_;
  void* plan_bwd_;
  double* real_buf_;
  void* cplx_buf_;
};

/// Thread-local transform for the grid's horizontal resolution.
Spectral& spectral_for(const Grid& g);

}  // namespace hsto
