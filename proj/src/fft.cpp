#include "hsto/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace hsto {

namespace {
// FFTW planning is not thread-safe; execution on private buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Spectral::Spectral(int n1, int n2) : n1_(n1), n2_(n2) {
  std::lock_guard<std::mutex> lock(plan_mutex());
  real_buf_ = fftw_alloc_real(static_cast<std::size_t>(n1) * n2);
  cplx_buf_ = fftw_alloc_complex(spec_size());
  plan_fwd_ = fftw_plan_dft_r2c_2d(n1, n2, real_buf_, static_cast<fftw_complex*>(cplx_buf_),
                                   FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_c2r_2d(n1, n2, static_cast<fftw_complex*>(cplx_buf_), real_buf_,
                                   FFTW_ESTIMATE);
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(real_buf_);
  fftw_free(cplx_buf_);
}

void Spectral::forward(const double* phys, std::complex<double>* spec) {
  std::memcpy(real_buf_, phys, sizeof(double) * n1_ * n2_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(spec, cplx_buf_, sizeof(std::complex<double>) * spec_size());
}

void Spectral::backward(const std::complex<double>* spec, double* phys) {
  std::memcpy(cplx_buf_, spec, sizeof(std::complex<double>) * spec_size());
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double scale = 1.0 / (static_cast<double>(n1_) * n2_);
  for (int n = 0; n < n1_ * n2_; ++n) phys[n] = real_buf_[n] * scale;
}

Spectral& spectral_for(const Grid& g) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
  auto key = std::make_pair(g.n1, g.n2);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<Spectral>(g.n1, g.n2)).first;
  return *it->second;
}

}  // namespace hsto
