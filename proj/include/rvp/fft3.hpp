#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

// Thin wrapper over FFTW real-to-complex 3d transforms. Plans use
// FFTW_ESTIMATE so plan selection is deterministic, and execution stays on
// the calling thread. Plan handles are cached per dimension triple; FFTW
// planning is not thread safe, so creation is serialized.

namespace rvp {

class Fft3 {
 public:
  static Fft3& get(std::size_t nx, std::size_t ny, std::size_t nz) {
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Fft3*> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(nx, ny, nz);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, new Fft3(nx, ny, nz)).first;
    }
    return *it->second;
  }

  std::size_t real_count() const { return nx_ * ny_ * nz_; }
  // r2c layout: x index truncated to nx/2+1, still fastest varying.
  std::size_t cplx_count() const { return (nx_ / 2 + 1) * ny_ * nz_; }

  // In caller-provided buffers; real input is destroyed by c2r (FFTW default).
  void forward(double* in, std::complex<double>* out) {
    fftw_execute_dft_r2c(fwd_, in, reinterpret_cast<fftw_complex*>(out));
  }
  void inverse(std::complex<double>* in, double* out) {
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(in), out);
  }

  double norm() const { return 1.0 / static_cast<double>(real_count()); }

 private:
  Fft3(std::size_t nx, std::size_t ny, std::size_t nz) : nx_(nx), ny_(ny), nz_(nz) {
    std::vector<double> r(real_count());
    std::vector<std::complex<double>> c(cplx_count());
    // FFTW's fastest-varying dimension is the last one; our linear index has
    // x fastest, so the transform is declared as (nz, ny, nx).
    fwd_ = fftw_plan_dft_r2c_3d(static_cast<int>(nz_), static_cast<int>(ny_), static_cast<int>(nx_),
                                r.data(), reinterpret_cast<fftw_complex*>(c.data()), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_3d(static_cast<int>(nz_), static_cast<int>(ny_), static_cast<int>(nx_),
                                reinterpret_cast<fftw_complex*>(c.data()), r.data(), FFTW_ESTIMATE);
    if (fwd_ == nullptr || inv_ == nullptr) throw std::runtime_error("fftw plan creation failed");
  }

  std::size_t nx_, ny_, nz_;
  fftw_plan fwd_, inv_;
};

}  // namespace rvp
