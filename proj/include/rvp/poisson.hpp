#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "rvp/fft3.hpp"
#include "rvp/grid.hpp"
#include "rvp/quadrature.hpp"

// Free-space Poisson solve by domain doubling: the density is zero-padded to
// twice the node count per axis and convolved spectrally with the sampled
// Green's function G(r) = -1/(4 pi r) laid out with signed minimum-image
// coordinates. For every target in the original box the wrapped convolution
// equals the free-space sum, including a one-node collar outside the box,
// which is exactly what the centered-difference gradient at the box faces
// needs. The field is E = grad phi (repulsive sign, Delta phi = rho).

namespace rvp {

namespace detail {

// Average of 1/|r| over one grid cell centered at the origin; regularizes the
// kernel's singular sample.
inline double cell_average_inv_r(const Vec3& h) {
  static const GaussRule rule = gauss_legendre(24);
  double s = 0.0;
  for (std::size_t a = 0; a < rule.node.size(); ++a) {
    const double x = 0.5 * h.x * rule.node[a];
    for (std::size_t b = 0; b < rule.node.size(); ++b) {
      const double y = 0.5 * h.y * rule.node[b];
      for (std::size_t c = 0; c < rule.node.size(); ++c) {
        const double z = 0.5 * h.z * rule.node[c];
        s += rule.weight[a] * rule.weight[b] * rule.weight[c] / std::sqrt(x * x + y * y + z * z);
      }
    }
  }
  return s / 8.0;  // weights sum to 2 per axis
}

struct HockneyKernel {
  std::vector<std::complex<double>> ghat;  // r2c transform of sampled G, doubled dims
};

inline const HockneyKernel& hockney_kernel(const GridSpec& spec) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, double, double, double>;
  static std::mutex mu;
  static std::map<Key, HockneyKernel*> cache;
  std::lock_guard<std::mutex> lock(mu);
  Key key{spec.nx, spec.ny, spec.nz, spec.spacing.x, spec.spacing.y, spec.spacing.z};
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  const std::size_t Nx = 2 * spec.nx, Ny = 2 * spec.ny, Nz = 2 * spec.nz;
  Fft3& fft = Fft3::get(Nx, Ny, Nz);
  std::vector<double> G(fft.real_count());
  const double g0 = -cell_average_inv_r(spec.spacing) / (4.0 * M_PI);
  for (std::size_t k = 0; k < Nz; ++k) {
    const double dz = (k <= spec.nz ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(Nz)) * spec.spacing.z;
    for (std::size_t j = 0; j < Ny; ++j) {
      const double dy = (j <= spec.ny ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(Ny)) * spec.spacing.y;
      for (std::size_t i = 0; i < Nx; ++i) {
        const double dx = (i <= spec.nx ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(Nx)) * spec.spacing.x;
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        G[(k * Ny + j) * Nx + i] = r == 0.0 ? g0 : -1.0 / (4.0 * M_PI * r);
      }
    }
  }
  auto* kern = new HockneyKernel;
  kern->ghat.resize(fft.cplx_count());
  fft.forward(G.data(), kern->ghat.data());
  it = cache.emplace(key, kern).first;
  return *it->second;
}

}  // namespace detail

// Fills phi, ex, ey, ez from rho. Gradient is centered everywhere; face nodes
// use the valid collar of the doubled solution.
inline void grid_poisson_solve(FieldGrid& g) {
  const GridSpec& s = g.spec;
  const std::size_t Nx = 2 * s.nx, Ny = 2 * s.ny, Nz = 2 * s.nz;
  Fft3& fft = Fft3::get(Nx, Ny, Nz);
  const detail::HockneyKernel& kern = detail::hockney_kernel(s);

  std::vector<double> pad(fft.real_count(), 0.0);
  for (std::size_t k = 0; k < s.nz; ++k) {
    for (std::size_t j = 0; j < s.ny; ++j) {
      const double* src = &g.rho[g.idx(0, j, k)];
      double* dst = &pad[(k * Ny + j) * Nx];
      for (std::size_t i = 0; i < s.nx; ++i) dst[i] = src[i];
    }
  }
  std::vector<std::complex<double>> rh(fft.cplx_count());
  fft.forward(pad.data(), rh.data());
  const double scale = s.cell_volume() * fft.norm();
  for (std::size_t n = 0; n < rh.size(); ++n) rh[n] *= kern.ghat[n] * scale;
  fft.inverse(rh.data(), pad.data());

  g.phi.resize(s.count());
  for (std::size_t k = 0; k < s.nz; ++k) {
    for (std::size_t j = 0; j < s.ny; ++j) {
      for (std::size_t i = 0; i < s.nx; ++i) {
        g.phi[g.idx(i, j, k)] = pad[(k * Ny + j) * Nx + i];
      }
    }
  }

  auto at = [&](std::size_t i, std::size_t j, std::size_t k) {
    return pad[(k * Ny + j) * Nx + i];
  };
  g.ex.assign(s.count(), 0.0);
  g.ey.assign(s.count(), 0.0);
  g.ez.assign(s.count(), 0.0);
  for (std::size_t k = 0; k < s.nz; ++k) {
    const std::size_t km = (k + Nz - 1) % Nz, kp = k + 1;
    for (std::size_t j = 0; j < s.ny; ++j) {
      const std::size_t jm = (j + Ny - 1) % Ny, jp = j + 1;
      for (std::size_t i = 0; i < s.nx; ++i) {
        const std::size_t im = (i + Nx - 1) % Nx, ip = i + 1;
        const std::size_t n = g.idx(i, j, k);
        g.ex[n] = (at(ip, j, k) - at(im, j, k)) / (2.0 * s.spacing.x);
        g.ey[n] = (at(i, jp, k) - at(i, jm, k)) / (2.0 * s.spacing.y);
        g.ez[n] = (at(i, j, kp) - at(i, j, km)) / (2.0 * s.spacing.z);
      }
    }
  }
}

}  // namespace rvp
