#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvp/particle.hpp"
#include "rvp/vec3.hpp"

// Uniform node-centered Cartesian grid. Linear index runs x fastest:
// idx = (k * ny + j) * nx + i for node (i, j, k) at origin + (i,j,k) * spacing.

namespace rvp {

struct GridSpec {
  std::size_t nx = 0, ny = 0, nz = 0;
  Vec3 origin;
  Vec3 spacing{1.0, 1.0, 1.0};

  std::size_t count() const { return nx * ny * nz; }
  double cell_volume() const { return spacing.x * spacing.y * spacing.z; }
  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const {
    return {origin.x + static_cast<double>(i) * spacing.x,
            origin.y + static_cast<double>(j) * spacing.y,
            origin.z + static_cast<double>(k) * spacing.z};
  }
  // Centered cube helper: nodes span [-half, half] in each axis.
  static GridSpec centered_cube(std::size_t n, double half) {
    GridSpec s;
    s.nx = s.ny = s.nz = n;
    const double h = 2.0 * half / static_cast<double>(n - 1);
    s.spacing = {h, h, h};
    s.origin = {-half, -half, -half};
    return s;
  }
};

struct FieldGrid {
  GridSpec spec;
  std::vector<double> rho;
  std::vector<double> phi;
  std::vector<double> ex, ey, ez;
  double deposited_mass = 0.0;
  double out_of_box_mass = 0.0;

  std::size_t idx(std::size_t i, std::size_t j, std::size_t k) const {
    return (k * spec.ny + j) * spec.nx + i;
  }
  double monopole_mass() const { return deposited_mass + out_of_box_mass; }
};

// Cloud-in-cell deposit. rho is mass per volume; summing rho * cell_volume
// over nodes returns the deposited mass (trilinear weights sum to one).
// Particles whose support leaves the node range are dropped whole and
// recorded in out_of_box_mass.
inline void grid_deposit(FieldGrid& g, const Ensemble& e) {
  const GridSpec& s = g.spec;
  if (s.nx < 2 || s.ny < 2 || s.nz < 2) throw std::invalid_argument("grid_deposit: need 2 nodes per axis");
  g.rho.assign(s.count(), 0.0);
  const double inv_vol = 1.0 / s.cell_volume();
  Kahan in, out;
  for (const Particle& pt : e.p) {
    const double fx = (pt.x.x - s.origin.x) / s.spacing.x;
    const double fy = (pt.x.y - s.origin.y) / s.spacing.y;
    const double fz = (pt.x.z - s.origin.z) / s.spacing.z;
    const double ix = std::floor(fx), iy = std::floor(fy), iz = std::floor(fz);
    if (ix < 0.0 || iy < 0.0 || iz < 0.0 || ix > static_cast<double>(s.nx - 2) ||
        iy > static_cast<double>(s.ny - 2) || iz > static_cast<double>(s.nz - 2)) {
      out.add(pt.w);
      continue;
    }
    const std::size_t i = static_cast<std::size_t>(ix);
    const std::size_t j = static_cast<std::size_t>(iy);
    const std::size_t k = static_cast<std::size_t>(iz);
    const double ax = fx - ix, ay = fy - iy, az = fz - iz;
    const double bx = 1.0 - ax, by = 1.0 - ay, bz = 1.0 - az;
    const double q = pt.w * inv_vol;
    g.rho[g.idx(i, j, k)] += q * bx * by * bz;
    g.rho[g.idx(i + 1, j, k)] += q * ax * by * bz;
    g.rho[g.idx(i, j + 1, k)] += q * bx * ay * bz;
    g.rho[g.idx(i + 1, j + 1, k)] += q * ax * ay * bz;
    g.rho[g.idx(i, j, k + 1)] += q * bx * by * az;
    g.rho[g.idx(i + 1, j, k + 1)] += q * ax * by * az;
    g.rho[g.idx(i, j + 1, k + 1)] += q * bx * ay * az;
    g.rho[g.idx(i + 1, j + 1, k + 1)] += q * ax * ay * az;
    in.add(pt.w);
  }
  g.deposited_mass = in.get();
  g.out_of_box_mass = out.get();
}

// Trilinear field interpolation; outside the node range falls back to the
// monopole field of the full mass about the coordinate origin.
inline Vec3 grid_interpolate(const FieldGrid& g, const Vec3& x) {
  const GridSpec& s = g.spec;
  const double fx = (x.x - s.origin.x) / s.spacing.x;
  const double fy = (x.y - s.origin.y) / s.spacing.y;
  const double fz = (x.z - s.origin.z) / s.spacing.z;
  const double ix = std::floor(fx), iy = std::floor(fy), iz = std::floor(fz);
  if (ix < 0.0 || iy < 0.0 || iz < 0.0 || ix > static_cast<double>(s.nx - 2) ||
      iy > static_cast<double>(s.ny - 2) || iz > static_cast<double>(s.nz - 2)) {
    const double r2 = norm2(x);
    if (r2 == 0.0) return {};
    const double f = g.monopole_mass() / (4.0 * M_PI * r2 * std::sqrt(r2));
    return x * f;
  }
  const std::size_t i = static_cast<std::size_t>(ix);
  const std::size_t j = static_cast<std::size_t>(iy);
  const std::size_t k = static_cast<std::size_t>(iz);
  const double ax = fx - ix, ay = fy - iy, az = fz - iz;
  const double bx = 1.0 - ax, by = 1.0 - ay, bz = 1.0 - az;
  double w[8] = {bx * by * bz, ax * by * bz, bx * ay * bz, ax * ay * bz,
                 bx * by * az, ax * by * az, bx * ay * az, ax * ay * az};
  std::size_t n[8] = {g.idx(i, j, k),     g.idx(i + 1, j, k),     g.idx(i, j + 1, k),
                      g.idx(i + 1, j + 1, k), g.idx(i, j, k + 1), g.idx(i + 1, j, k + 1),
                      g.idx(i, j + 1, k + 1), g.idx(i + 1, j + 1, k + 1)};
  Vec3 out;
  for (int m = 0; m < 8; ++m) {
    out.x += w[m] * g.ex[n[m]];
    out.y += w[m] * g.ey[n[m]];
    out.z += w[m] * g.ez[n[m]];
  }
  return out;
}

// (1/2) int |E|^2 over the box.
inline double grid_field_energy(const FieldGrid& g) {
  Kahan s;
  for (std::size_t n = 0; n < g.ex.size(); ++n) {
    s.add(g.ex[n] * g.ex[n] + g.ey[n] * g.ey[n] + g.ez[n] * g.ez[n]);
  }
  return 0.5 * s.get() * g.spec.cell_volume();
}

// Snapshot format: one JSON header line, newline, then the field values as
// little-endian float64 in linear index order.
inline void write_grid_snapshot(const std::string& path, const FieldGrid& g,
                                const std::string& field) {
  const std::vector<double>* data = nullptr;
  if (field == "rho") data = &g.rho;
  else if (field == "phi") data = &g.phi;
  else if (field == "ex") data = &g.ex;
  else if (field == "ey") data = &g.ey;
  else if (field == "ez") data = &g.ez;
  if (data == nullptr || data->empty()) throw std::invalid_argument("write_grid_snapshot: no field " + field);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  char head[512];
  std::snprintf(head, sizeof(head),
                "{\"field\":\"%s\",\"dims\":[%zu,%zu,%zu],\"origin\":[%.17g,%.17g,%.17g],"
                "\"spacing\":[%.17g,%.17g,%.17g],\"order\":\"x-fastest\",\"dtype\":\"<f8\"}",
                field.c_str(), g.spec.nx, g.spec.ny, g.spec.nz, g.spec.origin.x, g.spec.origin.y,
                g.spec.origin.z, g.spec.spacing.x, g.spec.spacing.y, g.spec.spacing.z);
  os << head << '\n';
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes little endian");
  os.write(reinterpret_cast<const char*>(data->data()),
           static_cast<std::streamsize>(data->size() * sizeof(double)));
  if (!os) throw std::runtime_error("short write: " + path);
}

}  // namespace rvp
