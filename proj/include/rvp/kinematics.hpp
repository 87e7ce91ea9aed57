#pragma once

#include <cmath>

#include "rvp/vec3.hpp"

// Relativistic kinematics, units with c = 1. Velocities are momenta per unit
// mass; the transport speed is |v|/sqrt(1+|v|^2) < 1.

namespace rvp {

inline double gamma_of(const Vec3& v) { return std::sqrt(1.0 + norm2(v)); }

// v-hat in the transport term of the kinetic equation.
inline Vec3 relativistic_velocity(const Vec3& v) { return v * (1.0 / gamma_of(v)); }

inline double planar_radius(const Vec3& x) { return std::hypot(x.x, x.y); }

// l = x1 v2 - x2 v1, conserved when the force has no azimuthal component.
inline double planar_angular_momentum(const Vec3& x, const Vec3& v) {
  return x.x * v.y - x.y * v.x;
}

// (v.x)/|v|, nondecreasing along characteristics of an outward field.
// Requires |v| > 0.
inline double monotone_quantity(const Vec3& x, const Vec3& v) {
  return dot(v, x) / norm(v);
}

}  // namespace rvp
