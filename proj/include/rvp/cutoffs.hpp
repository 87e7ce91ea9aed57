#pragma once

#include <cmath>

// Cutoff functions. Two families:
//  - cutoff_phi: explicit piecewise cubic ramp, 0 below 0, saturating at 2.
//    C^1, with curvature jumps at the knots 0, 1, 2. Scaled copies
//    phi_l(x) = phi(2^-l x) appear in the transported weight.
//  - psi_tilde: even bump, 1 on [-5/4, 5/4], supported in [-3/2, 3/2].
//    Basis for the dyadic shells psi_k and the velocity bin weights. The
//    transition is a C^3 septic smoothstep: polynomial smoothness is
//    deliberate, because the shell kernels then reach their r^-6 far-field
//    decay inside desk-scale windows, which an exponential bump's slow-onset
//    tails never do.

namespace rvp {

inline double cutoff_phi(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) return x * x * x;
  if (x < 2.0) {
    const double d = x - 2.0;
    return 2.0 + d * d * d;
  }
  return 2.0;
}

inline double cutoff_phi_deriv(double x) {
  if (x <= 0.0 || x >= 2.0) return 0.0;
  if (x < 1.0) return 3.0 * x * x;
  const double d = x - 2.0;
  return 3.0 * d * d;
}

// phi_l(x) = phi(2^-l x). Overflow in the scaling saturates, which is the
// correct limit for the cutoff.
inline double cutoff_phi_scaled(double x, int l) { return cutoff_phi(std::ldexp(x, -l)); }
inline double cutoff_phi_scaled_deriv(double x, int l) {
  return std::ldexp(cutoff_phi_deriv(std::ldexp(x, -l)), -l);
}

// Even, 1 on [-5/4, 5/4], 0 outside (-3/2, 3/2), C^3.
inline double psi_tilde(double t) {
  const double u = std::abs(t);
  if (u <= 1.25) return 1.0;
  if (u >= 1.5) return 0.0;
  const double w = 1.0 - (u - 1.25) * 4.0;  // 1 at the plateau edge, 0 at the support edge
  return w * w * w * w * (35.0 + w * (-84.0 + w * (70.0 - 20.0 * w)));
}

// Dyadic shell k: supported in 5/8 * 2^k <= |x| <= 3/2 * 2^k.
inline double dyadic_cutoff(double r, int k) {
  return psi_tilde(std::ldexp(r, -k)) - psi_tilde(std::ldexp(r, -(k - 1)));
}

// varphi_j: shell for j >= 1, the center bump for j = 0. Summing over
// 0 <= j <= J telescopes to psi_tilde(|x|/2^J).
inline double varphi(double r, int j) {
  if (j == 0) return psi_tilde(r);
  return dyadic_cutoff(r, j);
}

inline double psi_leq(double r, int k) { return psi_tilde(std::ldexp(r, -k)); }
inline double psi_geq(double r, int k) { return 1.0 - psi_tilde(std::ldexp(r, -(k - 1))); }

}  // namespace rvp
