#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace rvp {

struct GaussRule {
  std::vector<double> node;    // on [-1, 1]
  std::vector<double> weight;
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence.
inline GaussRule gauss_legendre(std::size_t n) {
  GaussRule r;
  r.node.resize(n);
  r.weight.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.node[i] = -x;
    r.node[n - 1 - i] = x;
    r.weight[i] = w;
    r.weight[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.node[n / 2] = 0.0;
  return r;
}

// Integrate f over [a, b] with an n-point rule.
template <class F>
double gauss_integrate(const GaussRule& r, double a, double b, F&& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.node.size(); ++i) {
    s += r.weight[i] * f(mid + half * r.node[i]);
  }
  return s * half;
}

}  // namespace rvp
