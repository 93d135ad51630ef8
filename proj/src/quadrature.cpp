#include "cipflow/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "cipflow/errors.hpp"

namespace cipflow {

std::vector<LinePoint> gauss_legendre(int n) {
  if (n < 1) throw SetupError("Gauss-Legendre rule needs at least one point");
  std::vector<LinePoint> rule(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule[static_cast<std::size_t>(n - 1 - i)] = {0.5 * (x + 1.0), 0.5 * w};
  }
  return rule;
}

std::vector<LinePoint> segment_rule(int degree) {
  return gauss_legendre(std::max(1, (degree + 2) / 2));
}

std::vector<QuadPoint> triangle_rule(int degree) {
  if (degree < 0) throw SetupError("negative quadrature degree");
  // xi = u, eta = v (1 - u); the Jacobian (1 - u) raises the degree in u by one.
  const auto ru = gauss_legendre(std::max(1, (degree + 2 + 1) / 2));
  const auto rv = gauss_legendre(std::max(1, (degree + 1 + 1) / 2));
  std::vector<QuadPoint> rule;
  rule.reserve(ru.size() * rv.size());
  for (const auto& pu : ru) {
    for (const auto& pv : rv) {
      rule.push_back({Vec2(pu.s, pv.s * (1.0 - pu.s)), pu.weight * pv.weight * (1.0 - pu.s)});
    }
  }
  return rule;
}

}  // namespace cipflow
