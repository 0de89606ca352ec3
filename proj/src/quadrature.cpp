#include "qkin/quadrature.hpp"

#include <cmath>

#include "qkin/types.hpp"

namespace qkin {

QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw PreconditionError("gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) { p1 = x; p0 = 1.0; }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order == 1 ? 1.0 : order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[order - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[order - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace qkin
