#pragma once

#include <vector>

namespace qkin {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` points mapped to [a, b].
QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

}  // namespace qkin
