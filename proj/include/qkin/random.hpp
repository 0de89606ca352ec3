#pragma once

#include <cstdint>
#include <random>

#include "qkin/types.hpp"

namespace qkin {

/// Seeded source of the random matrices used by sampled checks.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : rng_(seed) {}

  double normal() { return normal_(rng_); }
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  Complex complex_normal() { return {normal(), normal()}; }

  Vector vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = complex_normal();
    return v;
  }

  Matrix matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

  Matrix hermitian(int n) {
    const Matrix m = matrix(n, n);
    return 0.5 * (m + m.adjoint());
  }

  /// G G^dagger / Tr(G G^dagger) with G of size n x rank.
  Matrix density(int n, int rank = -1) {
    const Matrix g = matrix(n, rank < 1 ? n : rank);
    const Matrix r = g * g.adjoint();
    return r / r.trace().real();
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qkin
