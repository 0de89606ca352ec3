#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkin/field_model.hpp"
#include "qkin/fock.hpp"
#include "qkin/types.hpp"

namespace qkin {

/// Eigen-decomposition of a hermitian operator, H = U diag(E) U^dagger.
struct SpectralDecomposition {
  RealVector energies;
  Matrix vectors;

  int dim() const { return static_cast<int>(energies.size()); }
  Matrix reconstruct() const;
  /// Maps an operator into / out of the eigenbasis.
  Matrix to_eigenbasis(const Matrix& x) const { return vectors.adjoint() * x * vectors; }
  Matrix from_eigenbasis(const Matrix& x) const { return vectors * x * vectors.adjoint(); }
};

/// Throws PreconditionError if `h` is not hermitian to `tol`, NumericalError
/// if the reconstruction residual exceeds 1e-10 relative to max(1, |H|).
SpectralDecomposition spectral_decomposition(const Matrix& h, double tol = 1e-10);

/// e^{+iHt/hbar} X e^{-iHt/hbar}.
Matrix heisenberg_evolve(const SpectralDecomposition& h, const Matrix& x, double t);
Matrix heisenberg_evolve(const Matrix& h, const Matrix& x, double t);

// Column-major vectorization: vec(A X B) = (B^T kron A) vec(X).
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, int dim);
Matrix apply_superoperator(const Matrix& s, const Matrix& x);
Matrix identity_superoperator(int dim);

/// Superoperator X -> (i/hbar)[H, X] on vectorized operators.
Matrix liouvillian(const Matrix& h);

/// Y solving (z - H')Y = X with H' = (i/hbar)[H, .], computed in the
/// eigenbasis of H. Throws NumericalError ("singular query") when z lies
/// within 1e-12 of an eigenvalue i(E_a - E_b)/hbar.
Matrix resolvent_apply(const SpectralDecomposition& h, Complex z, const Matrix& x);
Matrix resolvent_apply(const Matrix& h, Complex z, const Matrix& x);

/// T(z)X = V'X + V'(z - H')^{-1} V'X with H = H0 + V and V' = (i/hbar)[V, .].
Matrix scattering_map_apply(const Matrix& h0, const Matrix& v, Complex z, const Matrix& x);

/// Two-particle (anti)symmetrized pair basis |f1 f2>, f1 <= f2 (Bose) or
/// f1 < f2 (Fermi), in the order of the N = 2 sector of the Fock basis.
struct PairBasis {
  Statistics statistics = Statistics::Bose;
  std::vector<std::pair<int, int>> pairs;
  RealVector energies;  // W_f1 + W_f2

  int size() const { return static_cast<int>(pairs.size()); }
  int index_of(int a, int b) const;  // order-insensitive; -1 if absent
};

PairBasis make_pair_basis(const std::vector<Mode>& modes, Statistics stats);

/// Matrix of the pair interaction on the two-particle sector.
Matrix pair_matrix(const std::vector<Mode>& modes, const CTensor4& v, Statistics stats);

/// Converts a pair-basis matrix into the mode-indexed tensor t_{l1 l2 f2 f1}
/// whose second-quantized form (1/2) sum a^dag a^dag t a a has exactly that
/// matrix on the two-particle sector (symmetric fill for Bose, antisymmetric
/// for Fermi).
CTensor4 pair_matrix_to_tensor(const PairBasis& pb, const Matrix& m, int mode_count);

struct TwoBodyTMatrix {
  PairBasis basis;
  Complex z;
  double epsilon = 1e-3;
  Matrix v_pair;
  Matrix t;           // T(z) for the requested z
  Matrix on_shell;    // column j evaluated at z = E_j + i epsilon
  std::optional<Matrix> on_shell_extrapolated;  // linear eps -> 0 from eps and eps/2
  double condition = 1.0;  // worst condition number of (I - V G0) encountered
};

struct TMatrixOptions {
  double epsilon = 1e-3;
  double condition_cap = 1e10;
  bool extrapolate = false;
};

/// Solves T = V + V G0(z) T on the pair basis by dense LU,
/// G0(z) = diag(1/(z - W_f1 - W_f2)). Requires Im z > 0.
TwoBodyTMatrix two_body_tmatrix(const std::vector<Mode>& modes, const CTensor4& v, Statistics stats, Complex z,
                                const TMatrixOptions& opts = {});

/// Collision time hbar / max |on-shell T|; nullopt means "no collisions".
std::optional<double> collision_time_estimate(const TwoBodyTMatrix& t);

struct CoarseWindow {
  double tau0 = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
  std::vector<double> samples;

  double lower() const { return 5.0 * tau0; }
  double upper() const { return t_max / 5.0; }
  /// Sample times in [lower, upper]; for an unbounded window the samples
  /// span [5 tau0, 50 tau0]. Throws NumericalError if the window is empty.
  static CoarseWindow make(double tau0, double energy_gap, int count = 5);
  double mid() const;
};

struct CoarseSample {
  double t;
  double delta;
};

struct CoarseReport {
  int h = 0, k = 0;
  CoarseWindow window;
  std::vector<CoarseSample> samples;
};

/// delta(t) = |U'(t)X - X - t L'X|_F / |t L'X|_F for X = a_h^dag a_k and the
/// exact H = H0 + V, over the window samples.
CoarseReport coarse_grained_check(const Matrix& h0, const Matrix& v, const Matrix& x, const Matrix& lprime_x,
                                  int h, int k, const CoarseWindow& window);

}  // namespace qkin
