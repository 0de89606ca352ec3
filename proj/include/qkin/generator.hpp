#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qkin/fock.hpp"
#include "qkin/scattering.hpp"
#include "qkin/types.hpp"

namespace qkin {

/// Normalized Gaussian exp(-E^2/2 Delta^2)/(Delta sqrt(2 pi)), cut to zero
/// beyond 4 Delta.
double smearing_kernel(double energy, double delta);

/// Mean spacing of the distinct pair energies W_f1 + W_f2.
double default_smearing_width(const PairBasis& pb);

struct GeneratorCoefficients {
  Statistics statistics = Statistics::Bose;
  std::vector<Mode> modes;
  PairBasis basis;
  double delta = 0.0;
  std::string kernel = "gaussian";
  Matrix veff_pair;  // hermitian, pair basis
  Matrix r_pair;     // R on the pair basis: row = outgoing (k, lambda), column = incoming (f1, f2)
  CTensor4 veff;     // V^eff_{l1 l2 f2 f1}
  CTensor4 r;        // R_{k lambda f2 f1}
  std::optional<double> tau0;

  int mode_count() const { return static_cast<int>(modes.size()); }
};

/// V^eff from the real part of the symmetrized on-shell T, weighted by the
/// elastic factor exp(-E^2/2 Delta^2) inside the kernel cutoff;
/// R = sqrt(2 pi/hbar delta_Delta(E_out - E_in)) T_on-shell.
/// Throws PreconditionError for delta <= 0.
GeneratorCoefficients build_coefficients(const std::vector<Mode>& modes, const TwoBodyTMatrix& t, double delta);

/// Coefficients of the bare commutator generator (no collisions, V^eff = 0).
GeneratorCoefficients free_coefficients(const std::vector<Mode>& modes, Statistics stats);

/// Optional configuration dependence of the collision amplitudes: the
/// factor multiplies R_{k lambda f2 f1} when acting on the occupation `in`.
/// The default is the c-number strategy (factor 1).
using CoefficientStrategy =
    std::function<Complex(const Occupation& in, int k, int lambda, int f2, int f1)>;

/// The generator on a fixed Fock basis, with H_eff, Gamma and the R
/// operators assembled once, and L'(a_h^dag a_k) cached for all pairs.
class Generator {
 public:
  Generator(const FockBasis& basis, GeneratorCoefficients coeffs, CoefficientStrategy strategy = {});

  const FockBasis& basis() const { return *basis_; }
  const GeneratorCoefficients& coefficients() const { return coeffs_; }
  int mode_count() const { return coeffs_.mode_count(); }

  const Matrix& effective_hamiltonian() const { return heff_; }
  const Matrix& gamma() const { return gamma_; }
  /// R_{k lambda} = sum R_{k lambda f2 f1} a_f2 a_f1.
  const Matrix& r_operator(int k, int lambda) const;

  /// L'(a_h^dag a_k).
  const Matrix& apply(int h, int k) const;

  struct Parts {
    Matrix streaming;  // (i/hbar)[H_eff, X]
    Matrix loss;       // -(1/hbar)([Gamma, a_h^dag] a_k - a_h^dag [Gamma, a_k])
    Matrix gain;       // (1/hbar) sum_lambda R_{h lambda}^dag R_{k lambda}
  };
  Parts apply_parts(int h, int k) const;

  /// sum_{hk} c(h,k) L'(a_h^dag a_k).
  Matrix apply_one_body(const Matrix& c) const;
  Parts apply_one_body_parts(const Matrix& c) const;

 private:
  const FockBasis* basis_;
  GeneratorCoefficients coeffs_;
  Matrix heff_;
  Matrix gamma_;
  std::vector<Matrix> r_ops_;
  std::vector<Matrix> lprime_;
};

Matrix effective_hamiltonian(const FockBasis& basis, const GeneratorCoefficients& coeffs);
Matrix gamma_op(const FockBasis& basis, const GeneratorCoefficients& coeffs);
Matrix apply_Lprime(const FockBasis& basis, const GeneratorCoefficients& coeffs, int h, int k);

/// The operators a_h^dag a_k on a truncated basis together with their Gram
/// matrix; decomposes operators in their span.
class BilinearFamily {
 public:
  explicit BilinearFamily(const FockBasis& basis);

  int mode_count() const { return modes_; }
  const Matrix& op(int h, int k) const { return ops_[h * modes_ + k]; }
  /// Coefficients c(h,k) with X = sum c(h,k) a_h^dag a_k. Throws
  /// PreconditionError when the projection residual exceeds `tol`.
  Matrix decompose(const Matrix& x, double tol = 1e-10) const;
  double gram_condition() const { return gram_condition_; }

 private:
  int modes_;
  std::vector<Matrix> ops_;
  Eigen::LDLT<Matrix> gram_;
  double gram_condition_ = 1.0;
};

Matrix apply_Lprime_linear(const Generator& gen, const BilinearFamily& family, const Matrix& x);

struct PositivityWitness {
  double tau;
  Complex q;
  bool kernel_projected;
};

struct PositivityReport {
  int samples = 0;
  double tau_max = 0.0;
  double min_re_q = 0.0;
  double max_abs_im_q = 0.0;
  bool pass = false;
  int negative_tau_samples = 0;
  std::optional<PositivityWitness> negative_tau_witness;
  double min_re_q_negative_tau = 0.0;
};

/// Samples Q = sum_{hk} <psi_h|(I + tau L')(a_h^dag a_k) psi_k> over random
/// normalized families; half of the draws are projected onto the kernel of
/// psi -> sum_k a_k psi_k. Also runs the same number of draws for tau in
/// [-tau_max, 0) and keeps the most negative witness.
PositivityReport positivity_check(const Generator& gen, int n_samples, double tau_max, std::uint64_t seed);

struct ConservationReport {
  double mass_residual = 0.0;
  double energy_residual = 0.0;
};

/// |L'(M)|_F and |L'(H_0)|_F with H_0 the one-body energy sum W_f a_f^dag a_f.
ConservationReport conservation_report(const Generator& gen);

struct DeltaSweepRow {
  double delta;
  double energy_residual;
  double mass_residual;
};

/// Rebuilds the coefficients for each width and reports the residuals.
std::vector<DeltaSweepRow> energy_residual_sweep(const FockBasis& basis, const std::vector<Mode>& modes,
                                                 const TwoBodyTMatrix& t, const std::vector<double>& deltas);

/// Traces over the two-particle sector of the summed gain and loss terms of
/// L'(a_h^dag a_h); equal in magnitude for c-number coefficients.
struct GainLossTraces {
  double gain = 0.0;
  double loss = 0.0;
};
GainLossTraces two_particle_gain_loss(const Generator& gen);

}  // namespace qkin
