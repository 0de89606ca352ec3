#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkin/field_model.hpp"
#include "qkin/fock.hpp"
#include "qkin/types.hpp"

namespace qkin {

struct CellFields {
  double beta = 1.0;
  double mu = 0.0;  // energy per mass
  Velocity v{0.0, 0.0, 0.0};
};

/// Objective state variables (beta_c, mu_c, v_c) for every cell.
struct LagrangeFields {
  std::vector<CellFields> cells;

  int size() const { return static_cast<int>(cells.size()); }
  static LagrangeFields uniform(int cells, double beta, double mu);
  /// Packs (beta, mu, v_1..v_axes) per cell.
  RealVector pack(int axes) const;
  static LagrangeFields unpack(const RealVector& x, int cells, int axes);
  void validate() const;
};

struct CellTargets {
  double energy = 0.0;         // e0_c, rest-frame energy
  double mass = 0.0;           // rho_c
  Velocity momentum{0, 0, 0};  // p0_c, normally zero
};

struct ConstraintSet {
  std::vector<CellTargets> cells;
  int size() const { return static_cast<int>(cells.size()); }
};

/// Cell observables entering the generalized Gibbs exponent, all one-body:
/// lab-frame kinetic energy T_c, momentum P_c (per axis) and number N_c.
/// With theta = (beta, -beta v, beta(m v^2/2 - m mu)) per cell the exponent
/// is K = sum_c theta_c . (T_c, P_c, N_c), i.e. beta(e0_c[v] - mu rho_c).
class CellObservables {
 public:
  CellObservables(const FockBasis& basis, const FieldModel& model);

  const FockBasis& basis() const { return *basis_; }
  const FieldModel& model() const { return *model_; }
  int cells() const { return cells_; }
  int axes() const { return axes_; }
  int per_cell() const { return axes_ + 2; }
  int count() const { return cells_ * per_cell(); }

  /// Statistic index layout per cell: 0 = T_c, 1..axes = P_c, axes+1 = N_c.
  const std::vector<Matrix>& statistics() const { return ops_; }
  /// F x F one-body coefficients of each statistic.
  const std::vector<Matrix>& coefficients() const { return coeffs_; }
  const Matrix& kinetic(int c) const { return ops_[c * per_cell()]; }
  const Matrix& momentum(int c, int axis) const { return ops_[c * per_cell() + 1 + axis]; }
  const Matrix& number(int c) const { return ops_[c * per_cell() + axes_ + 1]; }

  Matrix rest_energy(int c, const Velocity& v) const;
  Matrix rest_momentum(int c, int axis, const Velocity& v) const;
  Matrix mass(int c) const { return kMass * number(c); }
  /// Spectral radius of statistic i, used to scale residuals near zero targets.
  double operator_norm(int i) const { return norms_[i]; }

  RealVector natural(const LagrangeFields& f) const;
  LagrangeFields fields_from_natural(const RealVector& theta) const;
  /// d theta / d(packed fields), block diagonal over cells.
  RealMatrix natural_jacobian(const LagrangeFields& f) const;

  /// Lab-frame statistic targets implied by rest-frame targets at velocities v.
  RealVector lab_targets(const ConstraintSet& t, const LagrangeFields& at) const;

 private:
  const FockBasis* basis_;
  const FieldModel* model_;
  int cells_;
  int axes_;
  std::vector<Matrix> ops_;
  std::vector<Matrix> coeffs_;
  std::vector<double> norms_;
};

struct GibbsState {
  Matrix w;
  RealVector probabilities;  // eigenvalues of w, in the eigenbasis of K
  RealVector log_probabilities;
  Matrix eigenvectors;
  double log_partition = 0.0;
  LagrangeFields fields;

  int dim() const { return static_cast<int>(probabilities.size()); }
};

/// w = exp(-K)/Tr exp(-K), spectrally, with K shifted by its minimum eigenvalue.
GibbsState gibbs_state(const CellObservables& obs, const LagrangeFields& fields);
GibbsState gibbs_state_from_exponent(const Matrix& k);

double expectation(const GibbsState& s, const Matrix& a);
/// Tr(A_i w) for every statistic.
RealVector statistic_expectations(const GibbsState& s, const CellObservables& obs);
/// Rest-frame values (e0_c, rho_c, p0_c) at the state's own velocities.
ConstraintSet expectations(const GibbsState& s, const CellObservables& obs);

/// Von Neumann entropy with k = 1; throws PreconditionError on eigenvalues
/// below -1e-10 or trace away from 1.
double entropy(const Matrix& w);
double entropy(const GibbsState& s);

double kubo_mori_susceptibility(const GibbsState& s, const Matrix& a, const Matrix& b);
RealMatrix susceptibility_matrix(const GibbsState& s, const std::vector<Matrix>& ops);
/// chi(A_i, B_j) for two operator lists.
RealMatrix susceptibility_matrix(const GibbsState& s, const std::vector<Matrix>& a, const std::vector<Matrix>& b);

struct FitIteration {
  int iteration;
  double max_scaled_residual;
  double step;
  double dual;
};

struct FitOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
};

struct FitResult {
  LagrangeFields fields;
  GibbsState state;
  std::vector<FitIteration> trace;
  int iterations = 0;
  double max_scaled_residual = 0.0;
};

/// Damped Newton on the dual log Z(theta) + theta . t for lab-frame
/// statistic targets t; Newton direction chi^{-1} r, step halving on dual
/// increase. Throws NumericalError on non-convergence or infeasibility.
FitResult fit_statistics(const CellObservables& obs, const RealVector& targets, const LagrangeFields& init,
                         const FitOptions& opts = {});

/// Maximum-entropy fit to rest-frame targets: each dual Newton step uses the
/// lab-frame targets implied at the current velocities.
FitResult maxent_fit(const CellObservables& obs, const ConstraintSet& targets, const LagrangeFields& init,
                     const FitOptions& opts = {});

/// Uniform (beta, mu) matched to the total energy and mass of the targets.
LagrangeFields initial_fields(const CellObservables& obs, const ConstraintSet& targets);

/// Rest-frame targets must lie strictly inside the spectra of the
/// corresponding observables; throws PreconditionError otherwise.
void check_feasible(const CellObservables& obs, const ConstraintSet& targets);

/// Largest rest-frame constraint violation of w, scaled as in the fit.
double constraint_residual(const CellObservables& obs, const GibbsState& s, const ConstraintSet& targets);

struct MaximalityReport {
  double entropy_fit = 0.0;
  double max_entropy_perturbed = 0.0;
  double max_constraint_shift = 0.0;
  int perturbations = 0;
  bool pass = false;
};

/// Compares S(w_G) with states w_G + eps D, D hermitian, traceless and
/// orthogonal to every statistic, eps keeping w positive.
MaximalityReport maximality_check(const CellObservables& obs, const GibbsState& s, int perturbations,
                                  std::uint64_t seed);

}  // namespace qkin
