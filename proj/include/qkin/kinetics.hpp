#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qkin/generator.hpp"
#include "qkin/gibbs.hpp"

namespace qkin {

/// Closed evolution of the cell fields: observables A_i are the one-body
/// statistics of CellObservables, with L'(A_i) precomputed.
class ClosureSystem {
 public:
  ClosureSystem(const CellObservables& obs, const Generator& gen);

  const CellObservables& observables() const { return *obs_; }
  const Generator& generator() const { return *gen_; }
  const Matrix& lprime(int i) const { return lprime_[i]; }
  std::optional<double> tau0() const { return gen_->coefficients().tau0; }

 private:
  const CellObservables* obs_;
  const Generator* gen_;
  std::vector<Matrix> lprime_;
};

struct ClosureRhs {
  RealVector dfields;  // packed d(beta, mu, v)/dt per cell
  RealVector b;        // Tr(L'(A_i) w)
  RealMatrix m;        // d<A_i>/d(packed fields)_j
  double condition = 1.0;
};

/// Solves M dlambda/dt = b at the Gibbs state of `fields`. Throws
/// NumericalError naming the null-space combination when M is singular.
ClosureRhs closure_rhs(const ClosureSystem& sys, const GibbsState& state);
ClosureRhs closure_rhs(const ClosureSystem& sys, const LagrangeFields& fields);

struct TrajectoryPoint {
  double t = 0.0;
  LagrangeFields fields;
  RealVector statistics;   // lab-frame <A_i>
  ConstraintSet rest;      // (e0_c, rho_c, p0_c)
  double entropy = 0.0;
  double total_mass = 0.0;
  double total_energy = 0.0;
  double refit_residual = 0.0;   // scaled residual of the projection fit
  double projection_drift = 0.0; // |lambda_RK4 - lambda_refit| / max(1, |lambda|)
  double dt = 0.0;
};

struct StateTrajectory {
  std::vector<TrajectoryPoint> points;
  int rejected_steps = 0;

  double mass_drift() const;  // max relative deviation of total mass from t = 0
  double energy_drift() const;
  double beta_contrast(int i) const;
};

struct IntegrateOptions {
  double refit_tolerance = 1e-10;
  int max_halvings = 10;
};

/// Classical RK4 for the fields with a warm-started re-fit of the Gibbs
/// state to the RK4-advanced expectations after every step. Requires
/// dt >= 5 tau0 and dt <= t_span/4.
StateTrajectory integrate(const ClosureSystem& sys, const LagrangeFields& initial, double t_span, double dt,
                          const IntegrateOptions& opts = {});

struct GainLossEntry {
  double streaming = 0.0;
  double loss = 0.0;
  double gain = 0.0;
  double total() const { return streaming + loss + gain; }
};

struct GainLossReport {
  std::vector<GainLossEntry> statistics;  // per A_i
  GainLossEntry mass;                     // total mass observable
};

GainLossReport gain_loss_report(const ClosureSystem& sys, const GibbsState& state);

/// One header row, then one row per trajectory point.
void write_trajectory_csv(const StateTrajectory& traj, int axes, std::ostream& out);

}  // namespace qkin
