#include "qkin/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace qkin {

ClosureSystem::ClosureSystem(const CellObservables& obs, const Generator& gen) : obs_(&obs), gen_(&gen) {
  if (obs.basis().dim() != gen.basis().dim())
    throw PreconditionError("ClosureSystem: observables and generator live on different bases");
  for (const Matrix& c : obs.coefficients()) lprime_.push_back(gen.apply_one_body(c));
}

ClosureRhs closure_rhs(const ClosureSystem& sys, const GibbsState& state) {
  const CellObservables& obs = sys.observables();
  const int n = obs.count();
  ClosureRhs out;
  out.b.resize(n);
  for (int i = 0; i < n; ++i) out.b(i) = expectation(state, sys.lprime(i));
  const RealMatrix chi = susceptibility_matrix(state, obs.statistics());
  out.m = -chi * obs.natural_jacobian(state.fields);

  Eigen::JacobiSVD<RealMatrix> svd(out.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double smax = s(0), smin = s(s.size() - 1);
  out.condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 1e-13 * smax)) {
    const RealVector null = svd.matrixV().col(s.size() - 1);
    std::ostringstream msg;
    msg << "closure_rhs: chain-rule matrix is singular; null-space combination of (beta, mu, v) per cell:";
    for (int i = 0; i < null.size(); ++i)
      if (std::abs(null(i)) > 1e-6) msg << " [" << i << "]=" << null(i);
    throw NumericalError(msg.str());
  }
  out.dfields = svd.solve(out.b);
  return out;
}

ClosureRhs closure_rhs(const ClosureSystem& sys, const LagrangeFields& fields) {
  return closure_rhs(sys, gibbs_state(sys.observables(), fields));
}

double StateTrajectory::mass_drift() const {
  if (points.empty()) return 0.0;
  const double m0 = points.front().total_mass;
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, std::abs(p.total_mass - m0) / std::max(std::abs(m0), 1e-300));
  return worst;
}

double StateTrajectory::energy_drift() const {
  if (points.empty()) return 0.0;
  const double e0 = points.front().total_energy;
  double worst = 0.0;
  for (const auto& p : points)
    worst = std::max(worst, std::abs(p.total_energy - e0) / std::max(std::abs(e0), 1e-300));
  return worst;
}

double StateTrajectory::beta_contrast(int i) const {
  const auto& cells = points.at(i).fields.cells;
  double lo = cells.front().beta, hi = lo;
  for (const auto& c : cells) {
    lo = std::min(lo, c.beta);
    hi = std::max(hi, c.beta);
  }
  return hi - lo;
}

namespace {

TrajectoryPoint make_point(const CellObservables& obs, double t, const GibbsState& s) {
  TrajectoryPoint p;
  p.t = t;
  p.fields = s.fields;
  p.statistics = statistic_expectations(s, obs);
  p.rest = expectations(s, obs);
  p.entropy = entropy(s);
  for (int c = 0; c < obs.cells(); ++c) {
    p.total_mass += p.rest.cells[c].mass;
    p.total_energy += p.statistics(c * obs.per_cell());
  }
  return p;
}

struct StepResult {
  GibbsState state;
  RealVector y;
  double refit_residual;
  double drift;
};

StepResult rk4_step(const ClosureSystem& sys, const GibbsState& s0, const RealVector& y0, double h,
                    const IntegrateOptions& opts) {
  const CellObservables& obs = sys.observables();
  const int cells = obs.cells(), axes = obs.axes();
  const RealVector x0 = s0.fields.pack(axes);
  auto stage = [&](const RealVector& x) {
    const LagrangeFields f = LagrangeFields::unpack(x, cells, axes);
    f.validate();
    return closure_rhs(sys, gibbs_state(obs, f));
  };
  const ClosureRhs k1 = closure_rhs(sys, s0);
  const ClosureRhs k2 = stage(x0 + 0.5 * h * k1.dfields);
  const ClosureRhs k3 = stage(x0 + 0.5 * h * k2.dfields);
  const ClosureRhs k4 = stage(x0 + h * k3.dfields);
  const RealVector x = x0 + (h / 6.0) * (k1.dfields + 2.0 * k2.dfields + 2.0 * k3.dfields + k4.dfields);
  const RealVector y = y0 + (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);

  FitOptions fo;
  fo.tolerance = opts.refit_tolerance;
  const LagrangeFields guess = LagrangeFields::unpack(x, cells, axes);
  guess.validate();
  FitResult fit = fit_statistics(obs, y, guess, fo);
  const RealVector xf = fit.fields.pack(axes);
  return {std::move(fit.state), y, fit.max_scaled_residual, (x - xf).norm() / std::max(1.0, xf.norm())};
}

}  // namespace

StateTrajectory integrate(const ClosureSystem& sys, const LagrangeFields& initial, double t_span, double dt,
                          const IntegrateOptions& opts) {
  if (!(t_span > 0) || !(dt > 0)) throw PreconditionError("integrate: t_span and dt must be positive");
  if (dt > t_span / 4.0 * (1.0 + 1e-12)) throw PreconditionError("integrate: dt must not exceed t_span/4");
  const std::optional<double> tau0 = sys.tau0();
  const double floor = tau0 ? 5.0 * *tau0 : 0.0;
  if (dt < floor * (1.0 - 1e-12))
    throw PreconditionError("integrate: dt = " + std::to_string(dt) + " is below 5 tau0 = " + std::to_string(floor) +
                            "; no coarse-grained regime at this step");

  const CellObservables& obs = sys.observables();
  const int steps = std::max(1, static_cast<int>(std::llround(t_span / dt)));
  const double h = t_span / steps;
  if (h < floor * (1.0 - 1e-12)) throw PreconditionError("integrate: rounded step falls below 5 tau0");

  StateTrajectory traj;
  GibbsState state = gibbs_state(obs, initial);
  RealVector y = statistic_expectations(state, obs);
  traj.points.push_back(make_point(obs, 0.0, state));

  double t = 0.0;
  for (int n = 0; n < steps; ++n) {
    const double target = (n + 1 == steps) ? t_span : (n + 1) * h;
    double sub = target - t;
    int halvings = 0;
    while (t < target - 1e-12 * t_span) {
      sub = std::min(sub, target - t);
      try {
        StepResult r = rk4_step(sys, state, y, sub, opts);
        state = std::move(r.state);
        y = r.y;
        t += sub;
        TrajectoryPoint p = make_point(obs, t, state);
        p.refit_residual = r.refit_residual;
        p.projection_drift = r.drift;
        p.dt = sub;
        traj.points.push_back(std::move(p));
      } catch (const std::exception& e) {
        ++traj.rejected_steps;
        if (++halvings > opts.max_halvings || 0.5 * sub < floor * (1.0 - 1e-12))
          throw NumericalError(std::string("integrate: step rejected at t = ") + std::to_string(t) +
                               " and cannot be halved further: " + e.what());
        sub *= 0.5;
      }
    }
  }
  return traj;
}

GainLossReport gain_loss_report(const ClosureSystem& sys, const GibbsState& state) {
  const CellObservables& obs = sys.observables();
  const Generator& gen = sys.generator();
  auto entry = [&](const Matrix& coeff) {
    const Generator::Parts p = gen.apply_one_body_parts(coeff);
    return GainLossEntry{expectation(state, 0.5 * (p.streaming + p.streaming.adjoint())),
                         expectation(state, 0.5 * (p.loss + p.loss.adjoint())),
                         expectation(state, 0.5 * (p.gain + p.gain.adjoint()))};
  };
  GainLossReport rep;
  for (const Matrix& c : obs.coefficients()) rep.statistics.push_back(entry(c));
  rep.mass = entry(kMass * Matrix::Identity(gen.mode_count(), gen.mode_count()));
  return rep;
}

void write_trajectory_csv(const StateTrajectory& traj, int axes, std::ostream& out) {
  if (traj.points.empty()) return;
  const int cells = traj.points.front().fields.size();
  const char* ax = "xyz";
  out << "t";
  for (int c = 0; c < cells; ++c) {
    out << ",beta_" << c << ",mu_" << c;
    for (int a = 0; a < axes; ++a) out << ",v" << ax[a] << "_" << c;
  }
  for (int c = 0; c < cells; ++c) {
    out << ",e0_" << c << ",rho_" << c;
    for (int a = 0; a < axes; ++a) out << ",p0" << ax[a] << "_" << c;
  }
  out << ",entropy,total_mass,total_energy,refit_residual,projection_drift\n";
  out << std::setprecision(17);
  for (const auto& p : traj.points) {
    out << p.t;
    for (const auto& f : p.fields.cells) {
      out << ',' << f.beta << ',' << f.mu;
      for (int a = 0; a < axes; ++a) out << ',' << f.v[a];
    }
    for (const auto& r : p.rest.cells) {
      out << ',' << r.energy << ',' << r.mass;
      for (int a = 0; a < axes; ++a) out << ',' << r.momentum[a];
    }
    out << ',' << p.entropy << ',' << p.total_mass << ',' << p.total_energy << ',' << p.refit_residual << ','
        << p.projection_drift << '\n';
  }
}

}  // namespace qkin
