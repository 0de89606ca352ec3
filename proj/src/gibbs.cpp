#include "qkin/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace qkin {

LagrangeFields LagrangeFields::uniform(int cells, double beta, double mu) {
  LagrangeFields f;
  f.cells.assign(cells, CellFields{beta, mu, {0, 0, 0}});
  return f;
}

RealVector LagrangeFields::pack(int axes) const {
  const int per = axes + 2;
  RealVector x(size() * per);
  for (int c = 0; c < size(); ++c) {
    x(c * per) = cells[c].beta;
    x(c * per + 1) = cells[c].mu;
    for (int a = 0; a < axes; ++a) x(c * per + 2 + a) = cells[c].v[a];
  }
  return x;
}

LagrangeFields LagrangeFields::unpack(const RealVector& x, int cells, int axes) {
  const int per = axes + 2;
  if (x.size() != cells * per) throw PreconditionError("LagrangeFields::unpack: size mismatch");
  LagrangeFields f;
  f.cells.resize(cells);
  for (int c = 0; c < cells; ++c) {
    f.cells[c].beta = x(c * per);
    f.cells[c].mu = x(c * per + 1);
    for (int a = 0; a < axes; ++a) f.cells[c].v[a] = x(c * per + 2 + a);
  }
  return f;
}

void LagrangeFields::validate() const {
  for (const auto& c : cells) {
    if (!(c.beta > 0) || !std::isfinite(c.beta)) throw PreconditionError("LagrangeFields: beta must be > 0");
    if (!std::isfinite(c.mu)) throw PreconditionError("LagrangeFields: mu must be finite");
    for (double v : c.v)
      if (!std::isfinite(v)) throw PreconditionError("LagrangeFields: velocity must be finite");
  }
}

namespace {

double spectral_radius(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

RealVector spectrum(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

CellObservables::CellObservables(const FockBasis& basis, const FieldModel& model)
    : basis_(&basis), model_(&model), cells_(model.cells.size()), axes_(model.geometry.axes()) {
  if (basis.mode_count() != model.mode_count()) throw PreconditionError("CellObservables: mode count mismatch");
  for (int c = 0; c < cells_; ++c) {
    coeffs_.push_back(model.kinetic[c]);
    for (int a = 0; a < axes_; ++a) coeffs_.push_back(model.momentum[c][a]);
    coeffs_.push_back(model.overlap[c]);
  }
  for (const Matrix& m : coeffs_) {
    ops_.push_back(one_body_operator(basis, m));
    norms_.push_back(spectral_radius(ops_.back()));
  }
}

Matrix CellObservables::rest_energy(int c, const Velocity& v) const {
  Matrix e = kinetic(c);
  double v2 = 0.0;
  for (int a = 0; a < axes_; ++a) {
    e -= v[a] * momentum(c, a);
    v2 += v[a] * v[a];
  }
  return e + 0.5 * kMass * v2 * number(c);
}

Matrix CellObservables::rest_momentum(int c, int axis, const Velocity& v) const {
  return momentum(c, axis) - kMass * v[axis] * number(c);
}

RealVector CellObservables::natural(const LagrangeFields& f) const {
  if (f.size() != cells_) throw PreconditionError("CellObservables: field count does not match the cell grid");
  RealVector th(count());
  for (int c = 0; c < cells_; ++c) {
    const CellFields& cf = f.cells[c];
    double v2 = 0.0;
    th(c * per_cell()) = cf.beta;
    for (int a = 0; a < axes_; ++a) {
      th(c * per_cell() + 1 + a) = -cf.beta * cf.v[a];
      v2 += cf.v[a] * cf.v[a];
    }
    th(c * per_cell() + axes_ + 1) = cf.beta * kMass * (0.5 * v2 - cf.mu);
  }
  return th;
}

LagrangeFields CellObservables::fields_from_natural(const RealVector& th) const {
  LagrangeFields f;
  f.cells.resize(cells_);
  for (int c = 0; c < cells_; ++c) {
    CellFields& cf = f.cells[c];
    cf.beta = th(c * per_cell());
    double v2 = 0.0;
    for (int a = 0; a < axes_; ++a) {
      cf.v[a] = -th(c * per_cell() + 1 + a) / cf.beta;
      v2 += cf.v[a] * cf.v[a];
    }
    cf.mu = 0.5 * v2 - th(c * per_cell() + axes_ + 1) / (cf.beta * kMass);
  }
  return f;
}

RealMatrix CellObservables::natural_jacobian(const LagrangeFields& f) const {
  const int per = per_cell();
  RealMatrix j = RealMatrix::Zero(count(), count());
  for (int c = 0; c < cells_; ++c) {
    const CellFields& cf = f.cells[c];
    const int o = c * per;
    // packed columns: beta, mu, v_a ; rows: T, P_a, N
    double v2 = 0.0;
    for (int a = 0; a < axes_; ++a) v2 += cf.v[a] * cf.v[a];
    j(o, o) = 1.0;
    for (int a = 0; a < axes_; ++a) {
      j(o + 1 + a, o) = -cf.v[a];
      j(o + 1 + a, o + 2 + a) = -cf.beta;
      j(o + axes_ + 1, o + 2 + a) = cf.beta * kMass * cf.v[a];
    }
    j(o + axes_ + 1, o) = kMass * (0.5 * v2 - cf.mu);
    j(o + axes_ + 1, o + 1) = -cf.beta * kMass;
  }
  return j;
}

RealVector CellObservables::lab_targets(const ConstraintSet& t, const LagrangeFields& at) const {
  if (t.size() != cells_ || at.size() != cells_) throw PreconditionError("lab_targets: cell count mismatch");
  RealVector out(count());
  for (int c = 0; c < cells_; ++c) {
    const CellTargets& ct = t.cells[c];
    const Velocity& v = at.cells[c].v;
    double vp = 0.0, v2 = 0.0;
    for (int a = 0; a < axes_; ++a) {
      vp += v[a] * ct.momentum[a];
      v2 += v[a] * v[a];
      out(c * per_cell() + 1 + a) = ct.momentum[a] + v[a] * ct.mass;
    }
    out(c * per_cell()) = ct.energy + vp + 0.5 * v2 * ct.mass;
    out(c * per_cell() + axes_ + 1) = ct.mass / kMass;
  }
  return out;
}

GibbsState gibbs_state_from_exponent(const Matrix& k) {
  if (hermiticity_defect(k) > 1e-10 * std::max(1.0, k.cwiseAbs().maxCoeff()))
    throw PreconditionError("gibbs_state: exponent is not hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("gibbs_state: eigensolver failed");
  const RealVector& e = es.eigenvalues();
  const double kmin = e.minCoeff();
  const RealVector shifted = (-(e.array() - kmin)).exp();
  const double z = shifted.sum();
  GibbsState s;
  s.probabilities = shifted / z;
  s.log_probabilities = -(e.array() - kmin) - std::log(z);
  s.eigenvectors = es.eigenvectors();
  s.log_partition = -kmin + std::log(z);
  s.w = s.eigenvectors * s.probabilities.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
  return s;
}

namespace {

Matrix exponent(const CellObservables& obs, const RealVector& theta) {
  Matrix k = Matrix::Zero(obs.basis().dim(), obs.basis().dim());
  for (int i = 0; i < obs.count(); ++i) k += theta(i) * obs.statistics()[i];
  return k;
}

GibbsState state_from_natural(const CellObservables& obs, const RealVector& theta) {
  GibbsState s = gibbs_state_from_exponent(exponent(obs, theta));
  s.fields = obs.fields_from_natural(theta);
  return s;
}

}  // namespace

GibbsState gibbs_state(const CellObservables& obs, const LagrangeFields& fields) {
  fields.validate();
  GibbsState s = state_from_natural(obs, obs.natural(fields));
  s.fields = fields;
  return s;
}

double expectation(const GibbsState& s, const Matrix& a) {
  if (a.rows() != s.w.rows()) throw PreconditionError("expectation: dimension mismatch");
  return (a.cwiseProduct(s.w.transpose())).sum().real();
}

RealVector statistic_expectations(const GibbsState& s, const CellObservables& obs) {
  RealVector m(obs.count());
  for (int i = 0; i < obs.count(); ++i) m(i) = expectation(s, obs.statistics()[i]);
  return m;
}

ConstraintSet expectations(const GibbsState& s, const CellObservables& obs) {
  ConstraintSet out;
  for (int c = 0; c < obs.cells(); ++c) {
    const Velocity v = c < s.fields.size() ? s.fields.cells[c].v : Velocity{0, 0, 0};
    CellTargets t;
    t.energy = expectation(s, obs.rest_energy(c, v));
    t.mass = expectation(s, obs.mass(c));
    for (int a = 0; a < obs.axes(); ++a) t.momentum[a] = expectation(s, obs.rest_momentum(c, a, v));
    out.cells.push_back(t);
  }
  return out;
}

double entropy(const Matrix& w) {
  if (hermiticity_defect(w) > 1e-10) throw PreconditionError("entropy: state is not hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.adjoint()), Eigen::EigenvaluesOnly);
  const RealVector& p = es.eigenvalues();
  if (p.minCoeff() < -1e-10) throw PreconditionError("entropy: state has a negative eigenvalue");
  if (std::abs(p.sum() - 1.0) > 1e-10) throw PreconditionError("entropy: state does not have unit trace");
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i)
    if (p(i) > 0) s -= p(i) * std::log(p(i));
  return s;
}

double entropy(const GibbsState& s) {
  double out = 0.0;
  for (int i = 0; i < s.dim(); ++i)
    if (s.probabilities(i) > 0) out -= s.probabilities(i) * s.log_probabilities(i);
  return out;
}

namespace {

// (p_i - p_j)/(ln p_i - ln p_j), evaluated without cancellation.
RealMatrix kubo_mori_kernel(const GibbsState& s) {
  const int d = s.dim();
  RealMatrix kappa(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double x = s.log_probabilities(i) - s.log_probabilities(j);
      if (std::abs(x) < 1e-12) kappa(i, j) = 0.5 * (s.probabilities(i) + s.probabilities(j));
      else if (x > 0) kappa(i, j) = s.probabilities(i) * (-std::expm1(-x)) / x;
      else kappa(i, j) = s.probabilities(j) * std::expm1(x) / x;
    }
  }
  return kappa;
}

std::vector<Matrix> to_eigenbasis(const GibbsState& s, const std::vector<Matrix>& ops) {
  std::vector<Matrix> out;
  out.reserve(ops.size());
  for (const Matrix& a : ops) out.push_back(s.eigenvectors.adjoint() * a * s.eigenvectors);
  return out;
}

double chi_entry(const Matrix& a, const Matrix& b, const RealMatrix& kappa, const RealVector& p) {
  // sum_ij a_ij b_ji kappa_ij - (sum_i p_i a_ii)(sum_i p_i b_ii)
  const Complex corr = (a.cwiseProduct(b.transpose()).cwiseProduct(kappa.cast<Complex>())).sum();
  const Complex ea = (a.diagonal().cwiseProduct(p.cast<Complex>())).sum();
  const Complex eb = (b.diagonal().cwiseProduct(p.cast<Complex>())).sum();
  return (corr - ea * eb).real();
}

}  // namespace

double kubo_mori_susceptibility(const GibbsState& s, const Matrix& a, const Matrix& b) {
  return susceptibility_matrix(s, {a}, {b})(0, 0);
}

RealMatrix susceptibility_matrix(const GibbsState& s, const std::vector<Matrix>& ops) {
  const RealMatrix kappa = kubo_mori_kernel(s);
  const std::vector<Matrix> e = to_eigenbasis(s, ops);
  const int n = static_cast<int>(ops.size());
  RealMatrix chi(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) chi(i, j) = chi(j, i) = chi_entry(e[i], e[j], kappa, s.probabilities);
  return chi;
}

RealMatrix susceptibility_matrix(const GibbsState& s, const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  const RealMatrix kappa = kubo_mori_kernel(s);
  const std::vector<Matrix> ea = to_eigenbasis(s, a), eb = to_eigenbasis(s, b);
  RealMatrix chi(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) chi(i, j) = chi_entry(ea[i], eb[j], kappa, s.probabilities);
  return chi;
}

namespace {

struct DualProblem {
  const std::vector<Matrix>* ops;
  std::vector<int> positive;  // parameters that must stay > 0
  std::function<RealVector(const RealVector& theta)> targets;
  std::function<RealMatrix(const RealVector& theta)> target_jacobian;  // empty when targets are fixed
  std::function<double(const RealVector& theta, const GibbsState& s)> residual;
};

GibbsState exponent_state(const std::vector<Matrix>& ops, const RealVector& theta) {
  Matrix k = Matrix::Zero(ops[0].rows(), ops[0].cols());
  for (std::size_t i = 0; i < ops.size(); ++i) k += theta(i) * ops[i];
  return gibbs_state_from_exponent(k);
}

RealVector op_expectations(const GibbsState& s, const std::vector<Matrix>& ops) {
  RealVector m(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) m(i) = expectation(s, ops[i]);
  return m;
}

struct DualSolution {
  RealVector theta;
  GibbsState state;
  std::vector<FitIteration> trace;
  double residual;
};

DualSolution solve_dual(const DualProblem& p, RealVector theta, const FitOptions& opts) {
  const std::vector<Matrix>& ops = *p.ops;
  auto admissible = [&](const RealVector& th) {
    for (int i : p.positive)
      if (!(th(i) > 0)) return false;
    return th.allFinite();
  };
  if (!admissible(theta)) throw PreconditionError("maxent_fit: initial fields are not admissible (beta <= 0)");

  DualSolution out;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    GibbsState s = exponent_state(ops, theta);
    const double res = p.residual(theta, s);
    const RealVector t = p.targets(theta);
    const RealVector m = op_expectations(s, ops);
    const RealVector r = m - t;
    const double dual = s.log_partition + theta.dot(t);
    if (res <= opts.tolerance) {
      out.trace.push_back({it, res, 0.0, dual});
      out.theta = theta;
      out.state = std::move(s);
      out.residual = res;
      return out;
    }
    if (it == opts.max_iterations) break;

    const RealMatrix chi = susceptibility_matrix(s, ops);
    RealVector delta;
    if (p.target_jacobian) {
      Eigen::FullPivLU<RealMatrix> lu(chi + p.target_jacobian(theta));
      if (!lu.isInvertible()) throw NumericalError("maxent_fit: constraint Jacobian is singular");
      delta = lu.solve(r);
    } else {
      Eigen::LDLT<RealMatrix> ldlt(chi);
      delta = ldlt.solve(r);
      if (ldlt.info() != Eigen::Success)
        throw NumericalError("maxent_fit: susceptibility matrix is singular (degenerate constraints)");
    }
    if (!delta.allFinite()) throw NumericalError("maxent_fit: non-finite Newton step");
    if (delta.norm() > 1e8 * (1.0 + theta.norm()))
      throw NumericalError("maxent_fit: unbounded dual step, targets are infeasible");

    double alpha = 1.0;
    bool accepted = false;
    const double merit = r.squaredNorm();
    for (int half = 0; half < 60; ++half, alpha *= 0.5) {
      const RealVector trial = theta + alpha * delta;
      if (!admissible(trial)) continue;
      GibbsState ts = exponent_state(ops, trial);
      const double tmerit = (op_expectations(ts, ops) - p.targets(trial)).squaredNorm();
      if (tmerit <= (1.0 - 1e-4 * alpha) * merit) {
        theta = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NumericalError("maxent_fit: line search failed at residual " + std::to_string(res));
    out.trace.push_back({it, res, alpha, dual});
    if (theta.norm() > 1e12) throw NumericalError("maxent_fit: dual iterates diverge, targets are infeasible");
  }
  const GibbsState s = exponent_state(ops, theta);
  throw NumericalError("maxent_fit: no convergence after " + std::to_string(opts.max_iterations) +
                       " iterations, final scaled residual " + std::to_string(p.residual(theta, s)));
}

std::vector<int> beta_indices(const CellObservables& obs) {
  std::vector<int> idx;
  for (int c = 0; c < obs.cells(); ++c) idx.push_back(c * obs.per_cell());
  return idx;
}

double scaled(double value, double target, double norm) {
  return std::abs(value - target) / std::max({std::abs(target), 1e-2 * norm, 1e-300});
}

}  // namespace

double constraint_residual(const CellObservables& obs, const GibbsState& s, const ConstraintSet& targets) {
  const ConstraintSet got = expectations(s, obs);
  double worst = 0.0;
  for (int c = 0; c < obs.cells(); ++c) {
    const int o = c * obs.per_cell();
    worst = std::max(worst, scaled(got.cells[c].energy, targets.cells[c].energy, obs.operator_norm(o)));
    worst = std::max(worst, scaled(got.cells[c].mass, targets.cells[c].mass,
                                   kMass * obs.operator_norm(o + obs.axes() + 1)));
    for (int a = 0; a < obs.axes(); ++a)
      worst = std::max(worst, scaled(got.cells[c].momentum[a], targets.cells[c].momentum[a],
                                     obs.operator_norm(o + 1 + a)));
  }
  return worst;
}

void check_feasible(const CellObservables& obs, const ConstraintSet& targets) {
  if (targets.size() != obs.cells()) throw PreconditionError("maxent_fit: target count does not match the cells");
  for (int c = 0; c < obs.cells(); ++c) {
    const CellTargets& t = targets.cells[c];
    if (!std::isfinite(t.energy) || !std::isfinite(t.mass))
      throw PreconditionError("maxent_fit: non-finite target in cell " + std::to_string(c));
    const RealVector n = spectrum(obs.mass(c));
    if (!(t.mass > n.minCoeff() && t.mass < n.maxCoeff()))
      throw PreconditionError("maxent_fit: infeasible mass target in cell " + std::to_string(c));
    const RealVector e = spectrum(obs.kinetic(c));
    if (!(t.energy > e.minCoeff() && t.energy < e.maxCoeff()))
      throw PreconditionError("maxent_fit: infeasible energy target in cell " + std::to_string(c));
  }
}

FitResult fit_statistics(const CellObservables& obs, const RealVector& targets, const LagrangeFields& init,
                         const FitOptions& opts) {
  if (targets.size() != obs.count()) throw PreconditionError("fit_statistics: target size mismatch");
  DualProblem p;
  p.ops = &obs.statistics();
  p.positive = beta_indices(obs);
  p.targets = [&](const RealVector&) { return targets; };
  p.residual = [&](const RealVector&, const GibbsState& s) {
    double worst = 0.0;
    for (int i = 0; i < obs.count(); ++i)
      worst = std::max(worst, scaled(expectation(s, obs.statistics()[i]), targets(i), obs.operator_norm(i)));
    return worst;
  };
  DualSolution sol = solve_dual(p, obs.natural(init), opts);
  FitResult r;
  r.fields = obs.fields_from_natural(sol.theta);
  r.state = std::move(sol.state);
  r.state.fields = r.fields;
  r.trace = std::move(sol.trace);
  r.iterations = static_cast<int>(r.trace.size()) - 1;
  r.max_scaled_residual = sol.residual;
  return r;
}

FitResult maxent_fit(const CellObservables& obs, const ConstraintSet& targets, const LagrangeFields& init,
                     const FitOptions& opts) {
  check_feasible(obs, targets);
  DualProblem p;
  p.ops = &obs.statistics();
  p.positive = beta_indices(obs);
  p.targets = [&](const RealVector& th) { return obs.lab_targets(targets, obs.fields_from_natural(th)); };
  p.target_jacobian = [&](const RealVector& th) {
    const LagrangeFields f = obs.fields_from_natural(th);
    const int per = obs.per_cell(), axes = obs.axes();
    RealMatrix j = RealMatrix::Zero(obs.count(), obs.count());
    for (int c = 0; c < obs.cells(); ++c) {
      const CellTargets& ct = targets.cells[c];
      const CellFields& cf = f.cells[c];
      const int o = c * per;
      for (int a = 0; a < axes; ++a) {
        // d v_a / d theta_T = -v_a / beta, d v_a / d theta_P_a = -1 / beta
        const double de_dv = ct.momentum[a] + cf.v[a] * ct.mass;
        j(o, o) += de_dv * (-cf.v[a] / cf.beta);
        j(o, o + 1 + a) += de_dv * (-1.0 / cf.beta);
        j(o + 1 + a, o) += ct.mass * (-cf.v[a] / cf.beta);
        j(o + 1 + a, o + 1 + a) += ct.mass * (-1.0 / cf.beta);
      }
    }
    return j;
  };
  p.residual = [&](const RealVector& th, const GibbsState& s) {
    GibbsState tagged = s;
    tagged.fields = obs.fields_from_natural(th);
    return constraint_residual(obs, tagged, targets);
  };
  DualSolution sol = solve_dual(p, obs.natural(init), opts);
  FitResult r;
  r.fields = obs.fields_from_natural(sol.theta);
  r.state = std::move(sol.state);
  r.state.fields = r.fields;
  r.trace = std::move(sol.trace);
  r.iterations = static_cast<int>(r.trace.size()) - 1;
  r.max_scaled_residual = sol.residual;
  return r;
}

LagrangeFields initial_fields(const CellObservables& obs, const ConstraintSet& targets) {
  if (targets.size() != obs.cells()) throw PreconditionError("initial_fields: target count does not match the cells");
  const int d = obs.basis().dim();
  std::vector<Matrix> ops{Matrix::Zero(d, d), Matrix::Zero(d, d)};
  double energy = 0.0, mass = 0.0;
  for (int c = 0; c < obs.cells(); ++c) {
    ops[0] += obs.kinetic(c);
    ops[1] += obs.number(c);
    energy += targets.cells[c].energy;
    mass += targets.cells[c].mass;
  }
  const RealVector t = (RealVector(2) << energy, mass / kMass).finished();
  const double per_particle = energy / std::max(mass / kMass, 1e-12);
  DualProblem p;
  p.ops = &ops;
  p.positive = {0};
  p.targets = [&](const RealVector&) { return t; };
  p.residual = [&](const RealVector&, const GibbsState& s) {
    return std::max(scaled(expectation(s, ops[0]), t(0), 0.0), scaled(expectation(s, ops[1]), t(1), 0.0));
  };
  RealVector theta(2);
  theta << 1.0 / std::max(per_particle, 1e-12), 0.0;
  FitOptions o;
  o.tolerance = 1e-10;
  const DualSolution sol = solve_dual(p, theta, o);
  const double beta = sol.theta(0);
  return LagrangeFields::uniform(obs.cells(), beta, -sol.theta(1) / (beta * kMass));
}

MaximalityReport maximality_check(const CellObservables& obs, const GibbsState& s, int perturbations,
                                  std::uint64_t seed) {
  const int d = s.dim();
  std::vector<Matrix> span{Matrix::Identity(d, d)};
  for (const Matrix& b : obs.statistics()) span.push_back(b);
  const int n = static_cast<int>(span.size());
  RealMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = (span[i].adjoint() * span[j]).trace().real();
  const Eigen::CompleteOrthogonalDecomposition<RealMatrix> gram(g);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double base = entropy(s.w);
  const double pmin = s.probabilities.minCoeff();

  MaximalityReport rep;
  rep.entropy_fit = base;
  rep.max_entropy_perturbed = -std::numeric_limits<double>::infinity();
  rep.perturbations = perturbations;
  bool ok = true;
  for (int k = 0; k < perturbations; ++k) {
    Matrix x(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = Complex(normal(rng), normal(rng));
    x = 0.5 * (x + x.adjoint()).eval();
    RealVector b(n);
    for (int i = 0; i < n; ++i) b(i) = (span[i].adjoint() * x).trace().real();
    const RealVector c = gram.solve(b);
    for (int i = 0; i < n; ++i) x -= c(i) * span[i];
    const double opnorm = spectral_radius(x);
    if (!(opnorm > 0)) continue;
    const double eps = 0.5 * pmin / opnorm;
    const Matrix w2 = s.w + eps * x;
    const double s2 = entropy(w2);
    rep.max_entropy_perturbed = std::max(rep.max_entropy_perturbed, s2);
    for (int i = 1; i < n; ++i) {
      const double shift = std::abs((span[i] * (w2 - s.w)).trace().real()) /
                           std::max(1.0, std::abs((span[i] * s.w).trace().real()));
      rep.max_constraint_shift = std::max(rep.max_constraint_shift, shift);
    }
    if (s2 > base + 1e-9) ok = false;
  }
  rep.pass = ok && rep.max_constraint_shift <= 1e-8;
  return rep;
}

}  // namespace qkin
