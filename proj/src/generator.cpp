#include "qkin/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qkin {

double smearing_kernel(double energy, double delta) {
  if (!(delta > 0)) throw PreconditionError("smearing_kernel: width must be positive");
  if (std::abs(energy) > 4.0 * delta) return 0.0;
  return std::exp(-energy * energy / (2.0 * delta * delta)) / (delta * std::sqrt(2.0 * kPi));
}

double default_smearing_width(const PairBasis& pb) {
  std::vector<double> e(pb.energies.data(), pb.energies.data() + pb.energies.size());
  std::sort(e.begin(), e.end());
  std::vector<double> distinct;
  for (double x : e)
    if (distinct.empty() || x - distinct.back() > 1e-9 * std::max(1.0, std::abs(x))) distinct.push_back(x);
  if (distinct.size() < 2) return 1.0;
  return (distinct.back() - distinct.front()) / double(distinct.size() - 1);
}

GeneratorCoefficients build_coefficients(const std::vector<Mode>& modes, const TwoBodyTMatrix& t, double delta) {
  if (!(delta > 0)) throw PreconditionError("build_coefficients: smearing width must be positive");
  const int F = static_cast<int>(modes.size());
  const PairBasis& pb = t.basis;
  const int n = pb.size();
  if (t.on_shell.rows() != n || t.on_shell.cols() != n)
    throw PreconditionError("build_coefficients: on-shell T is missing or has the wrong shape");

  GeneratorCoefficients c;
  c.statistics = pb.statistics;
  c.modes = modes;
  c.basis = pb;
  c.delta = delta;
  c.veff_pair = Matrix::Zero(n, n);
  c.r_pair = Matrix::Zero(n, n);
  const Matrix sym = 0.5 * (t.on_shell + t.on_shell.transpose());
  for (int o = 0; o < n; ++o) {
    for (int i = 0; i < n; ++i) {
      const double de = pb.energies(o) - pb.energies(i);
      if (std::abs(de) > 4.0 * delta) continue;
      c.veff_pair(o, i) = sym(o, i).real() * std::exp(-de * de / (2.0 * delta * delta));
      c.r_pair(o, i) = std::sqrt(2.0 * kPi / kHbar * smearing_kernel(de, delta)) * t.on_shell(o, i);
    }
  }
  c.veff_pair = 0.5 * (c.veff_pair + c.veff_pair.adjoint()).eval();
  c.veff = pair_matrix_to_tensor(pb, c.veff_pair, F);
  c.r = pair_matrix_to_tensor(pb, c.r_pair, F);
  c.tau0 = collision_time_estimate(t);
  return c;
}

GeneratorCoefficients free_coefficients(const std::vector<Mode>& modes, Statistics stats) {
  GeneratorCoefficients c;
  c.statistics = stats;
  c.modes = modes;
  c.basis = make_pair_basis(modes, stats);
  c.delta = default_smearing_width(c.basis);
  c.veff_pair = Matrix::Zero(c.basis.size(), c.basis.size());
  c.r_pair = c.veff_pair;
  c.veff = CTensor4(static_cast<int>(modes.size()));
  c.r = c.veff;
  return c;
}

Generator::Generator(const FockBasis& basis, GeneratorCoefficients coeffs, CoefficientStrategy strategy)
    : basis_(&basis), coeffs_(std::move(coeffs)) {
  const int F = coeffs_.mode_count();
  if (basis.mode_count() != F) throw PreconditionError("Generator: basis and coefficients disagree on F");
  if (basis.statistics() != coeffs_.statistics)
    throw PreconditionError("Generator: basis and coefficients disagree on statistics");
  const int d = basis.dim();

  Matrix w = Matrix::Zero(F, F);
  for (int f = 0; f < F; ++f) w(f, f) = coeffs_.modes[f].energy;
  heff_ = one_body_operator(basis, w) + two_body_operator(basis, coeffs_.veff, 1e-10);

  std::vector<Matrix> lower(F * F);
  for (int f2 = 0; f2 < F; ++f2)
    for (int f1 = 0; f1 < F; ++f1) lower[f2 * F + f1] = basis.annihilator(f2) * basis.annihilator(f1);

  r_ops_.assign(F * F, Matrix::Zero(d, d));
  for (int k = 0; k < F; ++k) {
    for (int lam = 0; lam < F; ++lam) {
      Matrix& r = r_ops_[k * F + lam];
      for (int f2 = 0; f2 < F; ++f2) {
        for (int f1 = 0; f1 < F; ++f1) {
          const Complex amp = coeffs_.r(k, lam, f2, f1);
          if (amp == Complex(0)) continue;
          if (!strategy) {
            r += amp * lower[f2 * F + f1];
            continue;
          }
          Matrix term = lower[f2 * F + f1];
          for (int j = 0; j < d; ++j) term.col(j) *= strategy(basis.state(j), k, lam, f2, f1);
          r += amp * term;
        }
      }
    }
  }

  gamma_ = Matrix::Zero(d, d);
  for (const Matrix& r : r_ops_) gamma_ += r.adjoint() * r;
  gamma_ *= 0.25;
  gamma_ = (0.5 * (gamma_ + gamma_.adjoint())).eval();

  lprime_.reserve(F * F);
  for (int h = 0; h < F; ++h)
    for (int k = 0; k < F; ++k) {
      Parts p = apply_parts(h, k);
      lprime_.push_back(p.streaming + p.loss + p.gain);
    }
}

const Matrix& Generator::r_operator(int k, int lambda) const {
  const int F = mode_count();
  if (k < 0 || k >= F || lambda < 0 || lambda >= F) throw PreconditionError("r_operator: mode index out of range");
  return r_ops_[k * F + lambda];
}

const Matrix& Generator::apply(int h, int k) const {
  const int F = mode_count();
  if (h < 0 || h >= F || k < 0 || k >= F) throw PreconditionError("apply_Lprime: mode index out of range");
  return lprime_[h * F + k];
}

Generator::Parts Generator::apply_parts(int h, int k) const {
  const int F = mode_count();
  if (h < 0 || h >= F || k < 0 || k >= F) throw PreconditionError("apply_Lprime: mode index out of range");
  const Matrix& ak = basis_->annihilator(k);
  const Matrix ch = basis_->creator(h);
  const Matrix x = ch * ak;
  Parts p;
  p.streaming = Complex(0, 1.0 / kHbar) * (heff_ * x - x * heff_);
  p.loss = -(1.0 / kHbar) * ((gamma_ * ch - ch * gamma_) * ak - ch * (gamma_ * ak - ak * gamma_));
  p.gain = Matrix::Zero(x.rows(), x.cols());
  for (int lam = 0; lam < F; ++lam) p.gain += r_ops_[h * F + lam].adjoint() * r_ops_[k * F + lam];
  p.gain /= kHbar;
  return p;
}

Matrix Generator::apply_one_body(const Matrix& c) const {
  const int F = mode_count();
  if (c.rows() != F || c.cols() != F) throw PreconditionError("apply_one_body: coefficient matrix must be F x F");
  Matrix out = Matrix::Zero(basis_->dim(), basis_->dim());
  for (int h = 0; h < F; ++h)
    for (int k = 0; k < F; ++k)
      if (c(h, k) != Complex(0)) out += c(h, k) * lprime_[h * F + k];
  return out;
}

Generator::Parts Generator::apply_one_body_parts(const Matrix& c) const {
  const int F = mode_count();
  if (c.rows() != F || c.cols() != F) throw PreconditionError("apply_one_body: coefficient matrix must be F x F");
  const int d = basis_->dim();
  Parts out{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
  for (int h = 0; h < F; ++h) {
    for (int k = 0; k < F; ++k) {
      if (c(h, k) == Complex(0)) continue;
      Parts p = apply_parts(h, k);
      out.streaming += c(h, k) * p.streaming;
      out.loss += c(h, k) * p.loss;
      out.gain += c(h, k) * p.gain;
    }
  }
  return out;
}

Matrix effective_hamiltonian(const FockBasis& basis, const GeneratorCoefficients& coeffs) {
  return Generator(basis, coeffs).effective_hamiltonian();
}

Matrix gamma_op(const FockBasis& basis, const GeneratorCoefficients& coeffs) {
  return Generator(basis, coeffs).gamma();
}

Matrix apply_Lprime(const FockBasis& basis, const GeneratorCoefficients& coeffs, int h, int k) {
  return Generator(basis, coeffs).apply(h, k);
}

BilinearFamily::BilinearFamily(const FockBasis& basis) : modes_(basis.mode_count()) {
  if (basis.max_total_particles() < 1) throw PreconditionError("BilinearFamily: needs N_max >= 1");
  const int F = modes_;
  for (int h = 0; h < F; ++h)
    for (int k = 0; k < F; ++k) ops_.push_back(basis.creator(h) * basis.annihilator(k));
  Matrix g(F * F, F * F);
  for (int i = 0; i < F * F; ++i)
    for (int j = 0; j < F * F; ++j) g(i, j) = (ops_[i].adjoint() * ops_[j]).trace();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (!(lo > 1e-12 * es.eigenvalues().maxCoeff()))
    throw NumericalError("BilinearFamily: Gram matrix is singular on this truncation");
  gram_condition_ = es.eigenvalues().maxCoeff() / lo;
  gram_.compute(g);
}

Matrix BilinearFamily::decompose(const Matrix& x, double tol) const {
  const int F = modes_;
  if (x.rows() != ops_[0].rows() || x.cols() != ops_[0].cols())
    throw PreconditionError("BilinearFamily: operator dimension mismatch");
  Vector b(F * F);
  for (int i = 0; i < F * F; ++i) b(i) = (ops_[i].adjoint() * x).trace();
  const Vector c = gram_.solve(b);
  Matrix recon = Matrix::Zero(x.rows(), x.cols());
  for (int i = 0; i < F * F; ++i) recon += c(i) * ops_[i];
  const double residual = (recon - x).norm();
  if (residual > tol * std::max(1.0, x.norm()))
    throw PreconditionError("apply_Lprime_linear: operator is not in the bilinear span (residual " +
                            std::to_string(residual) + ")");
  Matrix out(F, F);
  for (int h = 0; h < F; ++h)
    for (int k = 0; k < F; ++k) out(h, k) = c(h * F + k);
  return out;
}

Matrix apply_Lprime_linear(const Generator& gen, const BilinearFamily& family, const Matrix& x) {
  if (family.mode_count() != gen.mode_count()) throw PreconditionError("apply_Lprime_linear: mode count mismatch");
  return gen.apply_one_body(family.decompose(x));
}

namespace {

struct FamilySampler {
  const Generator& gen;
  int F, d;
  Matrix null_basis;  // orthonormal basis of the kernel of psi -> sum_k a_k psi_k
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};

  FamilySampler(const Generator& g, std::uint64_t seed)
      : gen(g), F(g.mode_count()), d(g.basis().dim()), rng(seed) {
    Matrix stacked(d, d * F);
    for (int k = 0; k < F; ++k) stacked.block(0, k * d, d, d) = g.basis().annihilator(k);
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = 1e-12 * std::max(1.0, s.size() ? s(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > cut) ++rank;
    null_basis = svd.matrixV().rightCols(d * F - rank);
  }

  Vector draw(bool project) {
    Vector psi(d * F);
    if (project && null_basis.cols() > 0) {
      Vector c(null_basis.cols());
      for (int i = 0; i < c.size(); ++i) c(i) = Complex(normal(rng), normal(rng));
      psi = null_basis * c;
    } else {
      for (int i = 0; i < psi.size(); ++i) psi(i) = Complex(normal(rng), normal(rng));
    }
    return psi / psi.norm();
  }

  // Q = A + tau B for the family psi.
  std::pair<Complex, Complex> form(const Vector& psi) const {
    Vector phi = Vector::Zero(d);
    for (int k = 0; k < F; ++k) phi += gen.basis().annihilator(k) * psi.segment(k * d, d);
    Complex b = 0.0;
    for (int h = 0; h < F; ++h)
      for (int k = 0; k < F; ++k)
        b += psi.segment(h * d, d).dot(gen.apply(h, k) * psi.segment(k * d, d));
    return {phi.squaredNorm(), b};
  }
};

}  // namespace

PositivityReport positivity_check(const Generator& gen, int n_samples, double tau_max, std::uint64_t seed) {
  if (!(tau_max > 0)) throw PreconditionError("positivity_check: tau_max must be positive");
  if (n_samples < 1) throw PreconditionError("positivity_check: need at least one sample");
  FamilySampler sampler(gen, seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PositivityReport rep;
  rep.samples = n_samples;
  rep.tau_max = tau_max;
  rep.min_re_q = std::numeric_limits<double>::infinity();
  rep.min_re_q_negative_tau = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    const bool project = s % 2 == 1;
    const Vector psi = sampler.draw(project);
    const double tau = tau_max * (1.0 - unit(sampler.rng));  // (0, tau_max]
    const auto [a, b] = sampler.form(psi);
    const Complex q = a + tau * b;
    rep.min_re_q = std::min(rep.min_re_q, q.real());
    rep.max_abs_im_q = std::max(rep.max_abs_im_q, std::abs(q.imag()));
  }
  for (int s = 0; s < n_samples; ++s) {
    const bool project = s % 2 == 1;
    const Vector psi = sampler.draw(project);
    const double tau = -tau_max * (1.0 - unit(sampler.rng));
    const auto [a, b] = sampler.form(psi);
    const Complex q = a + tau * b;
    ++rep.negative_tau_samples;
    if (q.real() < rep.min_re_q_negative_tau) {
      rep.min_re_q_negative_tau = q.real();
      if (q.real() < -1e-10) rep.negative_tau_witness = PositivityWitness{tau, q, project};
    }
  }
  rep.pass = rep.min_re_q > -1e-10 && rep.max_abs_im_q <= 1e-10;
  return rep;
}

ConservationReport conservation_report(const Generator& gen) {
  const int F = gen.mode_count();
  Matrix m = Matrix::Zero(F, F), w = Matrix::Zero(F, F);
  for (int f = 0; f < F; ++f) {
    m(f, f) = kMass;
    w(f, f) = gen.coefficients().modes[f].energy;
  }
  return {gen.apply_one_body(m).norm(), gen.apply_one_body(w).norm()};
}

std::vector<DeltaSweepRow> energy_residual_sweep(const FockBasis& basis, const std::vector<Mode>& modes,
                                                 const TwoBodyTMatrix& t, const std::vector<double>& deltas) {
  std::vector<DeltaSweepRow> rows;
  for (double delta : deltas) {
    Generator gen(basis, build_coefficients(modes, t, delta));
    const ConservationReport c = conservation_report(gen);
    rows.push_back({delta, c.energy_residual, c.mass_residual});
  }
  return rows;
}

GainLossTraces two_particle_gain_loss(const Generator& gen) {
  const std::vector<int> idx = gen.basis().sector_indices(2);
  GainLossTraces out;
  for (int h = 0; h < gen.mode_count(); ++h) {
    const Generator::Parts p = gen.apply_parts(h, h);
    for (int i : idx) {
      out.gain += p.gain(i, i).real();
      out.loss += p.loss(i, i).real();
    }
  }
  return out;
}

}  // namespace qkin
