#include "qkin/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qkin {

Matrix SpectralDecomposition::reconstruct() const {
  return vectors * energies.cast<Complex>().asDiagonal() * vectors.adjoint();
}

SpectralDecomposition spectral_decomposition(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) throw PreconditionError("spectral_decomposition: matrix is not square");
  if (h.size() == 0) throw PreconditionError("spectral_decomposition: empty matrix");
  const double defect = hermiticity_defect(h);
  if (defect > tol * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw PreconditionError("spectral_decomposition: operator is not hermitian (defect " +
                            std::to_string(defect) + ")");
  const Matrix hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_decomposition: eigensolver failed");
  SpectralDecomposition sd{es.eigenvalues(), es.eigenvectors()};
  const double residual = (sd.reconstruct() - hs).norm();
  if (residual > 1e-10 * std::max(1.0, hs.norm()))
    throw NumericalError("spectral_decomposition: reconstruction residual " + std::to_string(residual));
  return sd;
}

Matrix heisenberg_evolve(const SpectralDecomposition& h, const Matrix& x, double t) {
  Matrix y = h.to_eigenbasis(x);
  for (int a = 0; a < h.dim(); ++a)
    for (int b = 0; b < h.dim(); ++b)
      y(a, b) *= std::exp(Complex(0, (h.energies(a) - h.energies(b)) * t / kHbar));
  return h.from_eigenbasis(y);
}

Matrix heisenberg_evolve(const Matrix& h, const Matrix& x, double t) {
  return heisenberg_evolve(spectral_decomposition(h), x, t);
}

Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

Matrix unvec(const Vector& v, int dim) {
  if (v.size() != Eigen::Index(dim) * dim) throw PreconditionError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix apply_superoperator(const Matrix& s, const Matrix& x) {
  if (s.cols() != x.size()) throw PreconditionError("apply_superoperator: dimension mismatch");
  return unvec(s * vec(x), static_cast<int>(x.rows()));
}

Matrix identity_superoperator(int dim) { return Matrix::Identity(Eigen::Index(dim) * dim, Eigen::Index(dim) * dim); }

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Matrix liouvillian(const Matrix& h) {
  const Matrix id = Matrix::Identity(h.rows(), h.cols());
  // vec(HX) = (I kron H) vec X, vec(XH) = (H^T kron I) vec X.
  return Complex(0, 1.0 / kHbar) * (kron(id, h) - kron(h.transpose(), id));
}

Matrix resolvent_apply(const SpectralDecomposition& h, Complex z, const Matrix& x) {
  Matrix y = h.to_eigenbasis(x);
  for (int a = 0; a < h.dim(); ++a) {
    for (int b = 0; b < h.dim(); ++b) {
      const Complex denom = z - Complex(0, (h.energies(a) - h.energies(b)) / kHbar);
      if (std::abs(denom) < 1e-12)
        throw NumericalError("resolvent_apply: singular query, z lies on the spectrum of H'");
      y(a, b) /= denom;
    }
  }
  return h.from_eigenbasis(y);
}

Matrix resolvent_apply(const Matrix& h, Complex z, const Matrix& x) {
  return resolvent_apply(spectral_decomposition(h), z, x);
}

Matrix scattering_map_apply(const Matrix& h0, const Matrix& v, Complex z, const Matrix& x) {
  const Complex i_hbar(0, 1.0 / kHbar);
  const Matrix vx = i_hbar * commutator(v, x);
  const Matrix r = resolvent_apply(spectral_decomposition(h0 + v), z, vx);
  return vx + i_hbar * commutator(v, r);
}

int PairBasis::index_of(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (int i = 0; i < size(); ++i)
    if (pairs[i].first == a && pairs[i].second == b) return i;
  return -1;
}

namespace {

std::pair<int, int> pair_of(const Occupation& occ) {
  int first = -1, second = -1;
  for (int f = 0; f < static_cast<int>(occ.size()); ++f) {
    for (int c = 0; c < occ[f]; ++c) {
      if (first < 0) first = f;
      else second = f;
    }
  }
  return {first, second};
}

}  // namespace

PairBasis make_pair_basis(const std::vector<Mode>& modes, Statistics stats) {
  const int F = static_cast<int>(modes.size());
  if (stats == Statistics::Fermi && F < 2) throw PreconditionError("make_pair_basis: fermions need F >= 2");
  FockBasis basis(F, 2, stats);
  PairBasis pb;
  pb.statistics = stats;
  for (int i : basis.sector_indices(2)) pb.pairs.push_back(pair_of(basis.state(i)));
  pb.energies.resize(pb.size());
  for (int i = 0; i < pb.size(); ++i)
    pb.energies(i) = modes[pb.pairs[i].first].energy + modes[pb.pairs[i].second].energy;
  return pb;
}

Matrix pair_matrix(const std::vector<Mode>& modes, const CTensor4& v, Statistics stats) {
  const int F = static_cast<int>(modes.size());
  FockBasis basis(F, 2, stats);
  const Matrix full = two_body_operator(basis, v, -1.0);
  const std::vector<int> idx = basis.sector_indices(2);
  Matrix m(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) m(i, j) = full(idx[i], idx[j]);
  return m;
}

CTensor4 pair_matrix_to_tensor(const PairBasis& pb, const Matrix& m, int mode_count) {
  if (m.rows() != pb.size() || m.cols() != pb.size())
    throw PreconditionError("pair_matrix_to_tensor: matrix does not match the pair basis");
  CTensor4 t(mode_count);
  const bool bose = pb.statistics == Statistics::Bose;
  for (int o = 0; o < pb.size(); ++o) {
    const auto [l1, l2] = pb.pairs[o];
    for (int i = 0; i < pb.size(); ++i) {
      const auto [f1, f2] = pb.pairs[i];
      const Complex x = m(o, i);
      if (bose) {
        const double s = (l1 == l2 ? 1.0 : 2.0) * (f1 == f2 ? 1.0 : 2.0);
        const Complex c = x / std::sqrt(s);
        t(l1, l2, f2, f1) = c;
        t(l2, l1, f2, f1) = c;
        t(l1, l2, f1, f2) = c;
        t(l2, l1, f1, f2) = c;
      } else {
        const Complex c = 0.5 * x;
        t(l1, l2, f2, f1) = c;
        t(l2, l1, f2, f1) = -c;
        t(l1, l2, f1, f2) = -c;
        t(l2, l1, f1, f2) = c;
      }
    }
  }
  return t;
}

namespace {

struct Solve {
  Matrix t;
  double condition;
};

Solve solve_lippmann_schwinger(const Matrix& v, const RealVector& energies, Complex z, double cap) {
  const int n = static_cast<int>(energies.size());
  Matrix a = Matrix::Identity(n, n);
  for (int j = 0; j < n; ++j) a.col(j) -= v.col(j) / (z - energies(j));
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rc = lu.rcond();
  const double cond = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(cond <= cap))
    throw NumericalError("two_body_tmatrix: (I - V G0) is ill-conditioned (condition " + std::to_string(cond) +
                         ")");
  return {lu.solve(v), cond};
}

}  // namespace

TwoBodyTMatrix two_body_tmatrix(const std::vector<Mode>& modes, const CTensor4& v, Statistics stats, Complex z,
                                const TMatrixOptions& opts) {
  if (!(z.imag() > 0)) throw PreconditionError("two_body_tmatrix: Im z must be positive");
  if (!(opts.epsilon > 0)) throw PreconditionError("two_body_tmatrix: epsilon must be positive");
  TwoBodyTMatrix out;
  out.basis = make_pair_basis(modes, stats);
  out.z = z;
  out.epsilon = opts.epsilon;
  out.v_pair = pair_matrix(modes, v, stats);
  const RealVector& e = out.basis.energies;
  const int n = out.basis.size();

  Solve s = solve_lippmann_schwinger(out.v_pair, e, z, opts.condition_cap);
  out.t = s.t;
  out.condition = s.condition;

  auto on_shell_at = [&](double eps) {
    Matrix m(n, n);
    std::map<double, Matrix> cache;  // degenerate columns share one solve
    for (int j = 0; j < n; ++j) {
      auto it = cache.find(e(j));
      if (it == cache.end()) {
        Solve sj = solve_lippmann_schwinger(out.v_pair, e, Complex(e(j), eps), opts.condition_cap);
        out.condition = std::max(out.condition, sj.condition);
        it = cache.emplace(e(j), std::move(sj.t)).first;
      }
      m.col(j) = it->second.col(j);
    }
    return m;
  };
  out.on_shell = on_shell_at(opts.epsilon);
  if (opts.extrapolate) out.on_shell_extrapolated = 2.0 * on_shell_at(0.5 * opts.epsilon) - out.on_shell;
  return out;
}

std::optional<double> collision_time_estimate(const TwoBodyTMatrix& t) {
  const double m = t.on_shell.size() ? t.on_shell.cwiseAbs().maxCoeff() : 0.0;
  if (m <= 1e-300) return std::nullopt;
  return kHbar / m;
}

CoarseWindow CoarseWindow::make(double tau0, double energy_gap, int count) {
  if (!(tau0 > 0)) throw PreconditionError("CoarseWindow: tau0 must be positive");
  if (count < 1) throw PreconditionError("CoarseWindow: need at least one sample");
  CoarseWindow w;
  w.tau0 = tau0;
  w.t_max = std::abs(energy_gap) > 0 ? kHbar / std::abs(energy_gap) : std::numeric_limits<double>::infinity();
  const double lo = w.lower();
  const double hi = std::isfinite(w.t_max) ? w.upper() : 50.0 * tau0;
  if (!(lo < hi))
    throw NumericalError("CoarseWindow: empty window (5 tau0 = " + std::to_string(lo) +
                         ", t_max/5 = " + std::to_string(hi) + ")");
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.5 : double(i) / (count - 1);
    w.samples.push_back(lo * std::pow(hi / lo, f));
  }
  return w;
}

double CoarseWindow::mid() const {
  const double hi = std::isfinite(t_max) ? upper() : 50.0 * tau0;
  return std::sqrt(lower() * hi);
}

CoarseReport coarse_grained_check(const Matrix& h0, const Matrix& v, const Matrix& x, const Matrix& lprime_x,
                                  int h, int k, const CoarseWindow& window) {
  const SpectralDecomposition sd = spectral_decomposition(h0 + v);
  const double lnorm = lprime_x.norm();
  if (!(lnorm > 0)) throw NumericalError("coarse_grained_check: L'X vanishes, relative discrepancy undefined");
  CoarseReport rep{h, k, window, {}};
  for (double t : window.samples) {
    const Matrix ux = heisenberg_evolve(sd, x, t);
    rep.samples.push_back({t, (ux - x - t * lprime_x).norm() / (t * lnorm)});
  }
  return rep;
}

}  // namespace qkin
