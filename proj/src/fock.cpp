#include "qkin/fock.hpp"

#include <cmath>
#include <numeric>

namespace qkin {

const char* to_string(Statistics s) { return s == Statistics::Bose ? "bose" : "fermi"; }

Statistics statistics_from_string(const std::string& s) {
  if (s == "bose" || s == "Bose") return Statistics::Bose;
  if (s == "fermi" || s == "Fermi") return Statistics::Fermi;
  throw PreconditionError("unknown statistics '" + s + "' (expected bose|fermi)");
}

namespace {

// Occupations of `modes` modes holding exactly `n` particles, first mode
// filled first.
void enumerate_sector(int modes, int n, int per_mode_cap, Occupation& current, int pos,
                      std::vector<Occupation>& out) {
  if (pos == modes - 1) {
    if (n <= per_mode_cap) {
      current[pos] = n;
      out.push_back(current);
    }
    return;
  }
  for (int k = std::min(n, per_mode_cap); k >= 0; --k) {
    current[pos] = k;
    enumerate_sector(modes, n - k, per_mode_cap, current, pos + 1, out);
  }
  current[pos] = 0;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

long long basis_dimension(int mode_count, int max_total_particles, Statistics stats) {
  long long d = 0;
  for (int n = 0; n <= max_total_particles; ++n) {
    d += stats == Statistics::Bose ? binomial(n + mode_count - 1, n) : binomial(mode_count, n);
  }
  return d;
}

FockBasis::FockBasis(int mode_count, int max_total_particles, Statistics stats, int dimension_cap)
    : modes_(mode_count), n_max_(max_total_particles), stats_(stats) {
  if (mode_count < 1) throw PreconditionError("FockBasis: mode count must be >= 1");
  if (max_total_particles < 0) throw PreconditionError("FockBasis: N_max must be >= 0");
  if (stats == Statistics::Fermi && max_total_particles > mode_count)
    throw PreconditionError("FockBasis: fermionic N_max cannot exceed the mode count");
  const long long d = basis_dimension(mode_count, max_total_particles, stats);
  if (d > dimension_cap)
    throw PreconditionError("FockBasis: dimension " + std::to_string(d) + " exceeds cap " +
                            std::to_string(dimension_cap));

  const int cap = stats == Statistics::Fermi ? 1 : max_total_particles;
  Occupation current(mode_count, 0);
  for (int n = 0; n <= max_total_particles; ++n) {
    enumerate_sector(mode_count, n, cap, current, 0, states_);
  }
  for (std::size_t i = 0; i < states_.size(); ++i) {
    totals_.push_back(std::accumulate(states_[i].begin(), states_[i].end(), 0));
    index_.emplace(states_[i], static_cast<int>(i));
  }

  annihilators_.reserve(modes_);
  for (int f = 0; f < modes_; ++f) {
    Matrix a = Matrix::Zero(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
      if (auto r = annihilate(states_[j], f)) a(*index_of(r->second), j) = r->first;
    }
    annihilators_.push_back(std::move(a));
  }
}

std::optional<int> FockBasis::index_of(const Occupation& occ) const {
  auto it = index_.find(occ);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void FockBasis::check_mode(int f) const {
  if (f < 0 || f >= modes_)
    throw PreconditionError("mode index " + std::to_string(f) + " out of range [0, " +
                            std::to_string(modes_) + ")");
}

const Matrix& FockBasis::annihilator(int f) const {
  check_mode(f);
  return annihilators_[f];
}

std::optional<std::pair<double, Occupation>> FockBasis::annihilate(const Occupation& occ, int f) const {
  check_mode(f);
  if (occ[f] == 0) return std::nullopt;
  double amp;
  if (stats_ == Statistics::Bose) {
    amp = std::sqrt(double(occ[f]));
  } else {
    // Jordan-Wigner string over modes with smaller index.
    int parity = 0;
    for (int g = 0; g < f; ++g) parity += occ[g];
    amp = (parity % 2) ? -1.0 : 1.0;
  }
  Occupation out = occ;
  out[f] -= 1;
  return std::make_pair(amp, std::move(out));
}

std::optional<std::pair<double, Occupation>> FockBasis::create(const Occupation& occ, int f) const {
  check_mode(f);
  const int total = std::accumulate(occ.begin(), occ.end(), 0);
  if (total + 1 > n_max_) return std::nullopt;
  double amp;
  if (stats_ == Statistics::Bose) {
    amp = std::sqrt(double(occ[f] + 1));
  } else {
    if (occ[f] == 1) return std::nullopt;
    int parity = 0;
    for (int g = 0; g < f; ++g) parity += occ[g];
    amp = (parity % 2) ? -1.0 : 1.0;
  }
  Occupation out = occ;
  out[f] += 1;
  return std::make_pair(amp, std::move(out));
}

Matrix FockBasis::sector_projector(int n) const {
  Matrix p = Matrix::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    if (totals_[i] == n) p(i, i) = 1.0;
  return p;
}

std::vector<int> FockBasis::sector_indices(int n) const {
  std::vector<int> idx;
  for (int i = 0; i < dim(); ++i)
    if (totals_[i] == n) idx.push_back(i);
  return idx;
}

FockBasis build_basis(int mode_count, int max_total_particles, Statistics stats, int dimension_cap) {
  return FockBasis(mode_count, max_total_particles, stats, dimension_cap);
}

Matrix annihilation_op(const FockBasis& basis, int f) { return basis.annihilator(f); }
Matrix creation_op(const FockBasis& basis, int f) { return basis.creator(f); }

Matrix number_op(const FockBasis& basis) {
  Matrix n = Matrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < basis.dim(); ++i) n(i, i) = basis.total_particles(i);
  return n;
}

Matrix identity_op(const FockBasis& basis) { return Matrix::Identity(basis.dim(), basis.dim()); }

Matrix one_body_operator(const FockBasis& basis, const Matrix& h) {
  const int F = basis.mode_count();
  if (h.rows() != F || h.cols() != F)
    throw PreconditionError("one_body_operator: coefficient matrix must be F x F");
  Matrix out = Matrix::Zero(basis.dim(), basis.dim());
  for (int j = 0; j < basis.dim(); ++j) {
    const Occupation& occ = basis.state(j);
    for (int k = 0; k < F; ++k) {
      auto lowered = basis.annihilate(occ, k);
      if (!lowered) continue;
      for (int hh = 0; hh < F; ++hh) {
        if (h(hh, k) == Complex(0)) continue;
        auto raised = basis.create(lowered->second, hh);
        if (!raised) continue;
        out(*basis.index_of(raised->second), j) += h(hh, k) * lowered->first * raised->first;
      }
    }
  }
  return out;
}

double tensor_hermiticity_defect(const CTensor4& v) {
  const int F = v.modes();
  double d = 0.0;
  for (int a = 0; a < F; ++a)
    for (int b = 0; b < F; ++b)
      for (int c = 0; c < F; ++c)
        for (int e = 0; e < F; ++e) d = std::max(d, std::abs(v(a, b, c, e) - std::conj(v(e, c, b, a))));
  return d;
}

Matrix two_body_operator(const FockBasis& basis, const CTensor4& v, double hermiticity_tol) {
  const int F = basis.mode_count();
  if (v.modes() != F) throw PreconditionError("two_body_operator: tensor mode count mismatch");
  if (hermiticity_tol >= 0.0) {
    const double defect = tensor_hermiticity_defect(v);
    if (defect > hermiticity_tol)
      throw PreconditionError("two_body_operator: tensor violates hermiticity by " + std::to_string(defect));
  }
  Matrix out = Matrix::Zero(basis.dim(), basis.dim());
  for (int j = 0; j < basis.dim(); ++j) {
    const Occupation& occ = basis.state(j);
    for (int f1 = 0; f1 < F; ++f1) {
      auto s1 = basis.annihilate(occ, f1);
      if (!s1) continue;
      for (int f2 = 0; f2 < F; ++f2) {
        auto s2 = basis.annihilate(s1->second, f2);
        if (!s2) continue;
        const double lower = s1->first * s2->first;
        for (int l2 = 0; l2 < F; ++l2) {
          auto s3 = basis.create(s2->second, l2);
          if (!s3) continue;
          for (int l1 = 0; l1 < F; ++l1) {
            const Complex c = v(l1, l2, f2, f1);
            if (c == Complex(0)) continue;
            auto s4 = basis.create(s3->second, l1);
            if (!s4) continue;
            out(*basis.index_of(s4->second), j) += 0.5 * c * lower * s3->first * s4->first;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace qkin
