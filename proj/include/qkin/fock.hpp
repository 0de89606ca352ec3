#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qkin/types.hpp"

namespace qkin {

enum class Statistics { Bose, Fermi };

const char* to_string(Statistics s);
Statistics statistics_from_string(const std::string& s);

using Occupation = std::vector<int>;

/// Occupation-number basis of a Fock space over `mode_count` modes,
/// truncated by total particle number.
///
/// States are ordered by total particle number, then by descending
/// lexicographic order of (n_1, ..., n_F), so |10> precedes |01>.
/// Ladder matrices are built once at construction; the object is
/// immutable afterwards.
class FockBasis {
 public:
  static constexpr int kDefaultDimensionCap = 4096;

  FockBasis(int mode_count, int max_total_particles, Statistics stats,
            int dimension_cap = kDefaultDimensionCap);

  int mode_count() const { return modes_; }
  int max_total_particles() const { return n_max_; }
  Statistics statistics() const { return stats_; }
  int dim() const { return static_cast<int>(states_.size()); }

  const std::vector<Occupation>& states() const { return states_; }
  const Occupation& state(int i) const { return states_[i]; }
  int total_particles(int i) const { return totals_[i]; }
  std::optional<int> index_of(const Occupation& occ) const;

  /// Matrix of a_f (0-based mode index) in this basis.
  const Matrix& annihilator(int f) const;
  Matrix creator(int f) const { return annihilator(f).adjoint(); }

  /// Diagonal projector on the states with exactly n particles.
  Matrix sector_projector(int n) const;
  /// Indices of basis states with exactly n particles.
  std::vector<int> sector_indices(int n) const;

  /// a_f |occ> as (amplitude, resulting occupation); nullopt if zero.
  std::optional<std::pair<double, Occupation>> annihilate(const Occupation& occ, int f) const;
  /// a_f^dagger |occ>; nullopt if zero or outside the truncated space.
  std::optional<std::pair<double, Occupation>> create(const Occupation& occ, int f) const;

 private:
  void check_mode(int f) const;

  int modes_;
  int n_max_;
  Statistics stats_;
  std::vector<Occupation> states_;
  std::vector<int> totals_;
  std::map<Occupation, int> index_;
  std::vector<Matrix> annihilators_;
};

FockBasis build_basis(int mode_count, int max_total_particles, Statistics stats,
                      int dimension_cap = FockBasis::kDefaultDimensionCap);

/// Number of admissible occupation vectors, counted without building them.
long long basis_dimension(int mode_count, int max_total_particles, Statistics stats);

Matrix annihilation_op(const FockBasis& basis, int f);
Matrix creation_op(const FockBasis& basis, int f);
Matrix number_op(const FockBasis& basis);
Matrix identity_op(const FockBasis& basis);

/// sum_{hk} a_h^dagger h_{hk} a_k.
Matrix one_body_operator(const FockBasis& basis, const Matrix& h);

/// (1/2) sum a_{l1}^dagger a_{l2}^dagger V_{l1 l2 f2 f1} a_{f2} a_{f1}.
/// Rejects tensors violating V_{l1 l2 f2 f1} = conj(V_{f1 f2 l2 l1}) beyond
/// `hermiticity_tol`; pass a negative tolerance to skip the check.
Matrix two_body_operator(const FockBasis& basis, const CTensor4& v, double hermiticity_tol = 1e-12);

double tensor_hermiticity_defect(const CTensor4& v);

}  // namespace qkin
