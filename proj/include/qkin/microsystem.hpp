#pragma once

#include "qkin/fock.hpp"
#include "qkin/types.hpp"

namespace qkin {

/// Micro modes of a distinct Bose species, at most `max_particles` of them
/// occupied. Their ladder operators commute with the macro ones.
struct MicroModeSet {
  int q_dim = 1;
  int max_particles = 1;
};

/// Product space H_macro (x) H_micro; joint index = macro * micro_dim + micro.
class JointSpace {
 public:
  JointSpace(const FockBasis& macro, MicroModeSet micro);

  int dim() const { return macro_dim_ * micro_.dim(); }
  int macro_dim() const { return macro_dim_; }
  int q_dim() const { return micro_.mode_count(); }
  const FockBasis& micro_basis() const { return micro_; }

  /// b_q on the joint space.
  const Matrix& micro_annihilator(int q) const;
  Matrix macro_operator(const Matrix& x) const;  // X (x) I
  /// sum b_h^dag A_hk b_k.
  Matrix micro_one_body(const Matrix& a) const;
  /// Micro number operator Q = sum b_q^dag b_q.
  const Matrix& charge() const { return charge_; }
  /// rho_M (x) |0><0|, the macro state with the micro modes empty.
  Matrix vacuum_embed(const Matrix& rho_macro) const;

 private:
  int macro_dim_;
  FockBasis micro_;
  std::vector<Matrix> b_;
  Matrix charge_;
};

struct JointState {
  Matrix rho;        // joint statistical operator
  Matrix rho_macro;  // macro state on the joint space (micro vacuum)
  Matrix rho_one;    // Q x Q one-particle matrix
};

/// rho = sum_{qp} b_q^dag rho_M b_p rho_{qp}. Requires b_p rho_M = 0 for all
/// p and rho_one hermitian, positive semidefinite and of unit trace.
JointState embed_joint(const JointSpace& space, const Matrix& rho_macro, const Matrix& rho_one);

/// Tr(A rho_one).
Complex reduce_expectation(const Matrix& a, const JointState& joint);
/// Tr(A_hat rho) on the joint space, A_hat = sum b_h^dag A_hk b_k.
Complex full_expectation(const JointSpace& space, const Matrix& a, const JointState& joint);

}  // namespace qkin
