#include "qkin/microsystem.hpp"

#include <cmath>

namespace qkin {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

JointSpace::JointSpace(const FockBasis& macro, MicroModeSet micro)
    : macro_dim_(macro.dim()), micro_(micro.q_dim, micro.max_particles, Statistics::Bose) {
  if (micro.max_particles < 1) throw PreconditionError("JointSpace: micro modes must admit one particle");
  const Matrix id = Matrix::Identity(macro_dim_, macro_dim_);
  charge_ = Matrix::Zero(dim(), dim());
  for (int q = 0; q < micro.q_dim; ++q) {
    b_.push_back(kron(id, micro_.annihilator(q)));
    charge_ += b_.back().adjoint() * b_.back();
  }
}

const Matrix& JointSpace::micro_annihilator(int q) const {
  if (q < 0 || q >= q_dim()) throw PreconditionError("micro mode index out of range");
  return b_[q];
}

Matrix JointSpace::macro_operator(const Matrix& x) const {
  if (x.rows() != macro_dim_ || x.cols() != macro_dim_) throw PreconditionError("macro_operator: dimension mismatch");
  return kron(x, Matrix::Identity(micro_.dim(), micro_.dim()));
}

Matrix JointSpace::micro_one_body(const Matrix& a) const {
  if (a.rows() != q_dim() || a.cols() != q_dim()) throw PreconditionError("micro_one_body: A must be Q x Q");
  Matrix out = Matrix::Zero(dim(), dim());
  for (int h = 0; h < q_dim(); ++h)
    for (int k = 0; k < q_dim(); ++k)
      if (a(h, k) != Complex(0)) out += a(h, k) * b_[h].adjoint() * b_[k];
  return out;
}

Matrix JointSpace::vacuum_embed(const Matrix& rho_macro) const {
  Matrix vac = Matrix::Zero(micro_.dim(), micro_.dim());
  vac(0, 0) = 1.0;
  return kron(rho_macro, vac);
}

JointState embed_joint(const JointSpace& space, const Matrix& rho_macro, const Matrix& rho_one) {
  const int q = space.q_dim();
  if (rho_macro.rows() != space.dim() || rho_macro.cols() != space.dim())
    throw PreconditionError("embed_joint: macro state must live on the joint space");
  if (rho_one.rows() != q || rho_one.cols() != q) throw PreconditionError("embed_joint: one-particle matrix must be Q x Q");
  if (hermiticity_defect(rho_one) > 1e-12) throw PreconditionError("embed_joint: one-particle matrix is not hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho_one + rho_one.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw PreconditionError("embed_joint: one-particle matrix is not positive semidefinite");
  if (std::abs(rho_one.trace() - Complex(1.0)) > 1e-12)
    throw PreconditionError("embed_joint: one-particle matrix must have unit trace");
  for (int p = 0; p < q; ++p) {
    if ((space.micro_annihilator(p) * rho_macro).norm() > 1e-12)
      throw PreconditionError("embed_joint: macro state has micro occupation (b_p rho_M != 0)");
  }
  JointState js;
  js.rho_macro = rho_macro;
  js.rho_one = rho_one;
  js.rho = Matrix::Zero(space.dim(), space.dim());
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      if (rho_one(a, b) != Complex(0))
        js.rho += rho_one(a, b) * space.micro_annihilator(a).adjoint() * rho_macro * space.micro_annihilator(b);
  return js;
}

Complex reduce_expectation(const Matrix& a, const JointState& joint) {
  if (a.rows() != joint.rho_one.rows() || a.cols() != joint.rho_one.cols())
    throw PreconditionError("reduce_expectation: A must be Q x Q");
  return (a * joint.rho_one).trace();
}

Complex full_expectation(const JointSpace& space, const Matrix& a, const JointState& joint) {
  return (space.micro_one_body(a) * joint.rho).trace();
}

}  // namespace qkin
