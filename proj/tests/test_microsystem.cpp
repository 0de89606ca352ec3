#include "doctest.h"
#include "qkin/microsystem.hpp"
#include "qkin/random.hpp"

using namespace qkin;

TEST_CASE("joint space is the tensor product with commuting ladders") {
  FockBasis macro(2, 2, Statistics::Bose);
  JointSpace js(macro, {3, 1});
  CHECK(js.dim() == macro.dim() * 4);
  const Matrix a = js.macro_operator(macro.annihilator(0));
  for (int q = 0; q < 3; ++q) {
    const Matrix& b = js.micro_annihilator(q);
    CHECK((a * b - b * a).norm() < 1e-14);
    CHECK((a * b.adjoint() - b.adjoint() * a).norm() < 1e-14);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(js.charge());
  CHECK(es.eigenvalues().minCoeff() > -1e-14);
  CHECK(es.eigenvalues().maxCoeff() < 1 + 1e-14);
  CHECK_THROWS_AS(JointSpace(macro, {3, 0}), PreconditionError);
}

TEST_CASE("embedding reduces to the one-particle expectation") {
  FockBasis macro(3, 2, Statistics::Bose);
  JointSpace js(macro, {3, 1});
  RandomSource rng(31);
  for (int draw = 0; draw < 10; ++draw) {
    const Matrix rho_m = js.vacuum_embed(rng.density(macro.dim(), 3));
    const Matrix rho1 = rng.density(3, 2);
    const JointState st = embed_joint(js, rho_m, rho1);
    const Matrix a = rng.hermitian(3);
    CHECK(std::abs(full_expectation(js, a, st) - reduce_expectation(a, st)) < 1e-12);
    CHECK(std::abs(st.rho.trace() - 1.0) < 1e-12);
    CHECK((js.charge() * st.rho - st.rho).norm() < 1e-12);
    CHECK(hermiticity_defect(st.rho) < 1e-13);
    const Matrix x = rng.hermitian(macro.dim());
    CHECK(std::abs((js.macro_operator(x) * st.rho).trace() - (js.macro_operator(x) * rho_m).trace()) < 1e-12);
  }
}

TEST_CASE("embedding rejects invalid inputs") {
  FockBasis macro(2, 1, Statistics::Bose);
  JointSpace js(macro, {2, 1});
  RandomSource rng(37);
  const Matrix rho_m = js.vacuum_embed(rng.density(macro.dim()));
  CHECK_THROWS_AS(embed_joint(js, rho_m, 2.0 * rng.density(2)), PreconditionError);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(embed_joint(js, rho_m, neg), PreconditionError);
  const Matrix occupied = rng.density(js.dim());
  CHECK_THROWS_AS(embed_joint(js, occupied, rng.density(2)), PreconditionError);
  CHECK_THROWS_AS(embed_joint(js, rng.density(macro.dim()), rng.density(2)), PreconditionError);
}
