#include "doctest.h"
#include "qkin/field_model.hpp"
#include "qkin/random.hpp"
#include "qkin/scattering.hpp"

using namespace qkin;

namespace {

Matrix expm_taylor(const Matrix& a) {
  Matrix term = Matrix::Identity(a.rows(), a.cols()), sum = term;
  for (int n = 1; n < 80; ++n) {
    term = term * a / double(n);
    sum += term;
  }
  return sum;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct Model {
  FockBasis basis{3, 2, Statistics::Bose};
  FieldModel fm;
  Model() {
    BoxGeometry line;
    fm = make_field_model(line, 3, Potential::gaussian(2.0, 0.15), CellGrid::uniform(line, 1), 24);
  }
};

}  // namespace

TEST_CASE("spectral decomposition reconstructs and rejects non-hermitian input") {
  RandomSource rng(3);
  const Matrix h = rng.hermitian(6);
  const auto sd = spectral_decomposition(h);
  CHECK((sd.reconstruct() - h).norm() < 1e-12);
  CHECK((sd.from_eigenbasis(sd.to_eigenbasis(h)) - h).norm() < 1e-12);
  CHECK_THROWS_AS(spectral_decomposition(rng.matrix(4, 4)), PreconditionError);
}

TEST_CASE("Heisenberg evolution matches the exponential series") {
  RandomSource rng(5);
  const Matrix h = rng.hermitian(5), x = rng.matrix(5, 5);
  const double t = 0.3;
  const Matrix u = expm_taylor(Complex(0, t) * h);
  CHECK((heisenberg_evolve(h, x, t) - u * x * u.adjoint()).norm() < 1e-11);
  CHECK((heisenberg_evolve(h, x, 0.0) - x).norm() < 1e-13);
}

TEST_CASE("column-major vectorization and the Liouvillian") {
  RandomSource rng(9);
  const Matrix a = rng.matrix(4, 4), b = rng.matrix(4, 4), x = rng.matrix(4, 4), h = rng.hermitian(4);
  CHECK((apply_superoperator(kron(b.transpose(), a), x) - a * x * b).norm() < 1e-12);
  CHECK((unvec(vec(x), 4) - x).norm() == 0.0);
  CHECK((apply_superoperator(liouvillian(h), x) - Complex(0, 1) * (h * x - x * h)).norm() < 1e-12);
  CHECK((apply_superoperator(identity_superoperator(4), x) - x).norm() == 0.0);
}

TEST_CASE("resolvent solves (z - H')Y = X and flags singular queries") {
  RandomSource rng(13);
  const Matrix h = rng.hermitian(5), x = rng.matrix(5, 5);
  const Complex z(0.4, 1.7);
  const Matrix y = resolvent_apply(h, z, x);
  const Matrix lhs = z * y - Complex(0, 1) * (h * y - y * h);
  CHECK((lhs - x).norm() < 1e-11);
  const auto sd = spectral_decomposition(h);
  CHECK_THROWS_AS(resolvent_apply(sd, Complex(0, sd.energies(3) - sd.energies(1)), x), NumericalError);
  CHECK_THROWS_AS(resolvent_apply(sd, Complex(0, 0), x), NumericalError);
}

TEST_CASE("resolvent identity with the scattering map on a Fock model") {
  Model m;
  const Matrix h0 = free_hamiltonian(m.basis, m.fm);
  const Matrix v = two_body_operator(m.basis, m.fm.pair_total);
  RandomSource rng(17);
  for (int draw = 0; draw < 5; ++draw) {
    const Complex z(rng.uniform(0.5, 3.0), rng.uniform(-60.0, 60.0));
    const Matrix x = rng.matrix(m.basis.dim(), m.basis.dim());
    const Matrix exact = resolvent_apply(h0 + v, z, x);
    const Matrix g0x = resolvent_apply(h0, z, x);
    const Matrix series = g0x + resolvent_apply(h0, z, scattering_map_apply(h0, v, z, g0x));
    CHECK((exact - series).norm() < 1e-9 * std::max(1.0, exact.norm()));
  }
}

TEST_CASE("pair basis follows the two-particle sector of the Fock basis") {
  Model m;
  for (Statistics s : {Statistics::Bose, Statistics::Fermi}) {
    const auto pb = make_pair_basis(m.fm.modes, s);
    FockBasis b(3, 2, s);
    const auto two = b.sector_indices(2);
    REQUIRE(static_cast<int>(two.size()) == pb.size());
    const Matrix op = two_body_operator(b, m.fm.pair_total);
    const Matrix pm = pair_matrix(m.fm.modes, m.fm.pair_total, s);
    for (int i = 0; i < pb.size(); ++i) {
      for (int j = 0; j < pb.size(); ++j) CHECK(std::abs(op(two[i], two[j]) - pm(i, j)) < 1e-12);
      const auto [f1, f2] = pb.pairs[i];
      CHECK(pb.energies(i) == doctest::Approx(m.fm.modes[f1].energy + m.fm.modes[f2].energy));
      CHECK(pb.index_of(f2, f1) == i);
    }
  }
}

TEST_CASE("pair matrix to tensor round-trips for both statistics") {
  Model m;
  RandomSource rng(19);
  for (Statistics s : {Statistics::Bose, Statistics::Fermi}) {
    const auto pb = make_pair_basis(m.fm.modes, s);
    const Matrix a = rng.hermitian(pb.size());
    const CTensor4 t = pair_matrix_to_tensor(pb, a, 3);
    CHECK(tensor_hermiticity_defect(t) < 1e-13);
    CHECK((pair_matrix(m.fm.modes, t, s) - a).norm() < 1e-12);
  }
}

TEST_CASE("T-matrix solves Lippmann-Schwinger and obeys the unitarity relation") {
  Model m;
  const Complex z(60.0, 2.0);
  const auto t = two_body_tmatrix(m.fm.modes, m.fm.pair_total, Statistics::Bose, z, {0.5});
  const int n = t.basis.size();
  Matrix g0 = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) g0(i, i) = 1.0 / (z - t.basis.energies(i));
  CHECK((t.t - t.v_pair - t.v_pair * g0 * t.t).norm() < 1e-11);
  CHECK((t.t - t.t.adjoint() - t.t.adjoint() * (g0 - g0.adjoint()) * t.t).norm() < 1e-11);
  for (int j = 0; j < n; ++j) {
    Matrix gj = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) gj(i, i) = 1.0 / (Complex(t.basis.energies(j), 0.5) - t.basis.energies(i));
    const Matrix tj = (Matrix::Identity(n, n) - t.v_pair * gj).partialPivLu().solve(t.v_pair);
    CHECK((tj.col(j) - t.on_shell.col(j)).norm() < 1e-11);
  }
  CHECK(t.condition >= 1.0);
  CHECK_THROWS_AS(two_body_tmatrix(m.fm.modes, m.fm.pair_total, Statistics::Bose, Complex(1, 0)), PreconditionError);
}

TEST_CASE("free pairs have vanishing T and no collision time") {
  Model m;
  const CTensor4 zero(3);
  const auto t = two_body_tmatrix(m.fm.modes, zero, Statistics::Bose, Complex(0, 1), {0.1});
  CHECK(t.t.norm() == 0.0);
  CHECK_FALSE(collision_time_estimate(t).has_value());
}

TEST_CASE("coarse window bounds") {
  const auto w = CoarseWindow::make(0.01, 1.0, 4);
  CHECK(w.lower() == doctest::Approx(0.05));
  CHECK(w.upper() == doctest::Approx(0.2));
  CHECK(w.samples.size() == 4);
  CHECK(w.samples.front() >= w.lower());
  CHECK(w.samples.back() <= w.upper() * (1 + 1e-12));
  CHECK_THROWS_AS(CoarseWindow::make(1.0, 10.0), NumericalError);
  const auto open = CoarseWindow::make(0.1, 0.0, 3);
  CHECK(open.samples.back() == doctest::Approx(5.0));
}
