#include "doctest.h"
#include "qkin/fock.hpp"
#include "qkin/random.hpp"

using namespace qkin;

namespace {

long long count_occupations(int modes, int n_max, int per_mode_max) {
  long long count = 0;
  std::vector<int> occ(modes, 0);
  while (true) {
    int total = 0;
    for (int n : occ) total += n;
    if (total <= n_max) ++count;
    int i = 0;
    while (i < modes && ++occ[i] > per_mode_max) occ[i++] = 0;
    if (i == modes) return count;
  }
}

Matrix below_top(const FockBasis& b) {
  Matrix p = Matrix::Zero(b.dim(), b.dim());
  for (int n = 0; n < b.max_total_particles(); ++n) p += b.sector_projector(n);
  return p;
}

}  // namespace

TEST_CASE("basis dimension matches brute-force enumeration") {
  for (int f = 1; f <= 4; ++f)
    for (int n = 0; n <= 3; ++n) {
      CHECK(basis_dimension(f, n, Statistics::Bose) == count_occupations(f, n, n));
      CHECK(basis_dimension(f, n, Statistics::Fermi) == count_occupations(f, n, 1));
      CHECK(FockBasis(f, n, Statistics::Bose).dim() == count_occupations(f, n, n));
    }
  CHECK(FockBasis(3, 2, Statistics::Bose).dim() == 10);
  CHECK(FockBasis(3, 2, Statistics::Fermi).dim() == 7);
}

TEST_CASE("states are ordered by N then descending lex") {
  FockBasis b(2, 2, Statistics::Bose);
  REQUIRE(b.dim() == 6);
  CHECK(b.state(0) == Occupation{0, 0});
  CHECK(b.state(1) == Occupation{1, 0});
  CHECK(b.state(2) == Occupation{0, 1});
  CHECK(b.state(3) == Occupation{2, 0});
  CHECK(b.state(4) == Occupation{1, 1});
  CHECK(b.state(5) == Occupation{0, 2});
  CHECK(b.index_of({1, 1}) == 4);
  CHECK_FALSE(b.index_of({3, 0}).has_value());
}

TEST_CASE("dimension cap and bad arguments are rejected") {
  CHECK_THROWS_AS(FockBasis(12, 6, Statistics::Bose, 100), PreconditionError);
  CHECK_THROWS_AS(FockBasis(0, 2, Statistics::Bose), PreconditionError);
  CHECK_THROWS_AS(FockBasis(3, -1, Statistics::Bose), PreconditionError);
  FockBasis b(3, 2, Statistics::Bose);
  CHECK_THROWS_AS(b.annihilator(3), PreconditionError);
}

TEST_CASE("bosonic ladder matrices carry sqrt(n) amplitudes") {
  FockBasis b(2, 3, Statistics::Bose);
  const int from = *b.index_of({3, 0}), to = *b.index_of({2, 0});
  CHECK(std::abs(b.annihilator(0)(to, from) - std::sqrt(3.0)) < 1e-14);
  const int up = *b.index_of({2, 1});
  CHECK(std::abs(b.creator(1)(up, to) - 1.0) < 1e-14);
}

TEST_CASE("canonical commutation relations below the truncation edge") {
  FockBasis b(3, 3, Statistics::Bose);
  const Matrix p = below_top(b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Matrix& ai = b.annihilator(i);
      const Matrix aj_dag = b.creator(j);
      const Matrix comm = ai * aj_dag - aj_dag * ai;
      const Matrix expect = (i == j ? 1.0 : 0.0) * Matrix::Identity(b.dim(), b.dim());
      CHECK((p * (comm - expect) * p).norm() < 1e-12);
      const Matrix& aj = b.annihilator(j);
      CHECK((ai * aj - aj * ai).norm() < 1e-12);
    }
}

TEST_CASE("canonical anticommutation relations and Jordan-Wigner signs") {
  FockBasis b(4, 4, Statistics::Fermi);
  const Matrix id = Matrix::Identity(b.dim(), b.dim());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Matrix& ai = b.annihilator(i);
      const Matrix& aj = b.annihilator(j);
      const Matrix aj_dag = b.creator(j);
      CHECK((ai * aj_dag + aj_dag * ai - (i == j ? 1.0 : 0.0) * id).norm() < 1e-12);
      CHECK((ai * aj + aj * ai).norm() < 1e-12);
    }
  Vector vac = Vector::Zero(b.dim());
  vac(0) = 1.0;
  const Vector ab = b.creator(0) * (b.creator(1) * vac);
  const Vector ba = b.creator(1) * (b.creator(0) * vac);
  CHECK((ab + ba).norm() < 1e-14);
  CHECK(std::abs(ab.norm() - 1.0) < 1e-14);
}

TEST_CASE("number operator is diagonal with the particle counts") {
  FockBasis b(3, 2, Statistics::Bose);
  const Matrix n = number_op(b);
  for (int i = 0; i < b.dim(); ++i) CHECK(std::abs(n(i, i) - double(b.total_particles(i))) < 1e-14);
  CHECK((n - Matrix(n.diagonal().asDiagonal())).norm() < 1e-14);
}

TEST_CASE("one-body operator restricts to h on the one-particle sector") {
  RandomSource rng(7);
  const Matrix h = rng.hermitian(3);
  for (Statistics s : {Statistics::Bose, Statistics::Fermi}) {
    FockBasis b(3, 2, s);
    const Matrix op = one_body_operator(b, h);
    const auto one = b.sector_indices(1);
    REQUIRE(one.size() == 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) CHECK(std::abs(op(one[r], one[c]) - h(r, c)) < 1e-13);
    const Matrix n = number_op(b);
    CHECK((op * n - n * op).norm() < 1e-12);
    CHECK(hermiticity_defect(op) < 1e-13);
  }
}

TEST_CASE("two-body operator matches the ladder-product definition") {
  RandomSource rng(11);
  const int f = 3;
  CTensor4 v(f);
  for (int a = 0; a < f; ++a)
    for (int bb = 0; bb < f; ++bb)
      for (int c = 0; c < f; ++c)
        for (int d = 0; d < f; ++d) v(a, bb, c, d) = rng.complex_normal();
  CTensor4 herm(f);
  for (int a = 0; a < f; ++a)
    for (int bb = 0; bb < f; ++bb)
      for (int c = 0; c < f; ++c)
        for (int d = 0; d < f; ++d) herm(a, bb, c, d) = 0.5 * (v(a, bb, c, d) + std::conj(v(d, c, bb, a)));
  CHECK(tensor_hermiticity_defect(herm) < 1e-14);
  for (Statistics s : {Statistics::Bose, Statistics::Fermi}) {
    FockBasis b(f, 3, s);
    Matrix oracle = Matrix::Zero(b.dim(), b.dim());
    for (int a = 0; a < f; ++a)
      for (int bb = 0; bb < f; ++bb)
        for (int c = 0; c < f; ++c)
          for (int d = 0; d < f; ++d)
            oracle += 0.5 * herm(a, bb, c, d) * b.creator(a) * b.creator(bb) * b.annihilator(c) * b.annihilator(d);
    const Matrix op = two_body_operator(b, herm);
    CHECK((op - oracle).norm() < 1e-11);
    CHECK(hermiticity_defect(op) < 1e-12);
    CHECK((op * number_op(b) - number_op(b) * op).norm() < 1e-11);
  }
  CHECK_THROWS_AS(two_body_operator(FockBasis(f, 2, Statistics::Bose), v), PreconditionError);
}

TEST_CASE("statistics names round-trip") {
  CHECK(statistics_from_string(to_string(Statistics::Bose)) == Statistics::Bose);
  CHECK(statistics_from_string(to_string(Statistics::Fermi)) == Statistics::Fermi);
  CHECK_THROWS_AS(statistics_from_string("anyon"), PreconditionError);
}
