#include <catch_amalgamated.hpp>

#include <random>

#include "fluctus/matrix_core.hpp"
#include "fluctus/sampling.hpp"
#include "oracles.hpp"

using namespace fluctus;
using Catch::Matchers::WithinAbs;

TEST_CASE("mat_mul basics", "[matrix_core]") {
  Rng rng(1);
  const ComplexMatrix m = random_matrix(rng, 3, 3);
  CHECK(mat_mul(identity(3), m) == m);
  CHECK(mat_mul(matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)) == matrix_unit(2, 0, 0));

  const ComplexMatrix a = random_matrix(rng, 4, 4), b = random_matrix(rng, 4, 4);
  CHECK(rel_diff(mat_mul(a, b), oracle::mul(a, b)) < 1e-14);

  const ComplexMatrix r = random_matrix(rng, 2, 3);
  CHECK(mat_mul(r, random_matrix(rng, 3, 5)).cols() == 5);
  CHECK_THROWS_AS(mat_mul(r, r), ShapeError);
}

TEST_CASE("adjoint", "[matrix_core]") {
  ComplexMatrix h(2, 2);
  h << 1.0, Complex(2, 3), Complex(2, -3), -4.0;
  CHECK(adjoint(h) == h);
  ComplexMatrix d = zeros(2, 2);
  d(0, 0) = Complex(0, 1);
  CHECK(adjoint(d)(0, 0) == Complex(0, -1));
  Rng rng(2);
  const ComplexMatrix m = random_matrix(rng, 3, 4);
  CHECK(adjoint(adjoint(m)) == m);
  CHECK(adjoint(m).rows() == 4);
}

TEST_CASE("commutator", "[matrix_core]") {
  Rng rng(3);
  const ComplexMatrix m = random_matrix(rng, 3, 3);
  CHECK(frob_norm(commutator(identity(3), m)) == 0.0);
  CHECK(commutator(matrix_unit(2, 0, 0), matrix_unit(2, 0, 1)) == matrix_unit(2, 0, 1));
  const ComplexMatrix a = random_matrix(rng, 5, 5), b = random_matrix(rng, 5, 5);
  CHECK(rel_diff(commutator(a, b), oracle::commutator(a, b)) < 1e-14);
  CHECK_THROWS_AS(commutator(a, random_matrix(rng, 4, 4)), ShapeError);
}

TEST_CASE("kron", "[matrix_core]") {
  CHECK(kron(identity(2), identity(2)) == identity(4));
  const ComplexMatrix k = kron(matrix_unit(2, 0, 0), matrix_unit(2, 1, 1));
  CHECK(k(1, 1) == Complex(1.0));
  CHECK(frob_norm(k) == 1.0);

  Rng rng(4);
  const ComplexMatrix a = random_matrix(rng, 2, 2), b = random_matrix(rng, 2, 2);
  const ComplexMatrix ab = kron(a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) CHECK(ab(i * 2 + p, j * 2 + q) == a(i, j) * b(p, q));

  const ComplexMatrix c = random_matrix(rng, 2, 3), d = random_matrix(rng, 3, 2);
  CHECK(kron(c, d) == oracle::kron(c, d));
  // mixed product
  const ComplexMatrix a2 = random_matrix(rng, 2, 2), b2 = random_matrix(rng, 2, 2);
  CHECK(rel_diff(kron(a, b) * kron(a2, b2), kron(a * a2, b * b2)) < 1e-14);
}

TEST_CASE("frob_norm", "[matrix_core]") {
  CHECK(frob_norm(zeros(3, 3)) == 0.0);
  CHECK_THAT(frob_norm(identity(4)), WithinAbs(2.0, 1e-15));
  Rng rng(5);
  const ComplexMatrix m = random_matrix(rng, 4, 6);
  CHECK_THAT(frob_norm(m), WithinAbs(oracle::frob(m), 1e-13));
}

TEST_CASE("approx_eq", "[matrix_core]") {
  Rng rng(6);
  const ComplexMatrix m = random_matrix(rng, 3, 3);
  CHECK(approx_eq(m, m, 1e-9));
  CHECK_FALSE(approx_eq(zeros(3, 3), ComplexMatrix::Constant(3, 3, 1e-6), 1e-9));
  CHECK(approx_eq(m, m + ComplexMatrix::Constant(3, 3, 1e-12), 1e-9));
  CHECK_THROWS_AS(approx_eq(m, zeros(2, 2)), ShapeError);
}

TEST_CASE("antilinear operator", "[matrix_core]") {
  Rng rng(7);
  const ComplexMatrix t = random_matrix(rng, 3, 3);
  const AntilinearOp plain(identity(3));
  CHECK(conj_by_antilinear(plain, t) == t.conjugate());

  const ComplexMatrix m = random_matrix(rng, 3, 3);
  const AntilinearOp j(m);
  const ComplexVector xi = ComplexVector::Random(3);
  CHECK((j.apply(Complex(0, 1) * xi) - Complex(0, -1) * j.apply(xi)).norm() < 1e-13);
  // J T J^{-1} applied to J xi equals J (T xi)
  CHECK((j.conjugate(t) * j.apply(xi) - j.apply(t * xi)).norm() < 1e-10 * (1 + t.norm() * m.norm()));
  const ComplexMatrix s = random_matrix(rng, 3, 3);
  CHECK(rel_diff(j.conjugate(t * s), j.conjugate(t) * j.conjugate(s)) < 1e-12);
  CHECK(j.compose(plain) == m);

  CHECK_THROWS_AS(AntilinearOp(zeros(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(AntilinearOp(random_matrix(rng, 2, 3)), ShapeError);
}

TEST_CASE("hermitian residual", "[matrix_core]") {
  ComplexMatrix h(2, 2);
  h << 2.0, Complex(0, 1), Complex(0, -1), 3.0;
  CHECK(hermitian_residual(h) == 0.0);
  h(0, 1) = 0.0;
  CHECK_THAT(hermitian_residual(h), WithinAbs(std::sqrt(2.0), 1e-15));
}
