#include <catch_amalgamated.hpp>

#include "fluctus/perturbation.hpp"
#include "fluctus/sampling.hpp"
#include "fluctus/toy_model.hpp"

using namespace fluctus;

TEST_CASE("toy triple data", "[toy_model]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  CHECK(t.dim_h() == 8);
  CHECK(t.algebra().name() == "A_ev");
  CHECK(check_ko_signs(t).passed);
  CHECK(check_zeroth_order(t).max_defect < 1e-12);
  CHECK(check_first_order(t).max_defect > 0.1);
  CHECK(check_first_order(t, a_f()).max_defect < 1e-12);
  CHECK(check_first_order(build_toy(ToyParams{1.0, 0.0})).max_defect < 1e-12);
}

TEST_CASE("larger subalgebras than A_F violate the first-order condition", "[toy_model]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  std::vector<AlgebraElement> diag;
  diag.push_back(toy::element(1, 0, zeros(2, 2)));
  diag.push_back(toy::element(0, 1, zeros(2, 2)));
  diag.push_back(toy::element(0, 0, matrix_unit(2, 0, 0)));
  diag.push_back(toy::element(0, 0, matrix_unit(2, 1, 1)));
  const AlgebraSpec decoupled({2, 2}, diag, "diagonal");
  CHECK(decoupled.contains(a_f()));
  CHECK(check_first_order(t, decoupled).max_defect > 0.1);
  CHECK(check_first_order(t, a_ev()).max_defect > 0.1);
}

TEST_CASE("closed three-field Dirac operator", "[toy_model]") {
  const ToyParams p{Complex(0.5, 1.0), Complex(2.0, -1.0)};
  CHECK(closed_dirac(p, FieldPoint{}) == build_toy(p).d());
  const ComplexMatrix d0 = closed_dirac(p, FieldPoint{1.0, 0.0, 0.0});
  CHECK(toy::y_block(d0) == zeros(2, 2));
  CHECK(d0.block(0, 0, 4, 4) == toy::x_block(p.k_x));

  const FieldPoint f{Complex(0.3, -0.2), Complex(1.5, 0.5), Complex(-0.4, 0.7)};
  const ComplexMatrix d = closed_dirac(p, f);
  CHECK(hermitian_residual(d) == 0.0);
  CHECK((toy::grading() * d + d * toy::grading()).norm() == 0.0);
  const ComplexMatrix y = toy::y_block(d);
  CHECK(std::abs(y(0, 1) - y(1, 0)) < 1e-15 * std::abs(y(0, 1)));
  CHECK(std::abs(y(1, 1) - p.k_y * f.v2 * f.v2) < 1e-15);
}

TEST_CASE("field extraction", "[toy_model]") {
  const AlgebraSpec ev = a_ev();
  const FieldPoint trivial = extract_fields(UniversalOneForm{{{ev.unit(), ev.unit()}, {ev.unit(), ev.unit()}}});
  CHECK(trivial.x == Complex(1.0));
  CHECK(trivial.v1 == Complex(1.0));
  CHECK(trivial.v2 == Complex(0.0));

  const FieldPoint f = extract_fields(UniversalOneForm{{{toy::element(1, 0, zeros(2, 2)), toy::element(0, 1, zeros(2, 2))}}});
  CHECK(f.x == Complex(2.0));
  CHECK(f.v1 == Complex(1.0));
  CHECK(f.v2 == Complex(0.0));

  AlgebraElement outside = ev.unit();
  outside.blocks[0](0, 1) = 1.0;
  CHECK_THROWS_AS(extract_fields(UniversalOneForm{{{outside, ev.unit()}}}), std::invalid_argument);
}

TEST_CASE("three-field exhaustiveness", "[toy_model]") {
  const ToyParams p{Complex(0.9, 0.4), Complex(1.2, -0.3)};
  const FiniteSpectralTriple t = build_toy(p);
  Rng rng(61);
  for (int k = 0; k < 40; ++k) {
    const UniversalOneForm w = random_self_adjoint_one_form(t.algebra(), rng, 1 + k % 4);
    const ComplexMatrix dp = fluctuate(t, w);
    CHECK(rel_diff(dp, closed_dirac(p, extract_fields(w))) < 1e-12);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<ComplexMatrix>(toy::y_block(dp)).singularValues();
    CHECK(sv(1) <= 1e-12 * sv(0));
  }
}
