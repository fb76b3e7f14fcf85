#include <catch_amalgamated.hpp>

#include "fluctus/sampling.hpp"
#include "fluctus/spectral_triple.hpp"
#include "fluctus/toy_model.hpp"
#include "oracles.hpp"

using namespace fluctus;

namespace {

FiniteSpectralTriple toy_with_j(const ComplexMatrix& m) {
  return FiniteSpectralTriple(a_ev(), toy::kDimH, toy::rep_blocks(), closed_dirac(ToyParams{}, FieldPoint{}),
                              AntilinearOp(m), toy::grading(), KOSigns{1, 1, -1});
}

}  // namespace

TEST_CASE("toy representation", "[spectral_triple]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  CHECK(t.represent(t.algebra().unit()) == identity(8));

  ComplexMatrix expected = zeros(8, 8);
  expected(0, 0) = expected(1, 1) = 1.0;
  CHECK(t.represent(toy::element(1, 0, zeros(2, 2))) == expected);

  Rng rng(21);
  const AlgebraSpec full = toy::full_algebra();
  for (int k = 0; k < 5; ++k) {
    const AlgebraElement a = random_element(full, rng), b = random_element(full, rng);
    CHECK(rel_diff(t.represent(a * b), t.represent(a) * t.represent(b)) < 1e-13);
    CHECK(rel_diff(t.represent(a), oracle::toy_pi(a.blocks[0], a.blocks[1])) < 1e-15);
    CHECK(rel_diff(t.represent_opposite(a), oracle::toy_pi_opposite(a.blocks[0], a.blocks[1])) < 1e-15);
    CHECK(rel_diff(t.hat(t.represent(a)), t.represent_opposite(adjoint(a))) < 1e-15);
  }
}

TEST_CASE("opposite representation", "[spectral_triple]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  CHECK(t.represent_opposite(t.algebra().unit()) == identity(8));

  ComplexMatrix m(2, 2);
  m << 1.0, Complex(2, 1), 3.0, Complex(0, -4);
  const ComplexMatrix op = t.represent_opposite(toy::element(0, 0, m));
  CHECK(op.block(0, 0, 2, 2) == m.transpose());
  CHECK(op.block(2, 2, 2, 2) == m.transpose());
  CHECK(op.block(4, 4, 4, 4) == zeros(4, 4));

  Rng rng(22);
  const AlgebraElement a = random_element(a_ev(), rng), b = random_element(a_ev(), rng);
  // b ↦ π°(b) reverses products
  CHECK(rel_diff(t.represent_opposite(a * b), t.represent_opposite(b) * t.represent_opposite(a)) < 1e-13);
  CHECK(commutator(t.represent(a), t.represent_opposite(b)).norm() < 1e-12);
}

TEST_CASE("zeroth-order condition", "[spectral_triple]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  CHECK(check_zeroth_order(t).max_defect < 1e-12);
  CHECK(check_zeroth_order(t, toy::full_algebra()).max_defect < 1e-12);

  const AlgebraSpec c3({1, 1, 1});
  std::vector<RepBlock> rep = {{0, 1, 1, RepMode::plain, 0}, {1, 1, 1, RepMode::plain, 1}, {2, 1, 1, RepMode::plain, 2}};
  const FiniteSpectralTriple comm(c3, 3, rep, zeros(3, 3), AntilinearOp(identity(3)), identity(3), KOSigns{1, 1, 1});
  CHECK(check_zeroth_order(comm).max_defect == 0.0);

  // swapping rows 0 and 4 of J's matrix part keeps J² = 1 but breaks the commutant
  ComplexMatrix m = toy::real_structure_matrix();
  m.row(0).swap(m.row(4));
  const FiniteSpectralTriple bad = toy_with_j(m);
  const AxiomReport r = check_zeroth_order(bad);
  CHECK_FALSE(r.passed);
  CHECK(r.max_defect > 0.5);
}

TEST_CASE("first-order condition", "[spectral_triple]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  const AxiomReport full = check_first_order(t);
  CHECK_FALSE(full.passed);
  CHECK(full.max_defect > 0.1);
  CHECK(check_first_order(t, a_f()).max_defect < 1e-12);
  CHECK(check_first_order(build_toy(ToyParams{1.0, 0.0})).max_defect < 1e-12);
  CHECK(check_first_order(build_toy(ToyParams{Complex(0.3, 2.0), 0.0})).max_defect < 1e-12);

  const AlgebraElement a = toy::element(1, 1, zeros(2, 2));
  const ComplexMatrix defect = first_order_defect(t, a, a);
  CHECK(defect.norm() >= 1.0);
  // k_y enters linearly
  const FiniteSpectralTriple t2 = build_toy(ToyParams{1.0, 2.0});
  CHECK(rel_diff(first_order_defect(t2, a, a), 2.0 * defect) < 1e-14);

  CHECK_THROWS_AS(check_first_order(t, toy::full_algebra()), std::invalid_argument);
  CHECK_THROWS_AS(check_first_order(t, AlgebraSpec({2})), std::invalid_argument);
}

TEST_CASE("KO signs", "[spectral_triple]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  const KOReport ko = check_ko_signs(t);
  CHECK(ko.passed);
  CHECK(ko.j_squared < 1e-12);
  CHECK(ko.j_d < 1e-12);
  CHECK(ko.j_gamma < 1e-12);

  const KOReport flipped = check_ko_signs(t.with_signs(KOSigns{1, 1, 1}));
  CHECK_FALSE(flipped.passed);
  CHECK(flipped.j_gamma == Catch::Approx(2.0 * (t.gamma() * t.j().matrix()).norm()).epsilon(1e-14));

  const AlgebraSpec c2({1, 1});
  std::vector<RepBlock> rep = {{0, 1, 1, RepMode::plain, 0}, {1, 1, 1, RepMode::plain, 1}};
  const FiniteSpectralTriple trivial(c2, 2, rep, zeros(2, 2), AntilinearOp(identity(2)), identity(2), KOSigns{1, 1, 1});
  CHECK(check_ko_signs(trivial).passed);

  ComplexMatrix d(2, 2), g(2, 2);
  d << 0.0, 1.5, 1.5, 0.0;
  g << 1.0, 0.0, 0.0, -1.0;
  const FiniteSpectralTriple graded(c2, 2, rep, d, AntilinearOp(identity(2)), g, KOSigns{1, 1, 1});
  CHECK(check_ko_signs(graded).passed);
}

TEST_CASE("triple validation", "[spectral_triple]") {
  const ComplexMatrix s = toy::real_structure_matrix();
  const ComplexMatrix g = toy::grading();
  const ComplexMatrix d = closed_dirac(ToyParams{}, FieldPoint{});
  const KOSigns signs{1, 1, -1};
  // full M2 ⊕ M2 does not commute with the grading
  CHECK_THROWS_AS(FiniteSpectralTriple(toy::full_algebra(), 8, toy::rep_blocks(), d, AntilinearOp(s), g, signs),
                  std::invalid_argument);
  std::vector<RepBlock> gap = {{0, 1, 2, RepMode::plain, 0}, {1, 2, 1, RepMode::plain, 5}};
  CHECK_THROWS_AS(FiniteSpectralTriple(a_ev(), 8, gap, d, AntilinearOp(s), g, signs), std::invalid_argument);
  ComplexMatrix nh = d;
  nh(0, 2) += 1.0;
  CHECK_THROWS_AS(FiniteSpectralTriple(a_ev(), 8, toy::rep_blocks(), nh, AntilinearOp(s), g, signs),
                  std::invalid_argument);
  CHECK_THROWS_AS(FiniteSpectralTriple(a_ev(), 8, toy::rep_blocks(), d, AntilinearOp(s), identity(8), signs),
                  std::invalid_argument);
  CHECK_THROWS_AS(FiniteSpectralTriple(a_ev(), 8, toy::rep_blocks(), d, AntilinearOp(s), g, KOSigns{-1, 1, -1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(FiniteSpectralTriple(a_ev(), 8, toy::rep_blocks(), d, AntilinearOp(s), g, KOSigns{1, 0, -1}),
                  std::invalid_argument);
  CHECK_THROWS(build_toy(ToyParams{}).with_dirac(zeros(4, 4)));
}
