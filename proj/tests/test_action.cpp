#include <catch_amalgamated.hpp>

#include <numbers>

#include "fluctus/action.hpp"
#include "fluctus/commands.hpp"
#include "fluctus/sampling.hpp"
#include "oracles.hpp"

using namespace fluctus;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

Eigen::VectorXd vec3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

/// Real Lie algebra of U(A_ev), written out by hand.
std::vector<AlgebraElement> ev_lie_basis() {
  const Complex i(0.0, 1.0);
  return {toy::element(i, 0, zeros(2, 2)),
          toy::element(0, i, zeros(2, 2)),
          toy::element(0, 0, i, 0.0, 0.0, 0.0),
          toy::element(0, 0, 0.0, 0.0, 0.0, i),
          toy::element(0, 0, 0.0, 1.0, -1.0, 0.0),
          toy::element(0, 0, 0.0, i, i, 0.0)};
}

int oracle_stabilizer(const FiniteSpectralTriple& t, const ComplexMatrix& d) {
  const auto basis = ev_lie_basis();
  Eigen::MatrixXd m(128, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const ComplexMatrix px = t.represent(basis[k]);
    const ComplexMatrix gen = px + t.j().matrix() * px.conjugate() * t.j().matrix().adjoint();
    const ComplexMatrix c = oracle::commutator(gen, d);
    for (int r = 0; r < 8; ++r)
      for (int s = 0; s < 8; ++s) {
        m(r * 8 + s, static_cast<Eigen::Index>(k)) = c(r, s).real();
        m(64 + r * 8 + s, static_cast<Eigen::Index>(k)) = c(r, s).imag();
      }
  }
  return static_cast<int>(basis.size()) - oracle::real_rank(m, 1e-9);
}

}  // namespace

TEST_CASE("action parameters", "[action]") {
  CHECK_NOTHROW(ActionParams{}.validate());
  CHECK_THROWS_AS((ActionParams{-1.0, 1.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ActionParams{1.0, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ActionParams{1.0, 1.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("potential values", "[action]") {
  const ToyParams p;
  const ActionParams ap;
  CHECK(v_trace(p, ap, FieldPoint{0.0, 0.0, 0.0}) == 0.0);
  CHECK(v_closed(p, ap, FieldPoint{0.0, 0.0, 0.0}) == 0.0);
  const double r = std::pow(2.0, 0.25);
  CHECK_THAT(v_closed(p, ap, FieldPoint{0.0, r, 0.0}), WithinRel(-1.0 / kPi2, 1e-14));
  CHECK_THAT(v_closed(p, ap, FieldPoint{0.0, r / std::sqrt(2.0), Complex(0.0, r / std::sqrt(2.0))}),
             WithinRel(-1.0 / kPi2, 1e-13));
  CHECK_THAT(v_closed(p, ap, FieldPoint{}), WithinRel(-11.0 / (4.0 * kPi2), 1e-14));
  CHECK_THAT(v_trace(p, ap, FieldPoint{}), WithinRel(-11.0 / (4.0 * kPi2), 1e-14));
  CHECK_THAT(v_closed(p, ap, FieldPoint{std::sqrt(2.0), 0.0, 0.0}), WithinRel(-4.0 / kPi2, 1e-14));
}

TEST_CASE("potential identity on random fields", "[action]") {
  Rng rng(71);
  std::uniform_real_distribution<double> pos(0.2, 2.0);
  for (int k = 0; k < 100; ++k) {
    const ToyParams p{random_complex(rng), random_complex(rng)};
    const ActionParams ap{pos(rng), pos(rng), pos(rng)};
    const FieldPoint f{random_complex(rng), random_complex(rng), random_complex(rng)};
    const double vt = v_trace(p, ap, f);
    const double vc = v_closed(p, ap, f);
    CHECK(std::abs(vt - vc) <= 1e-10 * std::max(1.0, std::abs(vc)));
    const double vo = oracle::potential_from_spectrum(closed_dirac(p, f), ap.f2, ap.f0, ap.lambda);
    CHECK(std::abs(vo - vc) <= 1e-9 * std::max(1.0, std::abs(vc)));
  }
}

TEST_CASE("vev formulas", "[action]") {
  const ToyParams p{Complex(0.6, 0.8), Complex(1.5, 0.0)};
  const ActionParams ap{2.0, 0.5, 1.3};
  CHECK_THAT(vev_w(ToyParams{}, ActionParams{}), WithinRel(std::sqrt(2.0), 1e-15));
  CHECK_THAT(vev_w(p, ap), WithinRel(std::sqrt(2 * 2.0 * 1.69 / (0.5 * 2.25)), 1e-14));
  CHECK_THAT(global_x2(p, ap), WithinRel(2 * 2.0 * 1.69 / 0.5, 1e-14));
  CHECK_THROWS_AS(vev_w(ToyParams{1.0, 0.0}, ap), std::invalid_argument);
  CHECK_THROWS_AS(global_x2(ToyParams{0.0, 1.0}, ap), std::invalid_argument);
}

TEST_CASE("finite-difference derivatives", "[action]") {
  const ScalarFn q = [](const Eigen::VectorXd& c) { return c(0) * c(0) + 3.0 * c(1) * c(1); };
  const GradHess gh = grad_hess(q, Eigen::Vector2d(0.7, -1.2), 1e-3);
  CHECK_THAT(gh.gradient(0), WithinAbs(1.4, 1e-8));
  CHECK_THAT(gh.gradient(1), WithinAbs(-7.2, 1e-8));
  CHECK_THAT(gh.hessian(0, 0), WithinAbs(2.0, 1e-6));
  CHECK_THAT(gh.hessian(1, 1), WithinAbs(6.0, 1e-6));
  CHECK_THAT(gh.hessian(0, 1), WithinAbs(0.0, 1e-6));
  const GradHess fine = grad_hess(q, Eigen::Vector2d(0.7, -1.2));
  CHECK_THAT(fine.hessian(1, 1), WithinAbs(6.0, 1e-4));
  CHECK_THROWS_AS(grad_hess(q, Eigen::Vector2d(0, 0), 0.0), std::invalid_argument);
}

TEST_CASE("analytic derivatives of the toy objective", "[action]") {
  const ToyParams p{Complex(0.8, 0.3), Complex(1.1, -0.5)};
  const ActionParams ap{1.4, 0.7, 1.1};
  const Objective obj = toy_objective(p, ap);
  Rng rng(72);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd c = vec3(u(rng), u(rng), u(rng));
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    oracle::central_differences(obj.value, c, 1e-4, g, h);
    CHECK((obj.gradient(c) - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
    CHECK((obj.hessian(c) - h).norm() <= 1e-4 * std::max(1.0, h.norm()));
  }
}

TEST_CASE("hessian at the constrained critical point", "[action]") {
  const HessianCheck h = hessian_check(ToyParams{}, ActionParams{});
  CHECK(h.comparable);
  CHECK(h.passed);
  const double w = std::sqrt(2.0);
  CHECK_THAT(h.fd.hessian(0, 0), WithinRel(-2 * w * w / kPi2, 1e-4));
  CHECK_THAT(h.fd.hessian(1, 1), WithinRel(8 * w * w * w / kPi2, 1e-4));
  CHECK_THAT(h.fd.hessian(1, 1), WithinRel(2.2926367, 1e-6));
  CHECK(std::abs(h.fd.hessian(2, 2)) < 1e-6);
  CHECK((h.analytic - h.fd.hessian).norm() < 1e-5);

  // with |k_x| ≠ |k_y| the xx entry follows −4f₂Λ²|k_x|²/π², not the k_y-only expression
  const ToyParams q{2.0, 1.0};
  const HessianCheck hq = hessian_check(q, ActionParams{});
  CHECK_FALSE(hq.comparable);
  CHECK_THAT(hq.fd.hessian(0, 0), WithinRel(-16.0 / kPi2, 1e-5));
  CHECK(std::abs(hq.fd.hessian(0, 0) - hq.reference(0)) > 1.0);
  CHECK_THAT(hq.fd.hessian(1, 1), WithinRel(hq.reference(1), 1e-5));
}

TEST_CASE("hessian classification", "[action]") {
  CHECK(classify(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix()).kind == Classification::min);
  CHECK(classify(Eigen::Vector2d(-1, -2).asDiagonal().toDenseMatrix()).kind == Classification::max);
  CHECK(classify(Eigen::Vector2d(1, -2).asDiagonal().toDenseMatrix()).kind == Classification::saddle);
  const HessianClass d = classify(Eigen::Vector3d(1, 0, 2).asDiagonal().toDenseMatrix());
  CHECK(d.kind == Classification::degenerate);
  CHECK(d.degenerate_directions == 1);
  CHECK(classify(Eigen::Vector3d(1, 0, -2).asDiagonal().toDenseMatrix()).kind == Classification::saddle);
}

TEST_CASE("constrained minimization", "[action]") {
  const Objective obj = toy_objective(ToyParams{}, ActionParams{});
  const MinimizeResult r = minimize(obj, 16, 3, {0.0, std::nullopt, std::nullopt});
  REQUIRE_FALSE(r.points.empty());
  const CriticalPoint& best = r.points.front();
  const double v2 = std::pow(1 + best.point(1), 2) + best.point(2) * best.point(2);
  CHECK_THAT(v2, WithinAbs(std::sqrt(2.0), 1e-6));
  CHECK_THAT(best.value, WithinRel(-1.0 / kPi2, 1e-8));
  CHECK(best.point(0) == 0.0);
  CHECK(best.full_classification == Classification::saddle);

  const MinimizeResult line = minimize(obj, 16, 3, {0.0, std::nullopt, 0.0});
  bool found = false;
  for (const auto& cp : line.points) {
    if (std::abs(cp.point(1) - (std::pow(2.0, 0.25) - 1.0)) < 1e-7) {
      found = true;
      CHECK(cp.classification == Classification::min);
      CHECK_THAT(cp.value, WithinRel(-1.0 / kPi2, 1e-10));
    }
  }
  CHECK(found);
}

TEST_CASE("global minimization agrees with a brute-force scan", "[action]") {
  const ToyParams p{Complex(0.7, 0.0), Complex(1.3, 0.0)};
  const ActionParams ap{1.2, 0.8, 1.1};
  const MinimizeResult r = minimize(toy_objective(p, ap), 24, 5);
  REQUIRE_FALSE(r.points.empty());
  const CriticalPoint& best = r.points.front();
  CHECK_THAT(best.value, WithinRel(-4.0 * ap.f2 * ap.f2 * std::pow(ap.lambda, 4) / (ap.f0 * kPi2), 1e-8));
  CHECK_THAT(best.point(0) * best.point(0), WithinRel(global_x2(p, ap), 1e-7));

  // independent scan over real (x, |v|) using the spectrum of the closed operator
  const double hi = 1.2 * std::sqrt(global_x2(p, ap));
  double grid_min = 1e300;
  for (int i = 0; i <= 300; ++i) {
    for (int j = 0; j <= 300; ++j) {
      const double x = hi * i / 300.0, v = hi * j / 300.0;
      grid_min = std::min(grid_min, oracle::potential_from_spectrum(closed_dirac(p, FieldPoint{x, v, 0.0}), ap.f2, ap.f0, ap.lambda));
    }
  }
  CHECK(grid_min >= best.value - 1e-12);
  CHECK(grid_min - best.value < 1e-3 * std::abs(best.value));

  const BruteForceMin bf = brute_force_min(p, ap, 1.2 * global_x2(p, ap), 801);
  CHECK(bf.value >= best.value - 1e-12);
  CHECK(bf.v2 == 0.0);
}

TEST_CASE("minimizer input checks", "[action]") {
  const Objective obj = toy_objective(ToyParams{}, ActionParams{});
  CHECK_THROWS_AS(minimize(obj, 0, 1), std::invalid_argument);
  const MinimizeResult a = minimize(obj, 8, 11);
  const MinimizeResult b = minimize(obj, 8, 11);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k].point == b.points[k].point);
}

TEST_CASE("unbroken symmetry", "[action]") {
  const ToyParams p;
  const ActionParams ap;
  const FiniteSpectralTriple t = build_toy(p);
  const StabilizerChain s = stabilizer_chain(p, ap);
  CHECK(s.at_zero == 6);
  CHECK(s.at_sigma == 3);
  CHECK(s.at_sigma_x == 2);
  CHECK(oracle_stabilizer(t, zeros(8, 8)) == 6);
  CHECK(oracle_stabilizer(t, s.d_sigma) == 3);
  CHECK(oracle_stabilizer(t, s.d_sigma_x) == 2);
  CHECK(stabilizer_dim(t, 1e-6 * s.d_sigma, a_ev()) == 3);
  CHECK(stabilizer_dim(t, s.d_sigma, a_f()) == 3);

  const ToyParams q{Complex(0.3, 0.9), Complex(1.7, 0.4)};
  const StabilizerChain sq = stabilizer_chain(q, ActionParams{0.6, 1.9, 1.4});
  CHECK(sq.at_sigma == 3);
  CHECK(sq.at_sigma_x == 2);

  ComplexMatrix bad = s.d_sigma;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(stabilizer_dim(t, bad, a_ev()), std::invalid_argument);
}

TEST_CASE("gauge action on the vev", "[action]") {
  const FiniteSpectralTriple t = build_toy(ToyParams{});
  const ComplexMatrix d = stabilizer_chain(ToyParams{}, ActionParams{}).d_sigma;
  const Complex ph = std::polar(1.0, 0.7);
  const VevTransformReport stab =
      vev_transform_check(t, d, toy::element(ph, std::polar(1.0, 0.2), ph, 0.0, 0.0, std::polar(1.0, -1.3)));
  CHECK(stab.residual < 1e-12);
  CHECK(stab.formula_mismatch < 1e-12);

  const double th = 0.3;
  const VevTransformReport rot =
      vev_transform_check(t, d, toy::element(1.0, 1.0, std::cos(th), -std::sin(th), std::sin(th), std::cos(th)));
  CHECK(rot.residual > 0.1);
  CHECK(std::abs(rot.residual - rot.predicted_residual) < 1e-12);
  CHECK(rot.formula_mismatch < 1e-12);

  CHECK(vev_transform_check(t, d, t.algebra().unit()).residual == 0.0);
  CHECK_THROWS_AS(vev_transform_check(t, d, 2.0 * t.algebra().unit()), std::invalid_argument);
}

TEST_CASE("potential grids", "[action]") {
  const GridAxis a{-1.0, 1.0, 5}, b{0.0, 2.0, 3};
  const auto rows = scan_grid([](double x, double y) { return x + 10 * y; }, a, b);
  REQUIRE(rows.size() == 15);
  CHECK(rows[1].c2 == 1.0);
  CHECK(rows[3].c1 == -0.5);
  CHECK(rows[14].value == 21.0);
  CHECK_THROWS_AS(scan_grid([](double, double) { return 0.0; }, GridAxis{0, 1, 1}, b), std::invalid_argument);

  RunConfig c;
  const ScanOutput s = potential_scan(c);
  CHECK(s.fig1.size() == 201u * 201u);
  const auto best2 = std::min_element(s.fig2.begin(), s.fig2.end(), [](auto& x, auto& y) { return x.value < y.value; });
  CHECK_THAT(std::hypot(best2->c1, best2->c2), WithinAbs(1.0, 0.03));
}
