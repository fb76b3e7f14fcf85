#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fluctus/algebra.hpp"
#include "fluctus/matrix_core.hpp"
#include "fluctus/perturbation.hpp"
#include "fluctus/spectral_triple.hpp"

namespace fluctus {

// Basis of H (dim 8): unprimed (α, I) = (1,1), (1,2), (2,1), (2,2) at 0..3, then the primed
// sector in the same order at 4..7. A = M₂(C) ⊕ M₂(C) acts by (n, m) ↦ diag(n ⊗ 1, 1 ⊗ m).

struct ToyParams {
  Complex k_x{1.0, 0.0};
  Complex k_y{1.0, 0.0};
};

/// Total fields: x = 1 + φ and v = (1 + σ₁, σ₂).
struct FieldPoint {
  Complex x{1.0, 0.0};
  Complex v1{1.0, 0.0};
  Complex v2{0.0, 0.0};
};

namespace toy {

inline constexpr int kDimH = 8;
inline constexpr int kPrimed = 4;

inline AlgebraSpec full_algebra() { return AlgebraSpec({2, 2}, "A"); }

/// (λ_R, λ_L, m) with n = diag(λ_R, λ_L).
inline AlgebraElement element(Complex lambda_r, Complex lambda_l, const ComplexMatrix& m) {
  ComplexMatrix n = zeros(2, 2);
  n(0, 0) = lambda_r;
  n(1, 1) = lambda_l;
  return AlgebraElement{{n, m}};
}

inline AlgebraElement element(Complex lambda_r, Complex lambda_l, Complex m11, Complex m12, Complex m21,
                              Complex m22) {
  ComplexMatrix m(2, 2);
  m << m11, m12, m21, m22;
  return element(lambda_r, lambda_l, m);
}

inline ComplexMatrix x_block(Complex k) {
  ComplexMatrix kk = zeros(2, 2);
  kk(0, 1) = k;
  kk(1, 0) = std::conj(k);
  return kron(kk, identity(2));
}

/// The y-block of D, rows 4..5 (primed α'=1) against columns 0..1 (unprimed α=1).
inline ComplexMatrix y_block(const ComplexMatrix& d) { return d.block(kPrimed, 0, 2, 2); }

inline ComplexMatrix real_structure_matrix() {
  ComplexMatrix s = zeros(kDimH, kDimH);
  s.block(0, kPrimed, 4, 4) = identity(4);
  s.block(kPrimed, 0, 4, 4) = identity(4);
  return s;
}

inline ComplexMatrix grading() {
  Eigen::VectorXcd g(kDimH);
  g << 1, 1, -1, -1, -1, -1, 1, 1;
  return g.asDiagonal();
}

inline std::vector<RepBlock> rep_blocks() {
  return {RepBlock{0, 1, 2, RepMode::plain, 0}, RepBlock{1, 2, 1, RepMode::plain, kPrimed}};
}

}  // namespace toy

/// The three-field Dirac operator: k_x·x in the x-blocks and k_y·v·vᵗ in the y-block.
inline ComplexMatrix closed_dirac(const ToyParams& p, const FieldPoint& f) {
  ComplexMatrix d = zeros(toy::kDimH, toy::kDimH);
  const ComplexMatrix xb = toy::x_block(p.k_x * f.x);
  d.block(0, 0, 4, 4) = xb;
  d.block(toy::kPrimed, toy::kPrimed, 4, 4) = xb.conjugate();
  const Complex v[2] = {f.v1, f.v2};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      d(toy::kPrimed + i, j) = p.k_y * v[i] * v[j];
      d(j, toy::kPrimed + i) = std::conj(p.k_y * v[i] * v[j]);
    }
  }
  return d;
}

inline AlgebraSpec a_ev();

/// The even triple over A_ev; the full M₂(C) ⊕ M₂(C) does not commute with γ.
inline FiniteSpectralTriple build_toy(const ToyParams& p) {
  return FiniteSpectralTriple(a_ev(), toy::kDimH, toy::rep_blocks(), closed_dirac(p, FieldPoint{}),
                              AntilinearOp(toy::real_structure_matrix()), toy::grading(), KOSigns{1, 1, -1});
}

inline AlgebraSpec a_ev() {
  std::vector<AlgebraElement> basis;
  basis.push_back(toy::element(1, 0, zeros(2, 2)));
  basis.push_back(toy::element(0, 1, zeros(2, 2)));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) basis.push_back(toy::element(0, 0, matrix_unit(2, i, j)));
  }
  return AlgebraSpec({2, 2}, std::move(basis), "A_ev");
}

/// (λ_R, λ_L, diag(λ_R, μ)).
inline AlgebraSpec a_f() {
  std::vector<AlgebraElement> basis;
  basis.push_back(toy::element(1, 0, matrix_unit(2, 0, 0)));
  basis.push_back(toy::element(0, 1, zeros(2, 2)));
  basis.push_back(toy::element(0, 0, matrix_unit(2, 1, 1)));
  return AlgebraSpec({2, 2}, std::move(basis), "A_F");
}

/// φ = Σ λ'_R(λ_L − λ_R), σ_I = Σ (m'_{I1} λ_R − (m'm)_{I1}) for pairs a = (λ'_R, λ'_L, m'), b = (λ_R, λ_L, m).
inline FieldPoint extract_fields(const UniversalOneForm& w, double tol = kDefaultTol) {
  static const AlgebraSpec ev = a_ev();
  Complex phi = 0.0;
  Complex sigma[2] = {0.0, 0.0};
  for (const auto& pr : w.pairs) {
    if (!ev.matches(pr.a) || !ev.matches(pr.b) || !ev.contains(pr.a, tol) || !ev.contains(pr.b, tol)) {
      throw std::invalid_argument("extract_fields: one-form element lies outside A_ev");
    }
    const Complex lr_a = pr.a.blocks[0](0, 0);
    const Complex lr = pr.b.blocks[0](0, 0);
    const Complex ll = pr.b.blocks[0](1, 1);
    const ComplexMatrix& ma = pr.a.blocks[1];
    const ComplexMatrix mm = ma * pr.b.blocks[1];
    phi += lr_a * (ll - lr);
    for (int i = 0; i < 2; ++i) sigma[i] += ma(i, 0) * lr - mm(i, 0);
  }
  return FieldPoint{1.0 + phi, 1.0 + sigma[0], sigma[1]};
}

}  // namespace fluctus
