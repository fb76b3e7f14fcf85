#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fluctus/algebra.hpp"
#include "fluctus/matrix_core.hpp"
#include "fluctus/spectral_triple.hpp"

namespace fluctus {

/// (a, b) standing for a⊗b^op in A⊗A^op, or for a·δ(b) in Ω¹(A).
struct FormPair {
  AlgebraElement a;
  AlgebraElement b;
};

/// ω = Σ a_j δ(b_j). Equality is only meaningful through representations.
struct UniversalOneForm {
  std::vector<FormPair> pairs;
};

namespace detail {

inline AlgebraElement sum_of_products(const AlgebraSpec& spec, const std::vector<FormPair>& pairs) {
  AlgebraElement s = spec.zero();
  for (const auto& p : pairs) s = s + p.a * p.b;
  return s;
}

/// Σ‖a_j‖‖b_j‖, the natural magnitude against which rounding in pair sums is measured.
inline double pair_scale(const std::vector<FormPair>& pairs) {
  double s = 0.0;
  for (const auto& p : pairs) s += frob_norm(p.a) * frob_norm(p.b);
  return std::max(1.0, s);
}

inline void require_spec(const AlgebraSpec& spec, const std::vector<FormPair>& pairs, const char* op) {
  for (const auto& p : pairs) {
    if (!spec.matches(p.a) || !spec.matches(p.b)) {
      throw ShapeError(std::string(op) + ": pair does not match the algebra");
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Universal one-forms

/// ω* = Σ b_j* δ(a_j*) − δ(Σ b_j* a_j*), using δ(x)* = −δ(x*) and the Leibniz rule.
inline UniversalOneForm adjoint_form(const AlgebraSpec& spec, const UniversalOneForm& w) {
  UniversalOneForm out;
  AlgebraElement s = spec.zero();
  for (const auto& p : w.pairs) {
    out.pairs.push_back({adjoint(p.b), adjoint(p.a)});
    s = s + adjoint(p.b) * adjoint(p.a);
  }
  out.pairs.push_back({-1.0 * spec.unit(), s});
  return out;
}

/// ½(ω + ω*).
inline UniversalOneForm self_adjoint_part(const AlgebraSpec& spec, const UniversalOneForm& w) {
  UniversalOneForm out;
  for (const auto& p : w.pairs) out.pairs.push_back({0.5 * p.a, p.b});
  for (const auto& p : adjoint_form(spec, w).pairs) out.pairs.push_back({0.5 * p.a, p.b});
  return out;
}

/// Prepends (1 − Σ x_i y_i, 1); δ(1) = 0 so the one-form is unchanged while Σ a_j b_j = 1.
inline UniversalOneForm normalize(const AlgebraSpec& spec, const UniversalOneForm& w) {
  UniversalOneForm out;
  out.pairs.push_back({spec.unit() - detail::sum_of_products(spec, w.pairs), spec.unit()});
  out.pairs.insert(out.pairs.end(), w.pairs.begin(), w.pairs.end());
  return out;
}

/// γ_u(ω) = u δ(u*) + u ω u*, as the pair list (u(1 − Σ a_j b_j), u*), (u a_j, b_j u*).
inline UniversalOneForm gauge_one_form(const AlgebraSpec& spec, const UniversalOneForm& w,
                                       const AlgebraElement& u) {
  const AlgebraElement us = adjoint(u);
  UniversalOneForm out;
  out.pairs.push_back({u * (spec.unit() - detail::sum_of_products(spec, w.pairs)), us});
  for (const auto& p : w.pairs) out.pairs.push_back({u * p.a, p.b * us});
  return out;
}

/// Σ π(a_j)[T, π(b_j)], the one-form represented with the derivation [T, ·].
inline ComplexMatrix represent_form(const FiniteSpectralTriple& t, const ComplexMatrix& op,
                                    const UniversalOneForm& w) {
  ComplexMatrix out = zeros(t.dim_h(), t.dim_h());
  for (const auto& p : w.pairs) out += t.represent(p.a) * commutator(op, t.represent(p.b));
  return out;
}

/// Σ â_j [T, b̂_j] with x̂ = J π(x) J⁻¹.
inline ComplexMatrix represent_form_hat(const FiniteSpectralTriple& t, const ComplexMatrix& op,
                                        const UniversalOneForm& w) {
  ComplexMatrix out = zeros(t.dim_h(), t.dim_h());
  for (const auto& p : w.pairs) {
    out += t.hat(t.represent(p.a)) * commutator(op, t.hat(t.represent(p.b)));
  }
  return out;
}

/// A₍₁₎ = Σ a_j [D, b_j].
inline ComplexMatrix a1(const FiniteSpectralTriple& t, const UniversalOneForm& w) {
  return represent_form(t, t.d(), w);
}

/// Σ â_j [X, b̂_j] for a supplied X in place of A₍₁₎.
inline ComplexMatrix a2_from(const FiniteSpectralTriple& t, const UniversalOneForm& w, const ComplexMatrix& a1_op) {
  return represent_form_hat(t, a1_op, w);
}

/// A₍₂₎ = Σ â_j [A₍₁₎, b̂_j]; vanishes when the first-order condition holds.
inline ComplexMatrix a2(const FiniteSpectralTriple& t, const UniversalOneForm& w) {
  return a2_from(t, w, a1(t, w));
}

class FluctuationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// D' = D + A₍₁₎ + ε J A₍₁₎ J⁻¹ + A₍₂₎ with ε = eps_D.
inline ComplexMatrix fluctuate(const FiniteSpectralTriple& t, const UniversalOneForm& w,
                               double tol = kDefaultTol) {
  const ComplexMatrix first = a1(t, w);
  if (hermitian_residual(first) > tol * std::max(1.0, first.norm())) {
    throw FluctuationError("fluctuate: represented one-form is not self-adjoint");
  }
  return t.d() + first + static_cast<double>(t.signs().eps_D) * t.hat(first) + a2_from(t, w, first);
}

// ---------------------------------------------------------------------------
// A⊗A^op and the semigroup Pert(A)

/// Faithful matrix image of Σ a_j ⊗ b_j^op: block-diagonal over summand pairs (i,k) with block
/// Σ_j kron(a_j[i], b_j[k]ᵗ). The transpose absorbs the order reversal of A^op.
inline ComplexMatrix canonical_form(const AlgebraSpec& spec, const std::vector<FormPair>& pairs) {
  detail::require_spec(spec, pairs, "canonical_form");
  Eigen::Index dim = 0;
  for (int ni : spec.sizes()) {
    for (int nk : spec.sizes()) dim += static_cast<Eigen::Index>(ni) * nk;
  }
  ComplexMatrix out = zeros(dim, dim);
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < spec.summand_count(); ++i) {
    for (std::size_t k = 0; k < spec.summand_count(); ++k) {
      const Eigen::Index w = static_cast<Eigen::Index>(spec.sizes()[i]) * spec.sizes()[k];
      for (const auto& p : pairs) out.block(off, off, w, w) += kron(p.a.blocks[i], p.b.blocks[k].transpose());
      off += w;
    }
  }
  return out;
}

/// Σ a_j ⊗ b_j^op ↦ Σ b_j* ⊗ a_j*^op. Self-adjoint elements are its fixed points.
inline std::vector<FormPair> swap_star(const std::vector<FormPair>& pairs) {
  std::vector<FormPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({adjoint(p.b), adjoint(p.a)});
  return out;
}

inline double normalization_residual(const AlgebraSpec& spec, const std::vector<FormPair>& pairs) {
  return frob_norm(detail::sum_of_products(spec, pairs) - spec.unit()) / detail::pair_scale(pairs);
}

inline double self_adjoint_residual(const AlgebraSpec& spec, const std::vector<FormPair>& pairs) {
  return (canonical_form(spec, pairs) - canonical_form(spec, swap_star(pairs))).norm() /
         detail::pair_scale(pairs);
}

class PertError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Normalized (Σ a_j b_j = 1) self-adjoint element of A⊗A^op.
class PertElement {
 public:
  static PertElement make(AlgebraSpec spec, std::vector<FormPair> pairs, double tol = kDefaultTol) {
    if (pairs.empty()) throw PertError("PertElement: empty pair list");
    detail::require_spec(spec, pairs, "PertElement");
    if (normalization_residual(spec, pairs) > tol) throw PertError("PertElement: not normalized (sum a_j b_j != 1)");
    if (self_adjoint_residual(spec, pairs) > tol) throw PertError("PertElement: not self-adjoint");
    return PertElement(std::move(spec), std::move(pairs));
  }

  static PertElement unit(AlgebraSpec spec) {
    std::vector<FormPair> pairs{{spec.unit(), spec.unit()}};
    return PertElement(std::move(spec), std::move(pairs));
  }

  const AlgebraSpec& spec() const { return spec_; }
  const std::vector<FormPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

 private:
  PertElement(AlgebraSpec spec, std::vector<FormPair> pairs) : spec_(std::move(spec)), pairs_(std::move(pairs)) {}

  AlgebraSpec spec_;
  std::vector<FormPair> pairs_;
};

inline ComplexMatrix canonical_form(const PertElement& p) { return canonical_form(p.spec(), p.pairs()); }

inline bool pert_equal(const PertElement& x, const PertElement& y, double tol = kDefaultTol) {
  return approx_eq(canonical_form(x), canonical_form(y), tol);
}

/// (Σ x_s⊗y_s^op)(Σ a_i⊗b_i^op) = Σ x_s a_i ⊗ (b_i y_s)^op.
inline PertElement pert_mul(const PertElement& x, const PertElement& y, double tol = kDefaultTol) {
  if (!x.spec().same_shape(y.spec())) throw PertError("pert_mul: incompatible algebras");
  std::vector<FormPair> pairs;
  pairs.reserve(x.size() * y.size());
  for (const auto& xs : x.pairs()) {
    for (const auto& ai : y.pairs()) pairs.push_back({xs.a * ai.a, ai.b * xs.b});
  }
  return PertElement::make(x.spec(), std::move(pairs), tol);
}

/// u ↦ u⊗(u*)^op.
inline PertElement from_unitary(const AlgebraSpec& spec, const AlgebraElement& u, double tol = kDefaultTol) {
  if (!spec.matches(u) || !spec.contains(u, tol)) throw PertError("from_unitary: element is not in the algebra");
  if (!is_unitary(u, tol)) throw PertError("from_unitary: element is not unitary");
  return PertElement::make(spec, {{u, adjoint(u)}}, tol);
}

/// η(Σ a_j⊗b_j^op) = Σ a_j δ(b_j).
inline UniversalOneForm eta_one_form(const PertElement& p) { return UniversalOneForm{p.pairs()}; }

/// Left multiplication by u⊗(u*)^op; η intertwines it with γ_u.
inline PertElement gauge_transform(const PertElement& p, const AlgebraElement& u, double tol = kDefaultTol) {
  return pert_mul(from_unitary(p.spec(), u, tol), p, tol);
}

/// alpha·p + (1−alpha)·q. Affine (not only convex) combinations stay in Pert(A).
inline PertElement affine_combine(const PertElement& p, const PertElement& q, double alpha, double tol = kDefaultTol) {
  if (!p.spec().same_shape(q.spec())) throw PertError("affine_combine: incompatible algebras");
  std::vector<FormPair> pairs;
  for (const auto& x : p.pairs()) pairs.push_back({alpha * x.a, x.b});
  for (const auto& x : q.pairs()) pairs.push_back({(1.0 - alpha) * x.a, x.b});
  return PertElement::make(p.spec(), std::move(pairs), tol);
}

/// Drops pairs whose canonical-form contribution ‖a‖‖b‖ is below `threshold`.
inline PertElement compact(const PertElement& p, double threshold = 1e-14, double tol = kDefaultTol) {
  std::vector<FormPair> kept;
  for (const auto& x : p.pairs()) {
    if (frob_norm(x.a) * frob_norm(x.b) >= threshold) kept.push_back(x);
  }
  if (kept.empty()) kept.push_back({p.spec().zero(), p.spec().zero()});
  return PertElement::make(p.spec(), std::move(kept), tol);
}

/// Whether the canonical form is invertible in A⊗A^op (necessary for a semigroup inverse).
inline bool canonical_form_invertible(const PertElement& p, double tol = kDefaultTol) {
  const ComplexMatrix c = canonical_form(p);
  Eigen::JacobiSVD<ComplexMatrix> svd(c);
  const auto& s = svd.singularValues();
  return s.size() > 0 && s(s.size() - 1) > tol * std::max(1.0, s(0));
}

/// q is a two-sided inverse of p inside Pert(A). `q` has already passed PertElement validation.
inline bool is_inverse(const PertElement& p, const PertElement& q, double tol = kDefaultTol) {
  const PertElement one = PertElement::unit(p.spec());
  return pert_equal(pert_mul(p, q, tol), one, tol) && pert_equal(pert_mul(q, p, tol), one, tol);
}

// ---------------------------------------------------------------------------
// Action on operators and the homomorphism μ: Pert(A) → Pert(A⊗Â)

struct OperatorPair {
  ComplexMatrix a;
  ComplexMatrix b;
};

/// Element of B⊗B^op with B ⊂ End(H), stored as operator pairs.
struct RepresentedPert {
  std::vector<OperatorPair> pairs;
};

/// Σ kron(a_j, b_jᵗ): the action T ↦ Σ a_j T b_j on row-major vec(T).
inline ComplexMatrix canonical_form(const RepresentedPert& r) {
  if (r.pairs.empty()) throw PertError("canonical_form: empty operator pair list");
  const Eigen::Index n = r.pairs.front().a.rows();
  ComplexMatrix out = zeros(n * n, n * n);
  for (const auto& p : r.pairs) out += kron(p.a, p.b.transpose());
  return out;
}

inline RepresentedPert operator*(const RepresentedPert& x, const RepresentedPert& y) {
  RepresentedPert out;
  out.pairs.reserve(x.pairs.size() * y.pairs.size());
  for (const auto& xs : x.pairs) {
    for (const auto& ai : y.pairs) out.pairs.push_back({xs.a * ai.a, ai.b * xs.b});
  }
  return out;
}

/// T ↦ Σ a_j T b_j.
inline ComplexMatrix apply(const RepresentedPert& r, const ComplexMatrix& t) {
  ComplexMatrix out = zeros(t.rows(), t.cols());
  for (const auto& p : r.pairs) out += p.a * t * p.b;
  return out;
}

inline double normalization_residual(const RepresentedPert& r) {
  if (r.pairs.empty()) return 1.0;
  const Eigen::Index n = r.pairs.front().a.rows();
  ComplexMatrix s = zeros(n, n);
  double scale = 0.0;
  for (const auto& p : r.pairs) {
    s += p.a * p.b;
    scale += p.a.norm() * p.b.norm();
  }
  return (s - identity(n)).norm() / std::max(1.0, scale);
}

/// μ(A) = A⊗Â represented on H: pairs (π(a_i)·â_j, π(b_i)·b̂_j), index-major in (i, j).
inline RepresentedPert mu(const PertElement& p, const FiniteSpectralTriple& t) {
  if (!p.spec().same_shape(t.algebra())) throw PertError("mu: algebra mismatch");
  std::vector<ComplexMatrix> pa, pb, ha, hb;
  for (const auto& x : p.pairs()) {
    pa.push_back(t.represent(x.a));
    pb.push_back(t.represent(x.b));
    ha.push_back(t.hat(pa.back()));
    hb.push_back(t.hat(pb.back()));
  }
  RepresentedPert out;
  out.pairs.reserve(pa.size() * pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pa.size(); ++j) out.pairs.push_back({pa[i] * ha[j], pb[i] * hb[j]});
  }
  return out;
}

/// T + Σ a_{ij}[T, b_{ij}] over the μ(p) pairs.
inline ComplexMatrix fluctuate_operator(const FiniteSpectralTriple& t, const ComplexMatrix& op, const PertElement& p) {
  ComplexMatrix out = op;
  for (const auto& x : mu(p, t).pairs) out += x.a * commutator(op, x.b);
  return out;
}

/// D' = D + Σ a_i â_j [D, b_i b̂_j].
inline ComplexMatrix fluctuate_combined(const FiniteSpectralTriple& t, const PertElement& p) {
  return fluctuate_operator(t, t.d(), p);
}

/// ‖(D(η(p)))(η(q)) − D(η(q·p))‖_F.
inline double check_transitivity(const FiniteSpectralTriple& t, const PertElement& p, const PertElement& q,
                                 double tol = kDefaultTol) {
  const ComplexMatrix twice = fluctuate_operator(t, fluctuate_combined(t, p), q);
  const ComplexMatrix once = fluctuate_combined(t, pert_mul(q, p, tol));
  return (twice - once).norm();
}

/// A₍₂₎ of γ_u(ω) rebuilt from ω: û·(Σ â_j [A₍₁₎', b̂_j])·û* + û[A₍₁₎', û*], with A₍₁₎' the
/// gauge-transformed A₍₁₎ = uA₍₁₎u* + u[D, u*].
inline ComplexMatrix a2_gauge_prediction(const FiniteSpectralTriple& t, const UniversalOneForm& w,
                                         const AlgebraElement& u) {
  const ComplexMatrix pu = t.represent(u);
  const ComplexMatrix hu = t.hat(pu);
  const ComplexMatrix a1p = pu * a1(t, w) * pu.adjoint() + pu * commutator(t.d(), pu.adjoint());
  return hu * a2_from(t, w, a1p) * hu.adjoint() + hu * commutator(a1p, hu.adjoint());
}

/// U = π(u)·Ĵπ(u)J⁻¹, the unitary implementing a gauge transformation on H.
inline ComplexMatrix gauge_unitary(const FiniteSpectralTriple& t, const AlgebraElement& u) {
  const ComplexMatrix pu = t.represent(u);
  return pu * t.hat(pu);
}

}  // namespace fluctus
