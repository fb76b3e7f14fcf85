#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fluctus/algebra.hpp"
#include "fluctus/matrix_core.hpp"

namespace fluctus {

/// How a summand block acts inside its slot of H.
enum class RepMode { plain, transpose, conjugate, conjugate_transpose };

/// One summand acting as 1_left ⊗ mode(a_i) ⊗ 1_right on the slot [offset, offset + left·n_i·right).
struct RepBlock {
  std::size_t summand_index = 0;
  int left_mult_dim = 1;
  int right_mult_dim = 1;
  RepMode mode = RepMode::plain;
  int offset = 0;
};

/// Signs of J² = ε_J, JD = ε_D·DJ, Jγ = ε_γ·γJ.
struct KOSigns {
  int eps_J = 1;
  int eps_D = 1;
  int eps_gamma = 1;
};

class FiniteSpectralTriple {
 public:
  FiniteSpectralTriple(AlgebraSpec algebra, int dim_h, std::vector<RepBlock> rep, ComplexMatrix d,
                       AntilinearOp j, ComplexMatrix gamma, KOSigns signs,
                       double tol = kDefaultTol)
      : algebra_(std::move(algebra)),
        dim_h_(dim_h),
        rep_(std::move(rep)),
        d_(std::move(d)),
        j_(std::move(j)),
        gamma_(std::move(gamma)),
        signs_(signs) {
    validate(tol);
  }

  const AlgebraSpec& algebra() const { return algebra_; }
  int dim_h() const { return dim_h_; }
  const std::vector<RepBlock>& rep() const { return rep_; }
  const ComplexMatrix& d() const { return d_; }
  const AntilinearOp& j() const { return j_; }
  const ComplexMatrix& gamma() const { return gamma_; }
  const KOSigns& signs() const { return signs_; }

  /// π(a), assembled from the rep blocks.
  ComplexMatrix represent(const AlgebraElement& a) const {
    if (!algebra_.matches(a)) throw ShapeError("represent: element does not match the algebra");
    ComplexMatrix out = zeros(dim_h_, dim_h_);
    for (const auto& blk : rep_) {
      const ComplexMatrix& x = a.blocks[blk.summand_index];
      ComplexMatrix op;
      switch (blk.mode) {
        case RepMode::plain: op = x; break;
        case RepMode::transpose: op = x.transpose(); break;
        case RepMode::conjugate: op = x.conjugate(); break;
        case RepMode::conjugate_transpose: op = x.adjoint(); break;
      }
      const ComplexMatrix placed = kron(identity(blk.left_mult_dim), kron(op, identity(blk.right_mult_dim)));
      out.block(blk.offset, blk.offset, placed.rows(), placed.cols()) = placed;
    }
    return out;
  }

  /// T̂ = J T J⁻¹.
  ComplexMatrix hat(const ComplexMatrix& t) const { return conj_by_antilinear(j_, t); }

  /// π°(a) = J π(a)* J⁻¹.
  ComplexMatrix represent_opposite(const AlgebraElement& a) const {
    return hat(represent(a).adjoint());
  }

  /// Same data with a different Dirac operator (still validated).
  FiniteSpectralTriple with_dirac(ComplexMatrix d) const {
    return FiniteSpectralTriple(algebra_, dim_h_, rep_, std::move(d), j_, gamma_, signs_);
  }

  FiniteSpectralTriple with_signs(KOSigns signs) const {
    return FiniteSpectralTriple(algebra_, dim_h_, rep_, d_, j_, gamma_, signs);
  }

 private:
  void validate(double tol) const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("FiniteSpectralTriple: " + msg); };
    if (dim_h_ < 1) fail("dim_H must be positive");
    if (d_.rows() != dim_h_ || d_.cols() != dim_h_) fail("D must be dim_H x dim_H");
    if (gamma_.rows() != dim_h_ || gamma_.cols() != dim_h_) fail("gamma must be dim_H x dim_H");
    if (j_.dim() != dim_h_) fail("J must act on H");
    for (int e : {signs_.eps_J, signs_.eps_D, signs_.eps_gamma}) {
      if (e != 1 && e != -1) fail("KO signs must be +1 or -1");
    }

    std::vector<std::pair<int, int>> slots;
    for (const auto& blk : rep_) {
      if (blk.summand_index >= algebra_.summand_count()) fail("rep block refers to a missing summand");
      if (blk.left_mult_dim < 1 || blk.right_mult_dim < 1) fail("rep block multiplicities must be >= 1");
      const int width = blk.left_mult_dim * algebra_.sizes()[blk.summand_index] * blk.right_mult_dim;
      slots.emplace_back(blk.offset, blk.offset + width);
    }
    std::sort(slots.begin(), slots.end());
    int cursor = 0;
    for (const auto& [lo, hi] : slots) {
      if (lo != cursor) fail("rep blocks must tile H without gaps or overlap");
      cursor = hi;
    }
    if (cursor != dim_h_) fail("rep blocks must cover H exactly");

    const double scale_d = std::max(1.0, d_.norm());
    if (hermitian_residual(d_) > tol * scale_d) fail("D is not self-adjoint");
    if (hermitian_residual(gamma_) > tol * std::max(1.0, gamma_.norm())) fail("gamma is not self-adjoint");
    if (!approx_eq(gamma_ * gamma_, identity(dim_h_), tol)) fail("gamma^2 != 1");
    if ((gamma_ * d_ + d_ * gamma_).norm() > tol * scale_d) fail("gamma does not anticommute with D");
    for (const auto& a : spanning_set(algebra_)) {
      const ComplexMatrix pa = represent(a);
      if (commutator(gamma_, pa).norm() > tol * std::max(1.0, pa.norm())) fail("gamma does not commute with the algebra");
    }
    const ComplexMatrix jj = j_.compose(j_);
    if (!approx_eq(jj, static_cast<double>(signs_.eps_J) * identity(dim_h_), tol)) {
      fail("J^2 != eps_J");
    }
  }

  AlgebraSpec algebra_;
  int dim_h_;
  std::vector<RepBlock> rep_;
  ComplexMatrix d_;
  AntilinearOp j_;
  ComplexMatrix gamma_;
  KOSigns signs_;
};

inline ComplexMatrix represent(const FiniteSpectralTriple& t, const AlgebraElement& a) {
  return t.represent(a);
}

inline ComplexMatrix represent_opposite(const FiniteSpectralTriple& t, const AlgebraElement& a) {
  return t.represent_opposite(a);
}

struct AxiomReport {
  double max_defect = 0.0;
  std::size_t worst_a = 0;  ///< index into the spanning set
  std::size_t worst_b = 0;
  double tol = kDefaultTol;
  bool passed = true;
};

namespace detail {

template <typename PairDefect>
AxiomReport max_over_pairs(std::size_t na, std::size_t nb, double tol, PairDefect&& defect) {
  AxiomReport rep;
  rep.tol = tol;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t k = 0; k < nb; ++k) {
      const double v = defect(i, k);
      if (v > rep.max_defect) {  // strict: lowest index wins ties
        rep.max_defect = v;
        rep.worst_a = i;
        rep.worst_b = k;
      }
    }
  }
  rep.passed = rep.max_defect <= tol;
  return rep;
}

inline const AlgebraSpec& pick_algebra(const FiniteSpectralTriple& t, const std::optional<AlgebraSpec>& sub) {
  if (!sub) return t.algebra();
  if (!sub->same_shape(t.algebra())) throw std::invalid_argument("subalgebra summand sizes differ from the triple's algebra");
  return *sub;
}

}  // namespace detail

/// max ‖[π(a), π°(b)]‖_F over spanning pairs. `over` may name any algebra with the same summand
/// sizes (e.g. the full algebra behind a constrained one) since the representation is defined on it.
inline AxiomReport check_zeroth_order(const FiniteSpectralTriple& t,
                                      const std::optional<AlgebraSpec>& over = std::nullopt,
                                      double tol = kDefaultTol) {
  const auto span = spanning_set(detail::pick_algebra(t, over));
  std::vector<ComplexMatrix> left, right;
  for (const auto& a : span) {
    left.push_back(t.represent(a));
    right.push_back(t.represent_opposite(a));
  }
  return detail::max_over_pairs(span.size(), span.size(), tol, [&](std::size_t i, std::size_t k) {
    return commutator(left[i], right[k]).norm();
  });
}

/// max ‖[[D, π(a)], π°(b)]‖_F over spanning pairs of `sub` (or the triple's algebra).
inline AxiomReport check_first_order(const FiniteSpectralTriple& t,
                                     const std::optional<AlgebraSpec>& sub = std::nullopt,
                                     double tol = kDefaultTol) {
  if (sub && !t.algebra().contains(*sub, tol)) {
    throw std::invalid_argument("check_first_order: subalgebra '" + sub->name() + "' is not contained in the algebra");
  }
  const auto span = spanning_set(detail::pick_algebra(t, sub));
  std::vector<ComplexMatrix> da, right;
  for (const auto& a : span) {
    da.push_back(commutator(t.d(), t.represent(a)));
    right.push_back(t.represent_opposite(a));
  }
  return detail::max_over_pairs(span.size(), span.size(), tol, [&](std::size_t i, std::size_t k) {
    return commutator(da[i], right[k]).norm();
  });
}

/// The first-order defect [[D, π(a)], π°(b)] for one pair.
inline ComplexMatrix first_order_defect(const FiniteSpectralTriple& t, const AlgebraElement& a,
                                        const AlgebraElement& b) {
  return commutator(commutator(t.d(), t.represent(a)), t.represent_opposite(b));
}

struct KOReport {
  double j_squared = 0.0;  ///< ‖m·conj(m) − ε_J‖
  double j_d = 0.0;        ///< ‖JD − ε_D·DJ‖ (matrix parts)
  double j_gamma = 0.0;    ///< ‖Jγ − ε_γ·γJ‖ (matrix parts)
  double tol = kDefaultTol;
  bool passed = true;
};

inline KOReport check_ko_signs(const FiniteSpectralTriple& t, double tol = kDefaultTol) {
  const ComplexMatrix& m = t.j().matrix();
  const KOSigns& s = t.signs();
  KOReport rep;
  rep.tol = tol;
  rep.j_squared = (m * m.conjugate() - static_cast<double>(s.eps_J) * identity(t.dim_h())).norm();
  rep.j_d = (m * t.d().conjugate() - static_cast<double>(s.eps_D) * t.d() * m).norm();
  rep.j_gamma = (m * t.gamma().conjugate() - static_cast<double>(s.eps_gamma) * t.gamma() * m).norm();
  rep.passed = rep.j_squared <= tol && rep.j_d <= tol * std::max(1.0, t.d().norm()) && rep.j_gamma <= tol;
  return rep;
}

}  // namespace fluctus
