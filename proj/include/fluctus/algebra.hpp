#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fluctus/matrix_core.hpp"

namespace fluctus {

/// Element of a direct sum ⊕ M_{n_i}(C): one square block per summand.
struct AlgebraElement {
  std::vector<ComplexMatrix> blocks;

  std::size_t summands() const { return blocks.size(); }
};

namespace detail {

inline void require_compatible(const AlgebraElement& a, const AlgebraElement& b, const char* op) {
  if (a.blocks.size() != b.blocks.size()) {
    throw ShapeError(std::string(op) + ": summand count mismatch");
  }
  for (std::size_t i = 0; i < a.blocks.size(); ++i) require_same_shape(a.blocks[i], b.blocks[i], op);
}

}  // namespace detail

inline AlgebraElement operator+(const AlgebraElement& a, const AlgebraElement& b) {
  detail::require_compatible(a, b, "AlgebraElement +");
  AlgebraElement out = a;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) out.blocks[i] += b.blocks[i];
  return out;
}

inline AlgebraElement operator-(const AlgebraElement& a, const AlgebraElement& b) {
  detail::require_compatible(a, b, "AlgebraElement -");
  AlgebraElement out = a;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) out.blocks[i] -= b.blocks[i];
  return out;
}

inline AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  detail::require_compatible(a, b, "AlgebraElement *");
  AlgebraElement out;
  out.blocks.reserve(a.blocks.size());
  for (std::size_t i = 0; i < a.blocks.size(); ++i) out.blocks.push_back(a.blocks[i] * b.blocks[i]);
  return out;
}

inline AlgebraElement operator*(Complex s, const AlgebraElement& a) {
  AlgebraElement out = a;
  for (auto& blk : out.blocks) blk *= s;
  return out;
}

inline AlgebraElement adjoint(const AlgebraElement& a) {
  AlgebraElement out;
  out.blocks.reserve(a.blocks.size());
  for (const auto& blk : a.blocks) out.blocks.push_back(blk.adjoint());
  return out;
}

inline double frob_norm(const AlgebraElement& a) {
  double s = 0.0;
  for (const auto& blk : a.blocks) s += blk.squaredNorm();
  return std::sqrt(s);
}

inline bool approx_eq(const AlgebraElement& a, const AlgebraElement& b, double tol = kDefaultTol) {
  detail::require_compatible(a, b, "approx_eq");
  const double scale = std::max({1.0, frob_norm(a), frob_norm(b)});
  return frob_norm(a - b) <= tol * scale;
}

/// Flattened coordinates (block-major, then column-major inside each block).
inline ComplexVector vectorize(const AlgebraElement& a) {
  Eigen::Index n = 0;
  for (const auto& blk : a.blocks) n += blk.size();
  ComplexVector v(n);
  Eigen::Index off = 0;
  for (const auto& blk : a.blocks) {
    v.segment(off, blk.size()) = blk.reshaped();
    off += blk.size();
  }
  return v;
}

/// A finite-dimensional C*-algebra ⊕ M_{n_i}(C), optionally restricted to a unital
/// *-subalgebra given by a complex basis. The basis doubles as the spanning set used by
/// every axiom check.
class AlgebraSpec {
 public:
  explicit AlgebraSpec(std::vector<int> summands, std::string name = {})
      : sizes_(std::move(summands)), name_(std::move(name)) {
    validate_sizes();
  }

  AlgebraSpec(std::vector<int> summands, std::vector<AlgebraElement> basis, std::string name,
              double tol = kDefaultTol)
      : sizes_(std::move(summands)), name_(std::move(name)) {
    validate_sizes();
    set_constraint(std::move(basis), tol);
  }

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t summand_count() const { return sizes_.size(); }
  const std::string& name() const { return name_; }
  bool is_constrained() const { return basis_.has_value(); }
  const std::optional<std::vector<AlgebraElement>>& constraint_basis() const { return basis_; }

  /// Complex dimension.
  std::size_t dimension() const {
    if (basis_) return basis_->size();
    std::size_t d = 0;
    for (int n : sizes_) d += static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    return d;
  }

  bool same_shape(const AlgebraSpec& other) const { return sizes_ == other.sizes_; }

  bool matches(const AlgebraElement& a) const {
    if (a.blocks.size() != sizes_.size()) return false;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (a.blocks[i].rows() != sizes_[i] || a.blocks[i].cols() != sizes_[i]) return false;
    }
    return true;
  }

  /// Distance of a from the constraint subspace (0 for the full algebra).
  double constraint_residual(const AlgebraElement& a) const {
    if (!matches(a)) throw ShapeError("AlgebraSpec: element does not match summand sizes");
    if (!basis_) return 0.0;
    const ComplexVector v = vectorize(a);
    return (v - q_ * (q_.adjoint() * v)).norm();
  }

  bool contains(const AlgebraElement& a, double tol = kDefaultTol) const {
    return constraint_residual(a) <= tol * std::max(1.0, frob_norm(a));
  }

  /// Every spanning element of `sub` lies in this algebra.
  bool contains(const AlgebraSpec& sub, double tol = kDefaultTol) const;

  AlgebraElement unit() const {
    AlgebraElement u;
    for (int n : sizes_) u.blocks.push_back(identity(n));
    return u;
  }

  AlgebraElement zero() const {
    AlgebraElement z;
    for (int n : sizes_) z.blocks.push_back(zeros(n, n));
    return z;
  }

 private:
  void validate_sizes() const {
    if (sizes_.empty()) throw std::invalid_argument("AlgebraSpec: at least one summand required");
    for (int n : sizes_) {
      if (n < 1) throw std::invalid_argument("AlgebraSpec: summand sizes must be >= 1");
    }
  }

  void set_constraint(std::vector<AlgebraElement> basis, double tol) {
    if (basis.empty()) throw std::invalid_argument("AlgebraSpec: empty constraint basis");
    for (const auto& b : basis) {
      if (!matches(b)) throw ShapeError("AlgebraSpec: basis element has wrong block shapes");
    }
    const Eigen::Index dim = vectorize(basis.front()).size();
    ComplexMatrix cols(dim, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = vectorize(basis[k]);

    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(cols);
    qr.setThreshold(1e-10);
    if (qr.rank() != cols.cols()) {
      throw std::invalid_argument("AlgebraSpec: constraint basis is linearly dependent");
    }
    q_ = qr.householderQ() * ComplexMatrix::Identity(dim, cols.cols());
    basis_ = std::move(basis);

    auto require_inside = [&](const AlgebraElement& x, const char* what) {
      if (!contains(x, tol)) {
        throw std::invalid_argument(std::string("AlgebraSpec '") + name_ + "': not closed under " + what);
      }
    };
    require_inside(unit(), "unit (subalgebra must be unital)");
    for (const auto& a : *basis_) {
      require_inside(adjoint(a), "adjoint");
      for (const auto& b : *basis_) require_inside(a * b, "product");
    }
  }

  std::vector<int> sizes_;
  std::string name_;
  std::optional<std::vector<AlgebraElement>> basis_;
  ComplexMatrix q_;  // orthonormal basis of the constraint subspace in vectorized coordinates
};

/// Matrix units of each summand for the full algebra, or the constraint basis.
inline std::vector<AlgebraElement> spanning_set(const AlgebraSpec& spec) {
  if (spec.constraint_basis()) return *spec.constraint_basis();
  std::vector<AlgebraElement> out;
  for (std::size_t s = 0; s < spec.summand_count(); ++s) {
    const int n = spec.sizes()[s];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        AlgebraElement e = spec.zero();
        e.blocks[s](i, j) = 1.0;
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

inline bool AlgebraSpec::contains(const AlgebraSpec& sub, double tol) const {
  if (!same_shape(sub)) return false;
  for (const auto& e : spanning_set(sub)) {
    if (!contains(e, tol)) return false;
  }
  return true;
}

/// Linear combination Σ c_k s_k of the spanning set.
inline AlgebraElement combine(const AlgebraSpec& spec, const std::vector<AlgebraElement>& span,
                              const ComplexVector& coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != span.size()) {
    throw ShapeError("combine: coefficient count differs from spanning set size");
  }
  AlgebraElement out = spec.zero();
  for (std::size_t k = 0; k < span.size(); ++k) out = out + coeffs(static_cast<Eigen::Index>(k)) * span[k];
  return out;
}

inline bool is_unitary(const AlgebraElement& u, double tol = kDefaultTol) {
  for (const auto& blk : u.blocks) {
    if (blk.rows() != blk.cols()) return false;
    if (!approx_eq(blk * blk.adjoint(), identity(blk.rows()), tol)) return false;
  }
  return true;
}

/// exp(x) for an anti-hermitian x, computed blockwise through the hermitian eigenproblem of −i·x.
inline AlgebraElement exp_antihermitian(const AlgebraElement& x) {
  AlgebraElement out;
  for (const auto& blk : x.blocks) {
    const ComplexMatrix h = Complex(0.0, -0.5) * (blk - blk.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const Eigen::VectorXd& lam = es.eigenvalues();
    ComplexVector phase(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) phase(k) = std::polar(1.0, lam(k));
    out.blocks.push_back(es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint());
  }
  return out;
}

/// Real basis of the anti-hermitian part {x : x* = −x}, i.e. the Lie algebra of U(A).
/// Elements are normalized to unit Frobenius norm.
inline std::vector<AlgebraElement> lie_algebra_basis(const AlgebraSpec& spec) {
  std::vector<AlgebraElement> candidates;
  for (const auto& s : spanning_set(spec)) {
    candidates.push_back(0.5 * (s - adjoint(s)));
    candidates.push_back(Complex(0.0, 0.5) * (s + adjoint(s)));
  }
  // Greedy selection of a real-linearly independent subset (Gram-Schmidt over R).
  std::vector<AlgebraElement> basis;
  std::vector<Eigen::VectorXd> ortho;
  for (const auto& c : candidates) {
    const ComplexVector cv = vectorize(c);
    Eigen::VectorXd r(2 * cv.size());
    r << cv.real(), cv.imag();
    Eigen::VectorXd resid = r;
    for (const auto& o : ortho) resid -= o.dot(resid) * o;
    const double nrm = resid.norm();
    if (nrm > 1e-10 * std::max(1.0, r.norm())) {
      ortho.push_back(resid / nrm);
      basis.push_back((1.0 / frob_norm(c)) * c);
    }
  }
  return basis;
}

}  // namespace fluctus
