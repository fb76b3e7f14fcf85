#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fluctus {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Default relative tolerance for algebraic identities that are exact up to rounding.
inline constexpr double kDefaultTol = 1e-9;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string shape_str(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

inline void require_square(const ComplexMatrix& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw ShapeError(std::string(op) + ": expected square matrix, got " + shape_str(a));
  }
}

}  // namespace detail

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix zeros(Eigen::Index rows, Eigen::Index cols) {
  return ComplexMatrix::Zero(rows, cols);
}

/// n×n matrix unit E_ij (0-indexed).
inline ComplexMatrix matrix_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("mat_mul: inner dimensions differ " + detail::shape_str(a) + " * " +
                     detail::shape_str(b));
  }
  return a * b;
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) { return a.adjoint(); }

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_square(a, "commutator");
  detail::require_same_shape(a, b, "commutator");
  return a * b - b * a;
}

/// Kronecker product, a-index major: (a⊗b)(i·p+k, j·q+l) = a(i,j)·b(k,l) for b of shape p×q.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline double frob_norm(const ComplexMatrix& a) { return a.norm(); }

/// ‖a−b‖_F ≤ tol·max(1, ‖a‖_F, ‖b‖_F)
inline bool approx_eq(const ComplexMatrix& a, const ComplexMatrix& b, double tol = kDefaultTol) {
  detail::require_same_shape(a, b, "approx_eq");
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() <= tol * scale;
}

/// Relative residual used throughout the checks: ‖a−b‖_F / max(1, ‖a‖_F, ‖b‖_F).
inline double rel_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_same_shape(a, b, "rel_diff");
  return (a - b).norm() / std::max({1.0, a.norm(), b.norm()});
}

inline double hermitian_residual(const ComplexMatrix& a) {
  detail::require_square(a, "hermitian_residual");
  return (a - a.adjoint()).norm();
}

/// Antilinear operator ξ ↦ m·conj(ξ). Only the matrix part is stored; the inverse of m
/// is derived once at construction.
class AntilinearOp {
 public:
  explicit AntilinearOp(ComplexMatrix m) : m_(std::move(m)) {
    detail::require_square(m_, "AntilinearOp");
    Eigen::FullPivLU<ComplexMatrix> lu(m_);
    if (!lu.isInvertible()) throw std::invalid_argument("AntilinearOp: singular matrix part");
    m_inv_ = lu.inverse();
  }

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  ComplexVector apply(const ComplexVector& xi) const {
    if (xi.size() != m_.cols()) throw ShapeError("AntilinearOp::apply: size mismatch");
    return m_ * xi.conjugate();
  }

  /// (m₁·conj)∘(m₂·conj) = m₁·conj(m₂), a linear map.
  ComplexMatrix compose(const AntilinearOp& other) const {
    return mat_mul(m_, other.m_.conjugate());
  }

  /// J T J⁻¹ for linear T. With J = m·conj, J⁻¹ = conj(m)⁻¹·conj, so J T J⁻¹ = m·conj(T)·m⁻¹.
  ComplexMatrix conjugate(const ComplexMatrix& t) const {
    detail::require_same_shape(m_, t, "conj_by_antilinear");
    return m_ * t.conjugate() * m_inv_;
  }

 private:
  ComplexMatrix m_;
  ComplexMatrix m_inv_;
};

/// T̂ = J T J⁻¹. Antilinear and multiplicative in T.
inline ComplexMatrix conj_by_antilinear(const AntilinearOp& j, const ComplexMatrix& t) {
  return j.conjugate(t);
}

}  // namespace fluctus
