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
#include "fluctus/perturbation.hpp"
#include "fluctus/sampling.hpp"
#include "fluctus/spectral_triple.hpp"

namespace fluctus {

// M_n(A) for A = ⊕ M_{n_s}(C) is stored as ⊕ M_{n·n_s}(C): entry (i, j) of summand s is the
// n_s×n_s block at (i·n_s, j·n_s). M_n(H) is flattened with index (i·n + j)·dim_H + h.

/// M_n(spec). A constrained spec is amplified through the basis E_ij ⊗ b.
inline AlgebraSpec amplify(const AlgebraSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("amplify: n must be >= 1");
  std::vector<int> sizes;
  for (int s : spec.sizes()) sizes.push_back(n * s);
  const std::string name = "M_" + std::to_string(n) + "(" + spec.name() + ")";
  if (!spec.is_constrained()) return AlgebraSpec(sizes, name);
  std::vector<AlgebraElement> basis;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (const auto& b : *spec.constraint_basis()) {
        AlgebraElement x;
        for (std::size_t s = 0; s < b.blocks.size(); ++s) x.blocks.push_back(kron(matrix_unit(n, i, j), b.blocks[s]));
        basis.push_back(std::move(x));
      }
    }
  }
  return AlgebraSpec(sizes, std::move(basis), name);
}

/// Entry (i, j) ∈ A of x ∈ M_n(A).
inline AlgebraElement matrix_entry(const AlgebraSpec& base, const AlgebraElement& x, int i, int j) {
  AlgebraElement out;
  for (std::size_t s = 0; s < base.summand_count(); ++s) {
    const int ns = base.sizes()[s];
    out.blocks.push_back(x.blocks[s].block(i * ns, j * ns, ns, ns));
  }
  return out;
}

/// The n×n matrix with a at (i, j).
inline AlgebraElement unit_times(const AlgebraSpec& base, int n, int i, int j, const AlgebraElement& a) {
  AlgebraElement out;
  for (std::size_t s = 0; s < base.summand_count(); ++s) out.blocks.push_back(kron(matrix_unit(n, i, j), a.blocks[s]));
  return out;
}

/// a·1_n.
inline AlgebraElement diagonal_times(const AlgebraSpec& base, int n, const AlgebraElement& a) {
  AlgebraElement out;
  for (std::size_t s = 0; s < base.summand_count(); ++s) out.blocks.push_back(kron(identity(n), a.blocks[s]));
  return out;
}

struct MoritaData {
  int n = 1;
  AlgebraElement e;                           // element of M_n(A)
  std::optional<UniversalOneForm> conn_form;  // one-form over M_n(A), the eAe perturbation

  /// Entrywise connection form B_ij = Σ x δ(y) as the M_n(A) pairs (E_ij x, y·1_n).
  static UniversalOneForm from_entries(const AlgebraSpec& base, int n, const std::vector<UniversalOneForm>& entries) {
    if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
      throw std::invalid_argument("MoritaData: connection form needs n*n entries");
    }
    UniversalOneForm out;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (const auto& p : entries[static_cast<std::size_t>(i * n + j)].pairs) {
          out.pairs.push_back({unit_times(base, n, i, j, p.a), diagonal_times(base, n, p.b)});
        }
      }
    }
    return out;
  }
};

/// e ω e as a one-form: e x δ(y e) − e x y δ(e), from e·xδ(y)·e = e x δ(y e) − e x y δ(e).
inline UniversalOneForm compress(const AlgebraElement& e, const UniversalOneForm& w) {
  UniversalOneForm out;
  for (const auto& p : w.pairs) {
    out.pairs.push_back({e * p.a, p.b * e});
    out.pairs.push_back({-1.0 * (e * p.a * p.b), e});
  }
  return out;
}

inline void validate(const FiniteSpectralTriple& t, const MoritaData& m, double tol = kDefaultTol) {
  if (m.n < 1) throw std::invalid_argument("MoritaData: n must be >= 1");
  const AlgebraSpec big = amplify(t.algebra(), m.n);
  if (!big.matches(m.e)) throw ShapeError("MoritaData: e has the wrong shape");
  if (!big.contains(m.e, tol)) throw std::invalid_argument("MoritaData: e is not in M_n(A)");
  if (!approx_eq(m.e * m.e, m.e, tol)) throw std::invalid_argument("MoritaData: e is not idempotent");
  if (!approx_eq(adjoint(m.e), m.e, tol)) throw std::invalid_argument("MoritaData: e is not self-adjoint");
  if (m.conn_form) {
    for (const auto& p : m.conn_form->pairs) {
      if (!big.matches(p.a) || !big.matches(p.b)) throw ShapeError("MoritaData: connection pair has the wrong shape");
    }
  }
}

/// π on M_n(H): (π(x)ξ)_ij = Σ_k π(x_ik) ξ_kj.
inline ComplexMatrix big_left(const FiniteSpectralTriple& t, int n, const AlgebraElement& x) {
  const Eigen::Index dh = t.dim_h();
  ComplexMatrix out = zeros(n * n * dh, n * n * dh);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix pik = t.represent(matrix_entry(t.algebra(), x, i, k));
      for (int j = 0; j < n; ++j) out.block((i * n + j) * dh, (k * n + j) * dh, dh, dh) = pik;
    }
  }
  return out;
}

/// π̂ on M_n(H): (π̂(x)ξ)_ij = Σ_k x̂_jk ξ_ik.
inline ComplexMatrix big_right(const FiniteSpectralTriple& t, int n, const AlgebraElement& x) {
  const Eigen::Index dh = t.dim_h();
  ComplexMatrix out = zeros(n * n * dh, n * n * dh);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix hjk = t.hat(t.represent(matrix_entry(t.algebra(), x, j, k)));
      for (int i = 0; i < n; ++i) out.block((i * n + j) * dh, (i * n + k) * dh, dh, dh) = hjk;
    }
  }
  return out;
}

/// D̃ = 1 ⊗ D on M_n(H).
inline ComplexMatrix amplified_dirac(const FiniteSpectralTriple& t, int n) { return kron(identity(n * n), t.d()); }

/// J'ξ_ij = J ξ_ji.
inline AntilinearOp induced_real_structure(const MoritaData& m, const FiniteSpectralTriple& t) {
  const int n = m.n;
  const Eigen::Index dh = t.dim_h();
  ComplexMatrix out = zeros(n * n * dh, n * n * dh);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.block((i * n + j) * dh, (j * n + i) * dh, dh, dh) = t.j().matrix();
  }
  return AntilinearOp(out);
}

namespace detail {

/// Σ π(a)[T, π(b)] over the connection pairs, with π or π̂ as selected.
inline ComplexMatrix connection_term(const FiniteSpectralTriple& t, const MoritaData& m, const ComplexMatrix& op,
                                     bool right) {
  ComplexMatrix out = zeros(op.rows(), op.cols());
  if (!m.conn_form) return out;
  for (const auto& p : m.conn_form->pairs) {
    const ComplexMatrix a = right ? big_right(t, m.n, p.a) : big_left(t, m.n, p.a);
    const ComplexMatrix b = right ? big_right(t, m.n, p.b) : big_left(t, m.n, p.b);
    out += a * commutator(op, b);
  }
  return out;
}

}  // namespace detail

/// P = π(e)π̂(e), the projection onto E ⊗ H ⊗ Ē inside M_n(H).
inline ComplexMatrix corner_projection(const FiniteSpectralTriple& t, const MoritaData& m) {
  return big_left(t, m.n, m.e) * big_right(t, m.n, m.e);
}

/// (1 ⊗_∇ D) ⊗_∇̄ 1: twist by E first, then by Ē, restricted to the corner.
inline ComplexMatrix twisted_dirac_left(const FiniteSpectralTriple& t, const MoritaData& m) {
  validate(t, m);
  const ComplexMatrix pe = big_left(t, m.n, m.e);
  const ComplexMatrix ph = big_right(t, m.n, m.e);
  const ComplexMatrix d = amplified_dirac(t, m.n);
  const ComplexMatrix t1 = pe * (d + detail::connection_term(t, m, d, false)) * pe;
  const ComplexMatrix t2 = ph * (t1 + detail::connection_term(t, m, t1, true)) * ph;
  const ComplexMatrix p = pe * ph;
  return p * t2 * p;
}

/// 1 ⊗_∇ (D ⊗_∇̄ 1): the opposite order.
inline ComplexMatrix twisted_dirac_right(const FiniteSpectralTriple& t, const MoritaData& m) {
  validate(t, m);
  const ComplexMatrix pe = big_left(t, m.n, m.e);
  const ComplexMatrix ph = big_right(t, m.n, m.e);
  const ComplexMatrix d = amplified_dirac(t, m.n);
  const ComplexMatrix t1 = ph * (d + detail::connection_term(t, m, d, true)) * ph;
  const ComplexMatrix t2 = pe * (t1 + detail::connection_term(t, m, t1, false)) * pe;
  const ComplexMatrix p = pe * ph;
  return p * t2 * p;
}

/// max over (i, l) of ‖Σ_{j,k} π(e_ij)[D, π(e_jk)]π(e_kl)‖_F, i.e. e·δ(e)·e = 0.
inline double check_idempotent_identity(const FiniteSpectralTriple& t, const MoritaData& m) {
  validate(t, m);
  const int n = m.n;
  std::vector<ComplexMatrix> pe;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pe.push_back(t.represent(matrix_entry(t.algebra(), m.e, i, j)));
  }
  auto at = [&](int i, int j) -> const ComplexMatrix& { return pe[static_cast<std::size_t>(i * n + j)]; };
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      ComplexMatrix s = zeros(t.dim_h(), t.dim_h());
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) s += at(i, j) * commutator(t.d(), at(j, k)) * at(k, l);
      }
      worst = std::max(worst, s.norm());
    }
  }
  return worst;
}

/// Spectral projection χ(h > 0) of a random self-adjoint h ∈ M_n(A), computed summand-wise.
/// Spectra with an eigenvalue closer than `gap` to 0 are resampled, as is the zero projection.
inline AlgebraElement random_projection(const AlgebraSpec& base, int n, Rng& rng, double gap = 1e-6) {
  const AlgebraSpec big = amplify(base, n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const AlgebraElement h = random_self_adjoint(big, rng);
    AlgebraElement p;
    bool ok = true;
    for (const auto& blk : h.blocks) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(blk);
      const Eigen::VectorXd& lam = es.eigenvalues();
      if (lam.cwiseAbs().minCoeff() < gap) {
        ok = false;
        break;
      }
      ComplexVector chi(lam.size());
      for (Eigen::Index k = 0; k < lam.size(); ++k) chi(k) = lam(k) > 0.0 ? 1.0 : 0.0;
      const ComplexMatrix proj = es.eigenvectors() * chi.asDiagonal() * es.eigenvectors().adjoint();
      p.blocks.push_back(0.5 * (proj + proj.adjoint()));
    }
    if (ok && frob_norm(p) > 0.5) return p;
  }
  throw std::runtime_error("random_projection: no spectrum with a sufficient gap found");
}

/// Random self-adjoint one-form over M_n(A), compressed by e.
inline UniversalOneForm random_connection(const AlgebraSpec& base, const AlgebraElement& e, int n, Rng& rng,
                                          std::size_t n_pairs = 2, double sigma = 0.5) {
  const AlgebraSpec big = amplify(base, n);
  return compress(e, random_self_adjoint_one_form(big, rng, n_pairs, sigma));
}

struct MoritaReport {
  int n = 1;
  bool with_connection = false;
  double assoc_residual = 0.0;        // ‖left − right‖_F
  double scale = 1.0;                 // max(1, ‖left‖_F)
  double idempotent_identity = 0.0;
  double corner_self_adjoint = 0.0;   // ‖T − T*‖_F of the corner operator
  double leak = 0.0;                  // ‖(1 − P) D̃ P‖_F for the uncompressed D̃
  double j_squared_residual = 0.0;    // ‖P(J'² − ε_J)P‖_F
  int measured_eps_d = 0;             // sign s minimizing ‖J'TJ'⁻¹ − sT‖ on the corner
  double eps_d_residual = 0.0;
  int measured_eps_gamma = 0;
  double eps_gamma_residual = 0.0;
  double zeroth_order = 0.0;          // End_A(E) against its J'-conjugate, on random elements
};

namespace detail {

inline std::pair<int, double> measured_sign(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  const double plus = (lhs - rhs).norm();
  const double minus = (lhs + rhs).norm();
  return plus <= minus ? std::pair<int, double>{1, plus} : std::pair<int, double>{-1, minus};
}

}  // namespace detail

/// All Morita checks for one (e, connection). The zeroth-order defect uses `samples` random
/// elements of e·M_n(A)·e rather than a full spanning set.
inline MoritaReport morita_report(const FiniteSpectralTriple& t, const MoritaData& m, Rng& rng, int samples = 4) {
  validate(t, m);
  MoritaReport rep;
  rep.n = m.n;
  rep.with_connection = m.conn_form.has_value();
  const ComplexMatrix left = twisted_dirac_left(t, m);
  const ComplexMatrix right = twisted_dirac_right(t, m);
  rep.assoc_residual = (left - right).norm();
  rep.scale = std::max(1.0, left.norm());
  rep.idempotent_identity = check_idempotent_identity(t, m);
  rep.corner_self_adjoint = hermitian_residual(left);

  const ComplexMatrix p = corner_projection(t, m);
  const ComplexMatrix one = identity(p.rows());
  rep.leak = ((one - p) * amplified_dirac(t, m.n) * p).norm();

  const AntilinearOp jp = induced_real_structure(m, t);
  rep.j_squared_residual = (p * (jp.compose(jp) - static_cast<double>(t.signs().eps_J) * one) * p).norm();
  const auto [sd, rd] = detail::measured_sign(jp.conjugate(left), left);
  rep.measured_eps_d = sd;
  rep.eps_d_residual = rd;
  const ComplexMatrix gamma = p * kron(identity(m.n * m.n), t.gamma()) * p;
  const auto [sg, rg] = detail::measured_sign(jp.matrix() * gamma.conjugate(), gamma * jp.matrix());
  rep.measured_eps_gamma = sg;
  rep.eps_gamma_residual = rg;

  const AlgebraSpec big = amplify(t.algebra(), m.n);
  std::vector<AlgebraElement> xs;
  for (int k = 0; k < samples; ++k) xs.push_back(m.e * random_element(big, rng) * m.e);
  for (const auto& x : xs) {
    const ComplexMatrix px = big_left(t, m.n, x);
    for (const auto& y : xs) {
      const ComplexMatrix py = jp.conjugate(big_left(t, m.n, y).adjoint());
      rep.zeroth_order = std::max(rep.zeroth_order, commutator(px, py).norm());
    }
  }
  return rep;
}

}  // namespace fluctus
