#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fluctus/algebra.hpp"
#include "fluctus/matrix_core.hpp"
#include "fluctus/perturbation.hpp"
#include "fluctus/sampling.hpp"
#include "fluctus/spectral_triple.hpp"
#include "fluctus/toy_model.hpp"

namespace fluctus {

struct ActionParams {
  double f2 = 1.0;
  double f0 = 1.0;
  double lambda = 1.0;

  void validate() const {
    if (!(f2 > 0.0)) throw std::invalid_argument("ActionParams: f2 must be positive");
    if (!(f0 > 0.0)) throw std::invalid_argument("ActionParams: f0 must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("ActionParams: lambda must be positive");
  }
};

/// Real coordinates (x, s1, s2) ↦ total fields X = x, v = (1 + s1, s2).
inline FieldPoint field_from_real(const Eigen::VectorXd& c) {
  if (c.size() == 3) return FieldPoint{c(0), 1.0 + c(1), c(2)};
  if (c.size() == 6) return FieldPoint{{c(0), c(3)}, {1.0 + c(1), c(4)}, {c(2), c(5)}};
  throw ShapeError("field_from_real: expected 3 or 6 real coordinates");
}

/// V = −(f₂/2π²)Λ² tr D'² + (f₀/8π²) tr D'⁴, with tr D'⁴ = ‖D'²‖²_F.
inline double v_trace(const ToyParams& p, const ActionParams& ap, const FieldPoint& f, double tol = 1e-12) {
  const ComplexMatrix d = closed_dirac(p, f);
  const ComplexMatrix d2 = d * d;
  const Complex tr2 = d2.trace();
  if (std::abs(tr2.imag()) > tol * std::max(1.0, std::abs(tr2))) {
    throw std::runtime_error("v_trace: tr D'^2 has a non-negligible imaginary part");
  }
  const double tr4 = d2.squaredNorm();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return -(ap.f2 / (2.0 * pi2)) * ap.lambda * ap.lambda * tr2.real() + (ap.f0 / (8.0 * pi2)) * tr4;
}

namespace detail {

struct PotentialCoefficients {
  long double a, b, c2, c0;
};

inline PotentialCoefficients coefficients(const ToyParams& p, const ActionParams& ap) {
  const long double pi = std::numbers::pi_v<long double>;
  const long double kxr = p.k_x.real(), kxi = p.k_x.imag(), kyr = p.k_y.real(), kyi = p.k_y.imag();
  const long double lam = ap.lambda;
  return {kxr * kxr + kxi * kxi, kyr * kyr + kyi * kyi, ap.f2 * lam * lam / (pi * pi), ap.f0 / (4.0L * pi * pi)};
}

/// V as a polynomial in r = |X|², q = |v|⁴.
inline long double v_rq(const PotentialCoefficients& k, long double r, long double q) {
  return -k.c2 * (4.0L * k.a * r + k.b * q) +
         k.c0 * (4.0L * k.a * k.a * r * r + 4.0L * k.a * k.b * r * q + k.b * k.b * q * q);
}

inline long double abs2(Complex z) {
  const long double re = z.real(), im = z.imag();
  return re * re + im * im;
}

}  // namespace detail

/// V = −c₂(4|k_x|²|X|² + |k_y|²|v|⁴) + c₀(4|k_x|⁴|X|⁴ + 4|k_x|²|k_y|²|X|²|v|⁴ + |k_y|⁴|v|⁸),
/// c₂ = f₂Λ²/π², c₀ = f₀/4π². Evaluated in extended precision.
inline double v_closed(const ToyParams& p, const ActionParams& ap, const FieldPoint& f) {
  const auto k = detail::coefficients(p, ap);
  const long double r = detail::abs2(f.x);
  const long double vv = detail::abs2(f.v1) + detail::abs2(f.v2);
  return static_cast<double>(detail::v_rq(k, r, vv * vv));
}

/// |v|² at the y-sector minimum for X = 0: w = √(2f₂Λ²/(f₀|k_y|²)).
inline double vev_w(const ToyParams& p, const ActionParams& ap) {
  const double b = std::norm(p.k_y);
  if (b == 0.0) throw std::invalid_argument("vev_w: k_y = 0 has no y-sector minimum");
  return std::sqrt(2.0 * ap.f2 * ap.lambda * ap.lambda / (ap.f0 * b));
}

/// |X|² at the global minimum (v = 0): 2f₂Λ²/(f₀|k_x|²).
inline double global_x2(const ToyParams& p, const ActionParams& ap) {
  const double a = std::norm(p.k_x);
  if (a == 0.0) throw std::invalid_argument("global_x2: k_x = 0 has no x-sector minimum");
  return 2.0 * ap.f2 * ap.lambda * ap.lambda / (ap.f0 * a);
}

/// The reference Hessian diag(−2w², 8w³, 0)·f₀|k_y|⁴/π² at (0, −1+√w, 0).
inline Eigen::Vector3d reference_hessian_diagonal(const ToyParams& p, const ActionParams& ap) {
  const double w = vev_w(p, ap);
  const double s = ap.f0 * std::norm(p.k_y) * std::norm(p.k_y) / (std::numbers::pi * std::numbers::pi);
  return {-2.0 * w * w * s, 8.0 * w * w * w * s, 0.0};
}

// ---------------------------------------------------------------------------
// Objectives and derivatives

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

struct Objective {
  ScalarFn value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;  // optional
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;   // optional
  int dim = 3;
};

struct GradHess {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Central differences with per-coordinate step h_i = step·max(1, |c_i|).
inline GradHess grad_hess(const ScalarFn& f, const Eigen::VectorXd& c, double step = 1e-5) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_hess: step must be positive");
  const Eigen::Index n = c.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = step * std::max(1.0, std::abs(c(i)));
  auto at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    Eigen::VectorXd y = c;
    if (i >= 0) y(i) += si * h(i);
    if (j >= 0) y(j) += sj * h(j);
    return f(y);
  };
  const double f0 = f(c);
  GradHess out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double fp = at(i, 1, -1, 0), fm = at(i, -1, -1, 0);
    out.gradient(i) = (fp - fm) / (2.0 * h(i));
    out.hessian(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4.0 * h(i) * h(j));
      out.hessian(i, j) = v;
      out.hessian(j, i) = v;
    }
  }
  return out;
}

/// V over (x, s1, s2) with analytic gradient and Hessian.
inline Objective toy_objective(const ToyParams& p, const ActionParams& ap) {
  ap.validate();
  const auto k = detail::coefficients(p, ap);
  Objective obj;
  obj.dim = 3;
  obj.value = [p, ap](const Eigen::VectorXd& c) { return v_closed(p, ap, field_from_real(c)); };
  struct Parts {
    long double vr, vq, vrr, vqq, vrq, x, t, s2, pp;
  };
  auto parts = [k](const Eigen::VectorXd& c) {
    const long double x = c(0), t = 1.0L + c(1), s2 = c(2);
    const long double r = x * x, pp = t * t + s2 * s2, q = pp * pp;
    return Parts{-4.0L * k.a * k.c2 + k.c0 * (8.0L * k.a * k.a * r + 4.0L * k.a * k.b * q),
                 -k.b * k.c2 + k.c0 * (4.0L * k.a * k.b * r + 2.0L * k.b * k.b * q),
                 8.0L * k.a * k.a * k.c0,
                 2.0L * k.b * k.b * k.c0,
                 4.0L * k.a * k.b * k.c0,
                 x,
                 t,
                 s2,
                 pp};
  };
  obj.gradient = [parts](const Eigen::VectorXd& c) {
    const Parts s = parts(c);
    Eigen::VectorXd g(3);
    g(0) = static_cast<double>(2.0L * s.x * s.vr);
    g(1) = static_cast<double>(s.vq * 4.0L * s.pp * s.t);
    g(2) = static_cast<double>(s.vq * 4.0L * s.pp * s.s2);
    return g;
  };
  obj.hessian = [parts](const Eigen::VectorXd& c) {
    const Parts s = parts(c);
    const long double rx = 2.0L * s.x;
    const long double q1 = 4.0L * s.pp * s.t, q2 = 4.0L * s.pp * s.s2;
    const long double q11 = 8.0L * s.t * s.t + 4.0L * s.pp, q22 = 8.0L * s.s2 * s.s2 + 4.0L * s.pp;
    const long double q12 = 8.0L * s.t * s.s2;
    Eigen::MatrixXd h(3, 3);
    h(0, 0) = static_cast<double>(s.vrr * rx * rx + 2.0L * s.vr);
    h(0, 1) = h(1, 0) = static_cast<double>(s.vrq * rx * q1);
    h(0, 2) = h(2, 0) = static_cast<double>(s.vrq * rx * q2);
    h(1, 1) = static_cast<double>(s.vqq * q1 * q1 + s.vq * q11);
    h(2, 2) = static_cast<double>(s.vqq * q2 * q2 + s.vq * q22);
    h(1, 2) = h(2, 1) = static_cast<double>(s.vqq * q1 * q2 + s.vq * q12);
    return h;
  };
  return obj;
}

/// V over (Re x, Re s1, Re s2, Im x, Im s1, Im s2), finite differences only.
inline Objective toy_objective_complex(const ToyParams& p, const ActionParams& ap) {
  ap.validate();
  Objective obj;
  obj.dim = 6;
  obj.value = [p, ap](const Eigen::VectorXd& c) { return v_closed(p, ap, field_from_real(c)); };
  return obj;
}

// ---------------------------------------------------------------------------
// Critical points

enum class Classification { min, max, saddle, degenerate };

inline std::string to_string(Classification c) {
  switch (c) {
    case Classification::min: return "min";
    case Classification::max: return "max";
    case Classification::saddle: return "saddle";
    case Classification::degenerate: return "degenerate";
  }
  return "unknown";
}

struct HessianClass {
  Classification kind = Classification::degenerate;
  int degenerate_directions = 0;
  Eigen::VectorXd eigenvalues;
};

/// Signs of the Hessian spectrum; |λ| < rel·max(1, max|λ|) is a degenerate direction. Any
/// mixed signs make a saddle; otherwise a zero eigenvalue makes the point degenerate.
inline HessianClass classify(const Eigen::MatrixXd& h, double rel = 1e-6) {
  HessianClass out;
  if (h.size() == 0) {
    out.kind = Classification::min;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
  out.eigenvalues = es.eigenvalues();
  const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    const double l = out.eigenvalues(i);
    if (std::abs(l) < rel * scale) {
      ++out.degenerate_directions;
    } else if (l > 0) {
      ++pos;
    } else {
      ++neg;
    }
  }
  if (pos > 0 && neg > 0) {
    out.kind = Classification::saddle;
  } else if (out.degenerate_directions > 0) {
    out.kind = Classification::degenerate;
  } else {
    out.kind = pos > 0 ? Classification::min : Classification::max;
  }
  return out;
}

struct CriticalPoint {
  Eigen::VectorXd point;       // all coordinates, fixed ones included
  double value = 0.0;
  double gradient_norm = 0.0;  // over the free coordinates
  Eigen::MatrixXd hessian;     // over all coordinates
  Classification classification = Classification::degenerate;  // on the free coordinates
  int degenerate_directions = 0;
  Classification full_classification = Classification::degenerate;
  int stabilizer_dim = -1;     // filled by callers that know the triple
};

struct StartFailure {
  int start = 0;
  std::string reason;
  double gradient_norm = 0.0;
};

struct MinimizeOptions {
  double box = 2.5;
  int max_iterations = 100000;
  double merge_radius = 1e-5;
  double gradient_tol = 1e-10;
  double newton_switch = 1e-4;
  double fd_step = 1e-5;
};

struct MinimizeResult {
  std::vector<CriticalPoint> points;
  std::vector<StartFailure> failures;
};

namespace detail {

class Restricted {
 public:
  Restricted(const Objective& obj, const std::vector<std::optional<double>>& fixed, double fd_step)
      : obj_(obj), fixed_(fixed), fd_step_(fd_step) {
    if (static_cast<int>(fixed_.size()) != obj_.dim) fixed_.resize(static_cast<std::size_t>(obj_.dim));
    for (int i = 0; i < obj_.dim; ++i) {
      if (!fixed_[static_cast<std::size_t>(i)]) free_.push_back(i);
    }
  }

  int free_dim() const { return static_cast<int>(free_.size()); }

  Eigen::VectorXd embed(const Eigen::VectorXd& y) const {
    Eigen::VectorXd c(obj_.dim);
    for (int i = 0; i < obj_.dim; ++i) {
      if (fixed_[static_cast<std::size_t>(i)]) c(i) = *fixed_[static_cast<std::size_t>(i)];
    }
    for (std::size_t k = 0; k < free_.size(); ++k) c(free_[k]) = y(static_cast<Eigen::Index>(k));
    return c;
  }

  double value(const Eigen::VectorXd& y) const { return obj_.value(embed(y)); }

  Eigen::VectorXd full_gradient(const Eigen::VectorXd& c) const {
    if (obj_.gradient) return obj_.gradient(c);
    return grad_hess(obj_.value, c, fd_step_).gradient;
  }

  Eigen::MatrixXd full_hessian(const Eigen::VectorXd& c) const {
    if (obj_.hessian) return obj_.hessian(c);
    return grad_hess(obj_.value, c, fd_step_).hessian;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& y) const { return restrict(full_gradient(embed(y))); }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& y) const {
    const Eigen::MatrixXd h = full_hessian(embed(y));
    Eigen::MatrixXd out(free_dim(), free_dim());
    for (int a = 0; a < free_dim(); ++a) {
      for (int b = 0; b < free_dim(); ++b) out(a, b) = h(free_[static_cast<std::size_t>(a)], free_[static_cast<std::size_t>(b)]);
    }
    return out;
  }

 private:
  Eigen::VectorXd restrict(const Eigen::VectorXd& g) const {
    Eigen::VectorXd out(free_dim());
    for (int a = 0; a < free_dim(); ++a) out(a) = g(free_[static_cast<std::size_t>(a)]);
    return out;
  }

  const Objective& obj_;
  std::vector<std::optional<double>> fixed_;
  std::vector<int> free_;
  double fd_step_;
};

/// Backtracking along direction `dir` until the Armijo condition holds; returns the accepted step length.
inline double armijo(const Restricted& r, const Eigen::VectorXd& y, double fy, const Eigen::VectorXd& g,
                     const Eigen::VectorXd& dir, double t0) {
  const double slope = g.dot(dir);
  double t = t0;
  for (int k = 0; k < 80; ++k) {
    const double ft = r.value(y + t * dir);
    if (std::isfinite(ft) && ft <= fy + 1e-4 * t * slope) return t;
    t *= 0.5;
  }
  return 0.0;
}

struct StartOutcome {
  bool converged = false;
  Eigen::VectorXd y;
  double gradient_norm = 0.0;
  std::string reason;
};

/// Gradient descent with Armijo backtracking, then saddle-free damped Newton once the gradient is
/// small. Newton continues past the gradient tolerance until its steps stall, which collapses the
/// slowly converging approach to degenerate (quartic) minima onto a single point.
inline StartOutcome descend(const Restricted& r, Eigen::VectorXd y, const MinimizeOptions& opt) {
  StartOutcome out;
  double t_prev = 1.0;
  int polish = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double fy = r.value(y);
    const Eigen::VectorXd g = r.gradient(y);
    const double gn = g.norm();
    if (!std::isfinite(fy) || !std::isfinite(gn)) {
      out.reason = "non-finite value";
      out.y = y;
      out.gradient_norm = gn;
      return out;
    }
    if (gn == 0.0) {
      out.converged = true;
      out.y = y;
      return out;
    }
    Eigen::VectorXd step;
    if (gn < opt.newton_switch) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.hessian(y));
      const Eigen::VectorXd lam = es.eigenvalues();
      const double floor = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
      const Eigen::VectorXd coef = es.eigenvectors().transpose() * g;
      Eigen::VectorXd scaled(coef.size());
      for (Eigen::Index i = 0; i < coef.size(); ++i) scaled(i) = coef(i) / std::max(std::abs(lam(i)), floor);
      const Eigen::VectorXd dir = -(es.eigenvectors() * scaled);
      const double t = armijo(r, y, fy, g, dir, 1.0);
      if (t > 0.0) step = t * dir;
    }
    if (step.size() == 0) {
      const Eigen::VectorXd dir = -g;
      const double t = armijo(r, y, fy, g, dir, std::min(1.0, 2.0 * t_prev));
      t_prev = t > 0.0 ? t : 1.0;
      step = t * dir;
    }
    const double sn = step.norm();
    y += step;
    if (gn < opt.gradient_tol) {
      ++polish;
      if (sn <= 1e-15 * std::max(1.0, y.norm()) || polish > 500) {
        out.converged = true;
        out.y = y;
        out.gradient_norm = r.gradient(y).norm();
        return out;
      }
    } else if (sn == 0.0) {
      out.reason = "line search stalled";
      out.y = y;
      out.gradient_norm = gn;
      return out;
    }
  }
  out.y = y;
  out.gradient_norm = r.gradient(y).norm();
  out.converged = out.gradient_norm < opt.gradient_tol;
  if (!out.converged) out.reason = "iteration cap reached";
  return out;
}

}  // namespace detail

/// Multi-start search for critical points. Start i draws its initial point from mt19937_64(seed + i),
/// uniform in [−box, box] on each free coordinate. Results are merged within merge_radius and sorted
/// by value, then lexicographically by coordinates.
inline MinimizeResult minimize(const Objective& obj, int starts, std::uint64_t seed,
                               const std::vector<std::optional<double>>& fixed = {},
                               const MinimizeOptions& opt = {}) {
  if (starts < 1) throw std::invalid_argument("minimize: starts must be >= 1");
  const detail::Restricted r(obj, fixed, opt.fd_step);
  MinimizeResult res;
  for (int s = 0; s < starts; ++s) {
    Rng rng(seed + static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> box(-opt.box, opt.box);
    Eigen::VectorXd y(r.free_dim());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = box(rng);
    const detail::StartOutcome o = detail::descend(r, y, opt);
    if (!o.converged) {
      res.failures.push_back({s, o.reason, o.gradient_norm});
      continue;
    }
    const Eigen::VectorXd c = r.embed(o.y);
    bool merged = false;
    for (const auto& cp : res.points) {
      if ((cp.point - c).norm() < opt.merge_radius) {
        merged = true;
        break;
      }
    }
    if (merged) continue;
    CriticalPoint cp;
    cp.point = c;
    cp.value = obj.value(c);
    cp.gradient_norm = o.gradient_norm;
    cp.hessian = r.full_hessian(c);
    const HessianClass free_class = classify(r.hessian(o.y));
    cp.classification = free_class.kind;
    cp.degenerate_directions = free_class.degenerate_directions;
    cp.full_classification = classify(cp.hessian).kind;
    res.points.push_back(std::move(cp));
  }
  std::sort(res.points.begin(), res.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return std::lexicographical_compare(a.point.data(), a.point.data() + a.point.size(), b.point.data(),
                                        b.point.data() + b.point.size());
  });
  return res;
}

// ---------------------------------------------------------------------------
// Unbroken symmetry

/// Real nullity of X ↦ [π(X) + Ĵπ(X)J⁻¹, d_vev] over the anti-hermitian part of `algebra`.
/// Singular values at or below rel·‖d_vev‖_F count as null.
inline int stabilizer_dim(const FiniteSpectralTriple& t, const ComplexMatrix& d_vev, const AlgebraSpec& algebra,
                          double rel = 1e-8) {
  if (!algebra.same_shape(t.algebra())) throw std::invalid_argument("stabilizer_dim: algebra shape mismatch");
  if (d_vev.rows() != t.dim_h() || d_vev.cols() != t.dim_h()) throw ShapeError("stabilizer_dim: d_vev has wrong size");
  if (hermitian_residual(d_vev) > kDefaultTol * std::max(1.0, d_vev.norm())) {
    throw std::invalid_argument("stabilizer_dim: d_vev is not self-adjoint");
  }
  const auto basis = lie_algebra_basis(algebra);
  const Eigen::Index n2 = d_vev.size();
  Eigen::MatrixXd m(2 * n2, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const ComplexMatrix px = t.represent(basis[k]);
    const ComplexMatrix c = commutator(px + t.hat(px), d_vev);
    const Eigen::Index col = static_cast<Eigen::Index>(k);
    m.col(col).head(n2) = c.real().reshaped();
    m.col(col).tail(n2) = c.imag().reshaped();
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double threshold = rel * d_vev.norm();
  int null = static_cast<int>(basis.size()) - static_cast<int>(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= threshold) ++null;
  }
  return null;
}

struct VevTransformReport {
  double residual = 0.0;            // ‖U d U* − d‖_F
  double predicted_residual = 0.0;  // same, from the block transformation rule
  double formula_mismatch = 0.0;    // ‖U d U* − predicted‖_F
};

/// Gauge action of u = (u_R, u_L, m) ∈ U(A_ev) on a toy-model vev, compared with the block rule
/// K ↦ n K n* in the x-sector and Y ↦ ū_R² m Y mᵗ in the y-sector, n = diag(u_R, u_L).
inline VevTransformReport vev_transform_check(const FiniteSpectralTriple& t, const ComplexMatrix& d_vev,
                                              const AlgebraElement& u, double tol = kDefaultTol) {
  if (!t.algebra().matches(u) || !a_ev().contains(u, tol)) {
    throw std::invalid_argument("vev_transform_check: u is not in A_ev");
  }
  if (!is_unitary(u, tol)) throw std::invalid_argument("vev_transform_check: u is not unitary");
  if (d_vev.rows() != toy::kDimH || d_vev.cols() != toy::kDimH) throw ShapeError("vev_transform_check: d_vev must be 8x8");
  const ComplexMatrix uu = gauge_unitary(t, u);
  const ComplexMatrix moved = uu * d_vev * uu.adjoint();

  const ComplexMatrix& n = u.blocks[0];
  const ComplexMatrix& m = u.blocks[1];
  ComplexMatrix k(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) k(a, b) = d_vev(2 * a, 2 * b);
  }
  const ComplexMatrix k_new = n * k * n.adjoint();
  const Complex ur = n(0, 0);
  const ComplexMatrix y_new = std::conj(ur) * std::conj(ur) * m * toy::y_block(d_vev) * m.transpose();
  ComplexMatrix predicted = zeros(toy::kDimH, toy::kDimH);
  predicted.block(0, 0, 4, 4) = kron(k_new, identity(2));
  predicted.block(toy::kPrimed, toy::kPrimed, 4, 4) = kron(k_new.conjugate(), identity(2));
  predicted.block(toy::kPrimed, 0, 2, 2) = y_new;
  predicted.block(0, toy::kPrimed, 2, 2) = y_new.adjoint();

  VevTransformReport rep;
  rep.residual = (moved - d_vev).norm();
  rep.predicted_residual = (predicted - d_vev).norm();
  rep.formula_mismatch = (moved - predicted).norm();
  return rep;
}

// ---------------------------------------------------------------------------
// Grids

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int points = 101;

  double at(int i) const { return points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1); }
  double spacing() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
};

struct GridSample {
  double c1, c2, value;
};

/// Row-major over (c1, c2), c2 fastest.
inline std::vector<GridSample> scan_grid(const std::function<double(double, double)>& f, const GridAxis& a1,
                                         const GridAxis& a2) {
  if (a1.points < 2 || a2.points < 2) throw std::invalid_argument("scan_grid: resolution must be >= 2");
  std::vector<GridSample> out;
  out.reserve(static_cast<std::size_t>(a1.points) * static_cast<std::size_t>(a2.points));
  for (int i = 0; i < a1.points; ++i) {
    for (int j = 0; j < a2.points; ++j) {
      const double x = a1.at(i), y = a2.at(j);
      out.push_back({x, y, f(x, y)});
    }
  }
  return out;
}

}  // namespace fluctus
