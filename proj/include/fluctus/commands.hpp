#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluctus/action.hpp"
#include "fluctus/io.hpp"
#include "fluctus/morita.hpp"
#include "fluctus/perturbation.hpp"
#include "fluctus/sampling.hpp"
#include "fluctus/spectral_triple.hpp"
#include "fluctus/toy_model.hpp"

namespace fluctus {

inline constexpr int kExitOk = 0;
inline constexpr int kExitExpectation = 1;
inline constexpr int kExitInput = 2;

struct CommandResult {
  json report;
  int exit_code = kExitOk;
};

namespace detail {

inline json axiom_json(const AxiomReport& r) {
  return {{"max_defect", r.max_defect}, {"worst_pair", {r.worst_a, r.worst_b}}, {"tol", r.tol}, {"passed", r.passed}};
}

inline json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json mat_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

inline json field_json(const FieldPoint& f) {
  return {{"x", to_json(f.x)}, {"v1", to_json(f.v1)}, {"v2", to_json(f.v2)}};
}

class Expectations {
 public:
  void add(const std::string& name, bool expected, bool observed) {
    items_.push_back({{"name", name}, {"expected", expected}, {"observed", observed}, {"met", expected == observed}});
    if (expected != observed) ok_ = false;
  }
  void require(const std::string& name, bool ok, json detail = json()) {
    json j = {{"name", name}, {"met", ok}};
    if (!detail.is_null()) j["detail"] = std::move(detail);
    items_.push_back(std::move(j));
    if (!ok) ok_ = false;
  }
  bool ok() const { return ok_; }
  json to_json() const { return items_; }

 private:
  json items_ = json::array();
  bool ok_ = true;
};

inline double first_order_tol(const FiniteSpectralTriple& t, double tol) { return tol * std::max(1.0, t.d().norm()); }

}  // namespace detail

// ---------------------------------------------------------------------------

inline CommandResult cmd_check(const Model& m, double tol = kDefaultTol) {
  const FiniteSpectralTriple& t = m.triple;
  const double ftol = detail::first_order_tol(t, tol);
  json rep;
  rep["algebra"] = t.algebra().name();
  const AxiomReport z = check_zeroth_order(t, std::nullopt, tol);
  const AxiomReport zf = check_zeroth_order(t, AlgebraSpec(t.algebra().sizes(), "full"), tol);
  const AxiomReport f = check_first_order(t, std::nullopt, ftol);
  rep["zeroth_order"] = detail::axiom_json(z);
  rep["zeroth_order_full_algebra"] = detail::axiom_json(zf);
  rep["first_order_full"] = detail::axiom_json(f);
  json subs = json::object();
  std::map<std::string, bool> sub_pass;
  for (const auto& [name, spec] : m.subalgebras) {
    const AxiomReport r = check_first_order(t, spec, ftol);
    subs[name] = detail::axiom_json(r);
    sub_pass[name] = r.passed;
  }
  rep["first_order"] = subs;
  const KOReport ko = check_ko_signs(t, tol);
  rep["ko_signs"] = {{"declared", {t.signs().eps_J, t.signs().eps_D, t.signs().eps_gamma}},
                     {"j_squared_residual", ko.j_squared},
                     {"j_d_residual", ko.j_d},
                     {"j_gamma_residual", ko.j_gamma},
                     {"passed", ko.passed}};

  detail::Expectations ex;
  const json& e = m.expect;
  auto flag = [&](const char* key, bool observed) {
    if (e.contains(key) && e[key].is_boolean()) ex.add(key, e[key].get<bool>(), observed);
  };
  flag("zeroth_order", z.passed);
  flag("zeroth_order_full_algebra", zf.passed);
  flag("first_order_full", f.passed);
  flag("ko_signs", ko.passed);
  if (e.contains("first_order") && e["first_order"].is_object()) {
    for (auto it = e["first_order"].begin(); it != e["first_order"].end(); ++it) {
      if (!it.value().is_boolean()) continue;
      const auto found = sub_pass.find(it.key());
      if (found == sub_pass.end()) {
        ex.require("first_order." + it.key(), false, "no such subalgebra");
      } else {
        ex.add("first_order." + it.key(), it.value().get<bool>(), found->second);
      }
    }
  }
  rep["expectations"] = ex.to_json();
  return {rep, ex.ok() ? kExitOk : kExitExpectation};
}

inline CommandResult cmd_fluctuate(const Model& m, const std::optional<json>& pert, std::uint64_t seed,
                                   double tol = kDefaultTol) {
  const FiniteSpectralTriple& t = m.triple;
  json rep;
  std::optional<PertElement> p;
  if (pert) {
    p = parse_pert(*pert, t.algebra(), tol);
  } else {
    Rng rng(seed);
    p = random_pert(t.algebra(), rng);
    rep["pert"] = pert_to_json(p->pairs());
    rep["pert_source"] = "random";
  }
  ComplexMatrix dp;
  try {
    dp = fluctuate(t, eta_one_form(*p), tol);
  } catch (const FluctuationError& e) {
    throw InputError("pert", e.what());
  }
  rep["D_prime"] = to_json(dp);
  rep["self_adjoint_residual"] = hermitian_residual(dp);
  rep["combined_residual"] = rel_diff(fluctuate_combined(t, *p), dp);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (dp + dp.adjoint()), Eigen::EigenvaluesOnly);
  rep["eigenvalues"] = detail::vec_json(es.eigenvalues());
  if (m.toy) {
    const FieldPoint f = extract_fields(eta_one_form(*p), tol);
    rep["fields"] = detail::field_json(f);
    rep["closed_form_residual"] = rel_diff(closed_dirac(*m.toy, f), dp);
  }
  return {rep, kExitOk};
}

// ---------------------------------------------------------------------------
// Action commands

namespace detail {

/// The Figure-1 check: on the grid row closest to σ₂ = 0, the argmin over σ₁ > −1 lies within one
/// grid step of −1 + √w.
inline json fig1_row_check(const std::vector<GridSample>& rows, const GridAxis& a1, const GridAxis& a2, double target,
                           bool& ok) {
  int jbest = 0;
  for (int j = 1; j < a2.points; ++j) {
    if (std::abs(a2.at(j)) < std::abs(a2.at(jbest))) jbest = j;
  }
  double best = std::numeric_limits<double>::infinity();
  double arg = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < a1.points; ++i) {
    const GridSample& s = rows[static_cast<std::size_t>(i * a2.points + jbest)];
    if (s.c1 > -1.0 && s.value < best) {
      best = s.value;
      arg = s.c1;
    }
  }
  ok = std::isfinite(arg) && std::abs(arg - target) <= a1.spacing() * (1.0 + 1e-9);
  return {{"row_sigma2", a2.at(jbest)}, {"argmin_sigma1", arg}, {"value", best}, {"target_sigma1", target},
          {"grid_step", a1.spacing()}, {"passed", ok}};
}

inline json grid_argmin(const std::vector<GridSample>& rows) {
  const auto it = std::min_element(rows.begin(), rows.end(), [](const GridSample& a, const GridSample& b) {
    return a.value < b.value;
  });
  return {{"coord1", it->c1}, {"coord2", it->c2}, {"V", it->value}};
}

}  // namespace detail

struct ScanOutput {
  std::vector<GridSample> fig1;
  std::vector<GridSample> fig2;
};

/// Figure 1: V(X = 0, σ₁, σ₂). Figure 2: V(X = Re + i·Im, σ₁ = −1 + √w, σ₂ = 0).
inline ScanOutput potential_scan(const RunConfig& c) {
  const ToyParams p = c.toy;
  const ActionParams ap = c.action;
  const double sw = std::sqrt(vev_w(p, ap));
  ScanOutput out;
  out.fig1 = scan_grid([&](double s1, double s2) { return v_closed(p, ap, FieldPoint{0.0, 1.0 + s1, s2}); },
                       c.fig1_s1, c.fig1_s2);
  out.fig2 = scan_grid([&](double re, double im) { return v_closed(p, ap, FieldPoint{{re, im}, sw, 0.0}); },
                       c.fig2_re, c.fig2_im);
  return out;
}

inline CommandResult cmd_scan(const RunConfig& c, const std::optional<std::string>& out_dir) {
  const ScanOutput s = potential_scan(c);
  json rep;
  const double w = vev_w(c.toy, c.action);
  bool ok1 = false;
  rep["fig1"] = {{"argmin", detail::grid_argmin(s.fig1)},
                 {"sigma2_zero_row", detail::fig1_row_check(s.fig1, c.fig1_s1, c.fig1_s2, -1.0 + std::sqrt(w), ok1)}};
  const json a2 = detail::grid_argmin(s.fig2);
  const double r_expected = std::sqrt(c.action.f2 * c.action.lambda * c.action.lambda / (c.action.f0 * std::norm(c.toy.k_x)));
  const double r_found = std::hypot(a2["coord1"].get<double>(), a2["coord2"].get<double>());
  const double diag = std::hypot(c.fig2_re.spacing(), c.fig2_im.spacing());
  const bool ok2 = std::abs(r_found - r_expected) <= diag;
  rep["fig2"] = {{"argmin", a2}, {"argmin_radius", r_found}, {"expected_radius", r_expected}, {"passed", ok2}};
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    const std::string f1 = (std::filesystem::path(*out_dir) / "fig1.csv").string();
    const std::string f2 = (std::filesystem::path(*out_dir) / "fig2.csv").string();
    write_csv_file(f1, s.fig1);
    write_csv_file(f2, s.fig2);
    rep["files"] = {f1, f2};
  }
  return {rep, ok1 && ok2 ? kExitOk : kExitExpectation};
}

namespace detail {

inline json critical_point_json(const CriticalPoint& cp) {
  return {{"point", vec_json(cp.point)},
          {"value", cp.value},
          {"gradient_norm", cp.gradient_norm},
          {"hessian", mat_json(cp.hessian)},
          {"classification", to_string(cp.classification)},
          {"degenerate_directions", cp.degenerate_directions},
          {"full_classification", to_string(cp.full_classification)},
          {"stabilizer_dim", cp.stabilizer_dim}};
}

inline json minimize_json(MinimizeResult& r, const FiniteSpectralTriple& t, const ToyParams& p) {
  const AlgebraSpec ev = a_ev();
  json pts = json::array();
  for (auto& cp : r.points) {
    cp.stabilizer_dim = stabilizer_dim(t, closed_dirac(p, field_from_real(cp.point)), ev);
    pts.push_back(critical_point_json(cp));
  }
  json fails = json::array();
  for (const auto& f : r.failures) fails.push_back({{"start", f.start}, {"reason", f.reason}, {"gradient_norm", f.gradient_norm}});
  return {{"points", pts}, {"failures", fails}};
}

inline double v_norm2(const Eigen::VectorXd& c) { return (1.0 + c(1)) * (1.0 + c(1)) + c(2) * c(2); }

}  // namespace detail

struct BruteForceMin {
  double value = 0.0;
  double x2 = 0.0;
  double v2 = 0.0;
};

/// Exhaustive grid over (|X|², |v|²) ∈ [0, hi]², `cells` points per axis.
inline BruteForceMin brute_force_min(const ToyParams& p, const ActionParams& ap, double hi = 4.0, int cells = 4001) {
  const auto k = detail::coefficients(p, ap);
  BruteForceMin best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (int i = 0; i < cells; ++i) {
    const long double r = hi * static_cast<long double>(i) / (cells - 1);
    for (int j = 0; j < cells; ++j) {
      const long double pv = hi * static_cast<long double>(j) / (cells - 1);
      const double v = static_cast<double>(detail::v_rq(k, r, pv * pv));
      if (v < best.value) best = {v, static_cast<double>(r), static_cast<double>(pv)};
    }
  }
  return best;
}

inline CommandResult cmd_minimize(const RunConfig& c) {
  const ToyParams p = c.toy;
  const ActionParams ap = c.action;
  const Objective obj = toy_objective(p, ap);
  const FiniteSpectralTriple t = build_toy(p);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double lam4 = std::pow(ap.lambda, 4);
  const double w = vev_w(p, ap);
  const double v_constrained = -ap.f2 * ap.f2 * lam4 / (ap.f0 * pi2);
  const double v_global = -4.0 * ap.f2 * ap.f2 * lam4 / (ap.f0 * pi2);
  const double x2_global = global_x2(p, ap);
  detail::Expectations ex;
  json rep;

  MinimizeResult con = minimize(obj, c.starts, c.seed, {0.0, std::nullopt, std::nullopt});
  MinimizeResult rep_line = minimize(obj, c.starts, c.seed, {0.0, std::nullopt, 0.0});
  MinimizeResult glob = minimize(obj, c.starts, c.seed);

  json cj = detail::minimize_json(con, t, p);
  if (!con.points.empty()) {
    const CriticalPoint& best = con.points.front();
    const double v2 = detail::v_norm2(best.point);
    cj["best"] = {{"v_norm2", v2}, {"expected_v_norm2", w}, {"value", best.value}, {"expected_value", v_constrained}};
    ex.require("constrained |v|^2 = w", std::abs(v2 - w) <= 1e-6, v2);
    ex.require("constrained V", std::abs(best.value - v_constrained) <= 1e-8 * std::abs(v_constrained), best.value);
  } else {
    ex.require("constrained minimization converged", false);
  }
  json rl = detail::minimize_json(rep_line, t, p);
  const double s1_expected = -1.0 + std::sqrt(w);
  std::optional<double> s1_found;
  for (const auto& cp : rep_line.points) {
    if (cp.point(1) > -1.0 && (!s1_found || std::abs(cp.point(1) - s1_expected) < std::abs(*s1_found - s1_expected))) {
      s1_found = cp.point(1);
    }
  }
  rl["representative_s1"] = s1_found ? json(*s1_found) : json();
  rl["expected_s1"] = s1_expected;
  ex.require("representative s1 = -1 + sqrt(w)", s1_found && std::abs(*s1_found - s1_expected) <= 1e-6);
  cj["representative"] = rl;
  rep["constrained_x0"] = cj;

  json gj = detail::minimize_json(glob, t, p);
  const BruteForceMin bf = brute_force_min(p, ap, std::max(4.0, 2.0 * std::max(x2_global, w)));
  gj["brute_force"] = {{"value", bf.value}, {"x_norm2", bf.x2}, {"v_norm2", bf.v2}};
  gj["expected"] = {{"value", v_global}, {"x_norm2", x2_global}, {"v_norm2", 0.0}};
  if (!glob.points.empty()) {
    const CriticalPoint& best = glob.points.front();
    const double x2 = best.point(0) * best.point(0);
    const double v2 = detail::v_norm2(best.point);
    ex.require("global V_min", std::abs(best.value - v_global) <= 1e-6 * std::abs(v_global), best.value);
    ex.require("global |X|^2", std::abs(x2 - x2_global) <= 1e-6, x2);
    ex.require("global v = 0", v2 <= 1e-6, v2);
    ex.require("brute force agrees", bf.value >= best.value - 1e-9 && std::abs(bf.value - best.value) <= 1e-6 * std::abs(v_global),
               bf.value);
  } else {
    ex.require("global minimization converged", false);
  }
  rep["global"] = gj;
  rep["expectations"] = ex.to_json();
  return {rep, ex.ok() ? kExitOk : kExitExpectation};
}

struct HessianCheck {
  Eigen::VectorXd point;
  GradHess fd;
  Eigen::MatrixXd analytic;
  Eigen::Vector3d reference;
  bool comparable = false;  // |k_x| = |k_y|
  bool passed = false;
  double max_rel_error = 0.0;
  double zero_entry = 0.0;
  double max_off_diagonal = 0.0;
};

/// Finite-difference Hessian at (0, −1 + √w, 0) against diag(−2w², 8w³, 0)·f₀|k_y|⁴/π².
inline HessianCheck hessian_check(const ToyParams& p, const ActionParams& ap, double step = 1e-5) {
  const Objective obj = toy_objective(p, ap);
  HessianCheck h;
  h.point = Eigen::Vector3d(0.0, -1.0 + std::sqrt(vev_w(p, ap)), 0.0);
  h.fd = grad_hess(obj.value, h.point, step);
  h.analytic = obj.hessian(h.point);
  h.reference = reference_hessian_diagonal(p, ap);
  h.comparable = std::abs(std::abs(p.k_x) - std::abs(p.k_y)) <= 1e-12 * std::max(1.0, std::abs(p.k_y));
  for (int i = 0; i < 2; ++i) {
    h.max_rel_error = std::max(h.max_rel_error, std::abs(h.fd.hessian(i, i) - h.reference(i)) / std::abs(h.reference(i)));
  }
  h.zero_entry = std::abs(h.fd.hessian(2, 2));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) h.max_off_diagonal = std::max(h.max_off_diagonal, std::abs(h.fd.hessian(i, j)));
    }
  }
  h.passed = h.max_rel_error <= 1e-4 && h.zero_entry < 1e-6 && h.max_off_diagonal < 1e-6 && h.fd.gradient.norm() < 1e-8;
  return h;
}

inline CommandResult cmd_hessian(const RunConfig& c) {
  const HessianCheck h = hessian_check(c.toy, c.action);
  json rep;
  rep["point"] = detail::vec_json(h.point);
  rep["gradient"] = detail::vec_json(h.fd.gradient);
  rep["hessian_fd"] = detail::mat_json(h.fd.hessian);
  rep["hessian_analytic"] = detail::mat_json(h.analytic);
  rep["reference_diagonal"] = detail::vec_json(h.reference);
  rep["classification_fd"] = to_string(classify(h.fd.hessian).kind);
  const Eigen::MatrixXd constrained = h.fd.hessian.bottomRightCorner(2, 2);
  rep["classification_x_fixed"] = to_string(classify(constrained).kind);

  const Objective full = toy_objective_complex(c.toy, c.action);
  Eigen::VectorXd c6 = Eigen::VectorXd::Zero(6);
  c6(1) = h.point(1);
  const GradHess h6 = grad_hess(full.value, c6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es6(h6.hessian);
  rep["hessian_complex_6x6"] = detail::mat_json(h6.hessian);
  rep["hessian_complex_eigenvalues"] = detail::vec_json(es6.eigenvalues());

  rep["max_rel_error"] = h.max_rel_error;
  rep["zero_entry"] = h.zero_entry;
  rep["comparable"] = h.comparable;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double direct_xx = -4.0 * c.action.f2 * c.action.lambda * c.action.lambda * std::norm(c.toy.k_x) / pi2;
  rep["xx_entry"] = {{"finite_difference", h.fd.hessian(0, 0)}, {"direct_formula", direct_xx}, {"reference", h.reference(0)},
                     {"discrepancy", h.fd.hessian(0, 0) - h.reference(0)}};
  if (!h.comparable) {
    rep["note"] = "|k_x| != |k_y|: the reference xx entry is not expected to match; discrepancy reported only";
    const bool rest = std::abs(h.fd.hessian(1, 1) - h.reference(1)) <= 1e-4 * std::abs(h.reference(1)) &&
                      h.zero_entry < 1e-6 && h.fd.gradient.norm() < 1e-8;
    rep["passed"] = rest;
    return {rep, rest ? kExitOk : kExitExpectation};
  }
  rep["passed"] = h.passed;
  return {rep, h.passed ? kExitOk : kExitExpectation};
}

struct StabilizerChain {
  int at_zero = 0;
  int at_sigma = 0;
  int at_sigma_x = 0;
  ComplexMatrix d_sigma;
  ComplexMatrix d_sigma_x;
};

inline StabilizerChain stabilizer_chain(const ToyParams& p, const ActionParams& ap) {
  const FiniteSpectralTriple t = build_toy(p);
  const AlgebraSpec ev = a_ev();
  const double sw = std::sqrt(vev_w(p, ap));
  const double x = std::sqrt(ap.f2 * ap.lambda * ap.lambda / (ap.f0 * std::norm(p.k_x)));
  StabilizerChain s;
  s.d_sigma = closed_dirac(p, FieldPoint{0.0, sw, 0.0});
  s.d_sigma_x = closed_dirac(p, FieldPoint{x, sw, 0.0});
  s.at_zero = stabilizer_dim(t, zeros(toy::kDimH, toy::kDimH), ev);
  s.at_sigma = stabilizer_dim(t, s.d_sigma, ev);
  s.at_sigma_x = stabilizer_dim(t, s.d_sigma_x, ev);
  return s;
}

inline CommandResult cmd_stabilizer(const RunConfig& c) {
  const StabilizerChain s = stabilizer_chain(c.toy, c.action);
  const FiniteSpectralTriple t = build_toy(c.toy);
  json rep;
  rep["dims"] = {{"zero", s.at_zero}, {"sigma_vev", s.at_sigma}, {"sigma_and_x_vev", s.at_sigma_x}};
  rep["expected"] = {{"zero", 6}, {"sigma_vev", 3}, {"sigma_and_x_vev", 2}};
  const Complex ph = std::polar(1.0, 0.7);
  const AlgebraElement stab = toy::element(ph, std::polar(1.0, -0.4), ph, 0.0, 0.0, std::polar(1.0, 1.1));
  const double th = 0.3;
  const AlgebraElement rot = toy::element(1.0, 1.0, std::cos(th), -std::sin(th), std::sin(th), std::cos(th));
  json checks = json::array();
  for (const auto& [name, u] : {std::pair<const char*, AlgebraElement>{"diagonal_stabilizer", stab},
                                std::pair<const char*, AlgebraElement>{"rotation_0.3", rot}}) {
    const VevTransformReport r = vev_transform_check(t, s.d_sigma, u);
    checks.push_back({{"u", name}, {"residual", r.residual}, {"predicted_residual", r.predicted_residual},
                      {"formula_mismatch", r.formula_mismatch}});
  }
  rep["vev_transform"] = checks;
  const bool ok = s.at_zero == 6 && s.at_sigma == 3 && s.at_sigma_x == 2;
  rep["passed"] = ok;
  return {rep, ok ? kExitOk : kExitExpectation};
}

// ---------------------------------------------------------------------------
// Morita and semigroup verification

struct MoritaSweep {
  std::vector<MoritaReport> reports;
  double max_assoc = 0.0;
  double max_assoc_rel = 0.0;
  double max_idempotent = 0.0;
  double max_self_adjoint = 0.0;
  double max_zeroth = 0.0;
  double max_j_squared = 0.0;
  std::set<int> eps_d;
  std::set<int> eps_gamma;
};

/// `samples` seeded idempotents (start k uses seed + k, n = 1 + k mod 3), each checked with the
/// Grassmannian connection and with a random compressed perturbation.
inline MoritaSweep morita_sweep(const FiniteSpectralTriple& t, int samples, std::uint64_t seed) {
  MoritaSweep s;
  for (int k = 0; k < samples; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k));
    MoritaData m;
    m.n = 1 + k % 3;
    m.e = random_projection(t.algebra(), m.n, rng);
    for (int with_conn = 0; with_conn < 2; ++with_conn) {
      if (with_conn) m.conn_form = random_connection(t.algebra(), m.e, m.n, rng);
      const MoritaReport r = morita_report(t, m, rng);
      s.max_assoc = std::max(s.max_assoc, r.assoc_residual);
      s.max_assoc_rel = std::max(s.max_assoc_rel, r.assoc_residual / r.scale);
      s.max_idempotent = std::max(s.max_idempotent, r.idempotent_identity);
      s.max_self_adjoint = std::max(s.max_self_adjoint, r.corner_self_adjoint / r.scale);
      s.max_zeroth = std::max(s.max_zeroth, r.zeroth_order);
      s.max_j_squared = std::max(s.max_j_squared, r.j_squared_residual);
      if (r.eps_d_residual <= 1e-9 * r.scale) s.eps_d.insert(r.measured_eps_d);
      if (r.eps_gamma_residual <= 1e-9) s.eps_gamma.insert(r.measured_eps_gamma);
      s.reports.push_back(r);
    }
  }
  return s;
}

inline CommandResult cmd_morita_check(const FiniteSpectralTriple& t, const RunConfig& c) {
  const MoritaSweep s = morita_sweep(t, c.morita_samples, c.seed);
  json rows = json::array();
  for (const auto& r : s.reports) {
    rows.push_back({{"n", r.n}, {"connection", r.with_connection}, {"assoc_residual", r.assoc_residual},
                    {"scale", r.scale}, {"idempotent_identity", r.idempotent_identity},
                    {"corner_self_adjoint", r.corner_self_adjoint}, {"leak", r.leak},
                    {"j_squared_residual", r.j_squared_residual}, {"measured_eps_D", r.measured_eps_d},
                    {"measured_eps_gamma", r.measured_eps_gamma}, {"zeroth_order", r.zeroth_order}});
  }
  json rep;
  rep["samples"] = rows;
  rep["max_assoc_residual"] = s.max_assoc;
  rep["max_assoc_relative"] = s.max_assoc_rel;
  rep["max_idempotent_identity"] = s.max_idempotent;
  rep["max_corner_self_adjoint_relative"] = s.max_self_adjoint;
  rep["max_zeroth_order"] = s.max_zeroth;
  rep["max_j_squared_residual"] = s.max_j_squared;
  rep["measured_eps_D"] = std::vector<int>(s.eps_d.begin(), s.eps_d.end());
  rep["measured_eps_gamma"] = std::vector<int>(s.eps_gamma.begin(), s.eps_gamma.end());
  const double scale_d = std::max(1.0, t.d().norm());
  const bool ok = s.max_assoc_rel <= c.tol && s.max_idempotent <= c.tol * scale_d && s.max_self_adjoint <= c.tol &&
                  s.max_zeroth <= c.tol && s.max_j_squared <= c.tol;
  rep["passed"] = ok;
  return {rep, ok ? kExitOk : kExitExpectation};
}

struct SemigroupSweep {
  double gauge = 0.0;          // ‖U D(η(p)) U* − D(η(γ_u p))‖ / ‖D'‖
  double transitivity = 0.0;   // relative to max(1, ‖D(η(qp))‖)
  double combined = 0.0;       // rel_diff(fluctuate_combined, fluctuate∘η)
  double mu_mult = 0.0;        // rel_diff(C(μ(qp)), C(μ(q))·C(μ(p)))
  double associativity = 0.0;  // rel_diff of canonical forms of (pq)r and p(qr)
  double normalization = 0.0;  // largest normalization residual over products and affine combinations
  double a2_gauge = 0.0;       // A₍₂₎ gauge law, relative
  int samples = 0;
};

inline SemigroupSweep semigroup_sweep(const FiniteSpectralTriple& t, int samples, std::uint64_t seed) {
  SemigroupSweep s;
  s.samples = samples;
  const AlgebraSpec& spec = t.algebra();
  for (int k = 0; k < samples; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k));
    const PertElement p = random_pert(spec, rng);
    const PertElement q = random_pert(spec, rng);
    const PertElement r = random_pert(spec, rng, 1);
    const AlgebraElement u = random_unitary(spec, rng);

    const ComplexMatrix uu = gauge_unitary(t, u);
    const ComplexMatrix dp = fluctuate(t, eta_one_form(p));
    const ComplexMatrix dg = fluctuate(t, eta_one_form(gauge_transform(p, u)));
    s.gauge = std::max(s.gauge, (uu * dp * uu.adjoint() - dg).norm() / std::max(1.0, dg.norm()));

    const PertElement qp = pert_mul(q, p);
    const ComplexMatrix dqp = fluctuate_combined(t, qp);
    s.transitivity = std::max(s.transitivity, check_transitivity(t, p, q) / std::max(1.0, dqp.norm()));
    s.combined = std::max(s.combined, rel_diff(fluctuate_combined(t, p), dp));
    s.mu_mult = std::max(s.mu_mult, rel_diff(canonical_form(mu(qp, t)), canonical_form(mu(q, t)) * canonical_form(mu(p, t))));
    s.associativity = std::max(s.associativity, rel_diff(canonical_form(pert_mul(pert_mul(p, q), r)),
                                                         canonical_form(pert_mul(p, pert_mul(q, r)))));
    s.normalization = std::max({s.normalization, normalization_residual(spec, qp.pairs()),
                                normalization_residual(spec, affine_combine(p, q, 2.0).pairs())});
    const UniversalOneForm w = eta_one_form(p);
    const ComplexMatrix a2g = a2(t, gauge_one_form(spec, w, u));
    s.a2_gauge = std::max(s.a2_gauge, rel_diff(a2g, a2_gauge_prediction(t, w, u)));
  }
  return s;
}

inline CommandResult cmd_semigroup_verify(const FiniteSpectralTriple& t, const RunConfig& c) {
  const SemigroupSweep s = semigroup_sweep(t, c.semigroup_samples, c.seed);
  json rep = {{"samples", s.samples},
              {"gauge_covariance", s.gauge},
              {"transitivity", s.transitivity},
              {"combined_identity", s.combined},
              {"mu_multiplicativity", s.mu_mult},
              {"associativity", s.associativity},
              {"normalization", s.normalization},
              {"a2_gauge_law", s.a2_gauge},
              {"tol", c.tol}};
  const bool ok = s.gauge < c.tol && s.transitivity < c.tol && s.combined < c.tol && s.mu_mult < c.tol &&
                  s.associativity < c.tol && s.normalization < c.tol && s.a2_gauge < c.tol;
  rep["passed"] = ok;
  return {rep, ok ? kExitOk : kExitExpectation};
}

inline CommandResult cmd_export_toy(const ToyParams& p) {
  const Model m = toy_model(p);
  return {model_to_json(m.triple, m.subalgebras, m.expect, m.toy), kExitOk};
}

}  // namespace fluctus
