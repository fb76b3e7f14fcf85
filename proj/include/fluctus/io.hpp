#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluctus/action.hpp"
#include "fluctus/algebra.hpp"
#include "fluctus/matrix_core.hpp"
#include "fluctus/perturbation.hpp"
#include "fluctus/spectral_triple.hpp"
#include "fluctus/toy_model.hpp"

namespace fluctus {

using json = nlohmann::json;

/// Malformed or invalid user input; `path` names the offending field.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& path, const std::string& msg)
      : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// ---------------------------------------------------------------------------
// Scalars and matrices

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const AlgebraElement& a) {
  json blocks = json::array();
  for (const auto& b : a.blocks) blocks.push_back(to_json(b));
  return blocks;
}

inline double parse_real(const json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(path, "expected a number");
  return j.get<double>();
}

inline int parse_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError(path, "expected an integer");
  return j.get<int>();
}

/// [re, im] or a bare real number.
inline Complex parse_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError(path, "expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ComplexMatrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw InputError(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw InputError(path + "[0]", "expected a non-empty row");
  const std::size_t cols = j[0].size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) throw InputError(rp, "ragged row, expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_complex(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

inline AlgebraElement parse_element(const json& j, const AlgebraSpec& spec, const std::string& path) {
  if (!j.is_array() || j.size() != spec.summand_count()) {
    throw InputError(path, "expected " + std::to_string(spec.summand_count()) + " blocks");
  }
  AlgebraElement a;
  for (std::size_t s = 0; s < j.size(); ++s) a.blocks.push_back(parse_matrix(j[s], path + "[" + std::to_string(s) + "]"));
  if (!spec.matches(a)) throw InputError(path, "block shapes do not match the algebra summand sizes");
  return a;
}

/// Parses text, turning parse errors into "line L, column C" diagnostics.
inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source, "JSON parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                                 ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Model files

inline std::string to_string(RepMode m) {
  switch (m) {
    case RepMode::plain: return "plain";
    case RepMode::transpose: return "transpose";
    case RepMode::conjugate: return "conjugate";
    case RepMode::conjugate_transpose: return "conjugate_transpose";
  }
  return "plain";
}

inline RepMode parse_rep_mode(const json& j, const std::string& path) {
  if (!j.is_string()) throw InputError(path, "expected a string");
  const std::string s = j.get<std::string>();
  if (s == "plain") return RepMode::plain;
  if (s == "transpose") return RepMode::transpose;
  if (s == "conjugate") return RepMode::conjugate;
  if (s == "conjugate_transpose" || s == "conjugate-transpose") return RepMode::conjugate_transpose;
  throw InputError(path, "unknown mode '" + s + "'");
}

struct Model {
  FiniteSpectralTriple triple;
  std::map<std::string, AlgebraSpec> subalgebras;
  json expect = json::object();
  std::optional<ToyParams> toy;  // set when the model is the toy model
};

inline json algebra_to_json(const AlgebraSpec& spec) {
  json j;
  j["summands"] = spec.sizes();
  if (!spec.name().empty()) j["name"] = spec.name();
  if (spec.constraint_basis()) {
    json basis = json::array();
    for (const auto& b : *spec.constraint_basis()) basis.push_back(to_json(b));
    j["constraints"] = basis;
  }
  return j;
}

inline AlgebraSpec parse_algebra(const json& j, const std::string& path) {
  if (!j.is_object()) throw InputError(path, "expected an object");
  if (!j.contains("summands")) throw InputError(path + ".summands", "missing");
  const json& s = j["summands"];
  if (!s.is_array() || s.empty()) throw InputError(path + ".summands", "expected a non-empty integer array");
  std::vector<int> sizes;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int n = parse_int(s[k], path + ".summands[" + std::to_string(k) + "]");
    if (n < 1) throw InputError(path + ".summands[" + std::to_string(k) + "]", "summand sizes must be >= 1");
    sizes.push_back(n);
  }
  const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
  if (!j.contains("constraints") || j["constraints"].is_null()) return AlgebraSpec(sizes, name);
  const AlgebraSpec full(sizes, name);
  const json& c = j["constraints"];
  if (!c.is_array()) throw InputError(path + ".constraints", "expected an array of basis elements");
  std::vector<AlgebraElement> basis;
  for (std::size_t k = 0; k < c.size(); ++k) {
    basis.push_back(parse_element(c[k], full, path + ".constraints[" + std::to_string(k) + "]"));
  }
  try {
    return AlgebraSpec(sizes, std::move(basis), name);
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ".constraints", e.what());
  }
}

inline json model_to_json(const FiniteSpectralTriple& t, const std::map<std::string, AlgebraSpec>& subalgebras = {},
                          const json& expect = json(), const std::optional<ToyParams>& toy = std::nullopt) {
  json j;
  j["algebra"] = algebra_to_json(t.algebra());
  j["dim_H"] = t.dim_h();
  json rb = json::array();
  for (const auto& b : t.rep()) {
    rb.push_back({{"summand", b.summand_index},
                  {"left_mult_dim", b.left_mult_dim},
                  {"right_mult_dim", b.right_mult_dim},
                  {"mode", to_string(b.mode)},
                  {"offset", b.offset}});
  }
  j["rep_blocks"] = rb;
  j["D"] = to_json(t.d());
  j["J"] = {{"matrix", to_json(t.j().matrix())}, {"note", "antilinear"}};
  j["gamma"] = to_json(t.gamma());
  j["ko_signs"] = {{"eps_J", t.signs().eps_J}, {"eps_D", t.signs().eps_D}, {"eps_gamma", t.signs().eps_gamma}};
  if (!subalgebras.empty()) {
    json subs = json::object();
    for (const auto& [name, spec] : subalgebras) subs[name] = algebra_to_json(spec);
    j["subalgebras"] = subs;
  }
  if (!expect.is_null()) j["expect"] = expect;
  if (toy) j["toy"] = {{"k_x", to_json(toy->k_x)}, {"k_y", to_json(toy->k_y)}};
  return j;
}

inline Model parse_model(const json& j) {
  if (!j.is_object()) throw InputError("", "model must be a JSON object");
  for (const char* key : {"algebra", "dim_H", "rep_blocks", "D", "J", "gamma", "ko_signs"}) {
    if (!j.contains(key)) throw InputError(key, "missing");
  }
  AlgebraSpec algebra = parse_algebra(j["algebra"], "algebra");
  const int dim_h = parse_int(j["dim_H"], "dim_H");
  if (dim_h < 1) throw InputError("dim_H", "must be positive");

  const json& rbj = j["rep_blocks"];
  if (!rbj.is_array() || rbj.empty()) throw InputError("rep_blocks", "expected a non-empty array");
  std::vector<RepBlock> rep;
  for (std::size_t k = 0; k < rbj.size(); ++k) {
    const std::string p = "rep_blocks[" + std::to_string(k) + "]";
    const json& b = rbj[k];
    if (!b.is_object()) throw InputError(p, "expected an object");
    RepBlock blk;
    if (!b.contains("summand")) throw InputError(p + ".summand", "missing");
    const int si = parse_int(b["summand"], p + ".summand");
    if (si < 0) throw InputError(p + ".summand", "must be >= 0");
    blk.summand_index = static_cast<std::size_t>(si);
    blk.left_mult_dim = b.contains("left_mult_dim") ? parse_int(b["left_mult_dim"], p + ".left_mult_dim") : 1;
    blk.right_mult_dim = b.contains("right_mult_dim") ? parse_int(b["right_mult_dim"], p + ".right_mult_dim") : 1;
    blk.mode = b.contains("mode") ? parse_rep_mode(b["mode"], p + ".mode") : RepMode::plain;
    if (!b.contains("offset")) throw InputError(p + ".offset", "missing");
    blk.offset = parse_int(b["offset"], p + ".offset");
    rep.push_back(blk);
  }

  ComplexMatrix d = parse_matrix(j["D"], "D");
  const json& jj = j["J"];
  if (!jj.is_object() || !jj.contains("matrix")) throw InputError("J.matrix", "missing");
  ComplexMatrix jm = parse_matrix(jj["matrix"], "J.matrix");
  if (jm.rows() != jm.cols()) throw InputError("J.matrix", "must be square");
  ComplexMatrix gamma = parse_matrix(j["gamma"], "gamma");

  const json& ks = j["ko_signs"];
  if (!ks.is_object()) throw InputError("ko_signs", "expected an object");
  KOSigns signs;
  for (const auto& [key, field] : {std::pair<const char*, int*>{"eps_J", &signs.eps_J},
                                   std::pair<const char*, int*>{"eps_D", &signs.eps_D},
                                   std::pair<const char*, int*>{"eps_gamma", &signs.eps_gamma}}) {
    const std::string p = std::string("ko_signs.") + key;
    if (!ks.contains(key)) throw InputError(p, "missing");
    *field = parse_int(ks[key], p);
    if (*field != 1 && *field != -1) throw InputError(p, "must be +1 or -1");
  }

  std::optional<FiniteSpectralTriple> triple;
  try {
    triple.emplace(algebra, dim_h, rep, d, AntilinearOp(jm), gamma, signs);
  } catch (const std::invalid_argument& e) {
    throw InputError("model", e.what());
  }

  Model m{std::move(*triple), {}, json::object(), std::nullopt};
  if (j.contains("subalgebras")) {
    const json& subs = j["subalgebras"];
    if (!subs.is_object()) throw InputError("subalgebras", "expected an object of named algebras");
    for (auto it = subs.begin(); it != subs.end(); ++it) {
      AlgebraSpec s = parse_algebra(it.value(), "subalgebras." + it.key());
      if (!s.same_shape(m.triple.algebra())) throw InputError("subalgebras." + it.key(), "summand sizes differ from the algebra");
      m.subalgebras.emplace(it.key(), std::move(s));
    }
  }
  if (j.contains("expect")) {
    if (!j["expect"].is_object()) throw InputError("expect", "expected an object");
    m.expect = j["expect"];
  }
  if (j.contains("toy")) {
    const json& t = j["toy"];
    ToyParams p;
    if (t.contains("k_x")) p.k_x = parse_complex(t["k_x"], "toy.k_x");
    if (t.contains("k_y")) p.k_y = parse_complex(t["k_y"], "toy.k_y");
    m.toy = p;
  }
  return m;
}

inline Model load_model(const std::string& path) { return parse_model(read_json_file(path)); }

/// The built-in toy model with A_F and the matching expectations.
inline Model toy_model(const ToyParams& p) {
  Model m{build_toy(p), {{"A_F", a_f()}}, json::object(), p};
  const bool first_order = std::abs(p.k_y) == 0.0;
  m.expect = {{"zeroth_order", true}, {"ko_signs", true}, {"first_order_full", first_order}, {"first_order", {{"A_F", true}}}};
  return m;
}

// ---------------------------------------------------------------------------
// Perturbations

inline json pert_to_json(const std::vector<FormPair>& pairs) {
  json arr = json::array();
  for (const auto& p : pairs) arr.push_back({{"a", to_json(p.a)}, {"b", to_json(p.b)}});
  return {{"pairs", arr}};
}

inline std::vector<FormPair> parse_pairs(const json& j, const AlgebraSpec& spec, const std::string& path) {
  if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array()) throw InputError(path + ".pairs", "expected an array");
  std::vector<FormPair> out;
  const json& arr = j["pairs"];
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string p = path + ".pairs[" + std::to_string(k) + "]";
    if (!arr[k].is_object() || !arr[k].contains("a") || !arr[k].contains("b")) throw InputError(p, "expected {a, b}");
    out.push_back({parse_element(arr[k]["a"], spec, p + ".a"), parse_element(arr[k]["b"], spec, p + ".b")});
  }
  return out;
}

inline PertElement parse_pert(const json& j, const AlgebraSpec& spec, double tol = kDefaultTol) {
  std::vector<FormPair> pairs = parse_pairs(j, spec, "pert");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!spec.contains(pairs[k].a, tol) || !spec.contains(pairs[k].b, tol)) {
      throw InputError("pert.pairs[" + std::to_string(k) + "]", "element lies outside the algebra '" + spec.name() + "'");
    }
  }
  try {
    return PertElement::make(spec, std::move(pairs), tol);
  } catch (const std::invalid_argument& e) {
    throw InputError("pert", e.what());
  }
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  ToyParams toy;
  ActionParams action;
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  int starts = 32;
  int resolution = 201;
  GridAxis fig1_s1{-2.5, 0.5, 201};
  GridAxis fig1_s2{-1.5, 1.5, 201};
  GridAxis fig2_re{-2.0, 2.0, 201};
  GridAxis fig2_im{-2.0, 2.0, 201};
  int morita_samples = 20;
  int semigroup_samples = 50;
};

inline GridAxis parse_range(const json& j, const std::string& path, int points) {
  if (!j.is_array() || j.size() != 2) throw InputError(path, "expected [lo, hi]");
  GridAxis a{parse_real(j[0], path + "[0]"), parse_real(j[1], path + "[1]"), points};
  if (!(a.hi > a.lo)) throw InputError(path, "hi must exceed lo");
  return a;
}

inline RunConfig parse_config(const json& j) {
  RunConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw InputError("config", "expected an object");
  if (j.contains("k_x")) c.toy.k_x = parse_complex(j["k_x"], "k_x");
  if (j.contains("k_y")) c.toy.k_y = parse_complex(j["k_y"], "k_y");
  if (j.contains("f2")) c.action.f2 = parse_real(j["f2"], "f2");
  if (j.contains("f0")) c.action.f0 = parse_real(j["f0"], "f0");
  if (j.contains("lambda")) c.action.lambda = parse_real(j["lambda"], "lambda");
  try {
    c.action.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError("config", e.what());
  }
  if (j.contains("tol")) {
    c.tol = parse_real(j["tol"], "tol");
    if (!(c.tol > 0.0)) throw InputError("tol", "must be positive");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw InputError("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("starts")) {
    c.starts = parse_int(j["starts"], "starts");
    if (c.starts < 1) throw InputError("starts", "must be >= 1");
  }
  if (j.contains("morita_samples")) c.morita_samples = parse_int(j["morita_samples"], "morita_samples");
  if (j.contains("semigroup_samples")) c.semigroup_samples = parse_int(j["semigroup_samples"], "semigroup_samples");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (!g.is_object()) throw InputError("grid", "expected an object");
    if (g.contains("resolution")) {
      c.resolution = parse_int(g["resolution"], "grid.resolution");
      if (c.resolution < 2) throw InputError("grid.resolution", "must be >= 2");
    }
    for (GridAxis* a : {&c.fig1_s1, &c.fig1_s2, &c.fig2_re, &c.fig2_im}) a->points = c.resolution;
    auto fig = [&](const char* name, GridAxis& a1, GridAxis& a2) {
      if (!g.contains(name)) return;
      const json& f = g[name];
      const std::string p = std::string("grid.") + name;
      if (!f.is_object()) throw InputError(p, "expected an object");
      if (f.contains("c1")) a1 = parse_range(f["c1"], p + ".c1", c.resolution);
      if (f.contains("c2")) a2 = parse_range(f["c2"], p + ".c2", c.resolution);
    };
    fig("fig1", c.fig1_s1, c.fig1_s2);
    fig("fig2", c.fig2_re, c.fig2_im);
  }
  return c;
}

inline json config_to_json(const RunConfig& c) {
  return {{"k_x", to_json(c.toy.k_x)},
          {"k_y", to_json(c.toy.k_y)},
          {"f2", c.action.f2},
          {"f0", c.action.f0},
          {"lambda", c.action.lambda},
          {"tol", c.tol},
          {"seed", c.seed},
          {"starts", c.starts},
          {"morita_samples", c.morita_samples},
          {"semigroup_samples", c.semigroup_samples},
          {"grid",
           {{"resolution", c.resolution},
            {"fig1", {{"c1", {c.fig1_s1.lo, c.fig1_s1.hi}}, {"c2", {c.fig1_s2.lo, c.fig1_s2.hi}}}},
            {"fig2", {{"c1", {c.fig2_re.lo, c.fig2_re.hi}}, {"c2", {c.fig2_im.lo, c.fig2_im.hi}}}}}}};
}

// ---------------------------------------------------------------------------
// CSV

/// Header `coord1,coord2,V`, '.' decimal separator, '\n' line endings.
inline void write_csv(std::ostream& out, const std::vector<GridSample>& rows) {
  out.imbue(std::locale::classic());
  out << "coord1,coord2,V\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.c1 << ',' << r.c2 << ',' << r.value << '\n';
}

inline void write_csv_file(const std::string& path, const std::vector<GridSample>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path, "cannot open for writing");
  write_csv(out, rows);
}

}  // namespace fluctus
