#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fluctus/algebra.hpp"
#include "fluctus/matrix_core.hpp"
#include "fluctus/perturbation.hpp"

namespace fluctus {

using Rng = std::mt19937_64;

inline Complex random_complex(Rng& rng, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sigma = 1.0) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = random_complex(rng, sigma);
  }
  return m;
}

/// Gaussian coefficients over the spanning set, so constrained algebras are respected.
inline AlgebraElement random_element(const AlgebraSpec& spec, Rng& rng, double sigma = 1.0) {
  const auto span = spanning_set(spec);
  ComplexVector c(static_cast<Eigen::Index>(span.size()));
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = random_complex(rng, sigma);
  return combine(spec, span, c);
}

inline AlgebraElement random_self_adjoint(const AlgebraSpec& spec, Rng& rng, double sigma = 1.0) {
  const AlgebraElement x = random_element(spec, rng, sigma);
  return 0.5 * (x + adjoint(x));
}

inline AlgebraElement random_unitary(const AlgebraSpec& spec, Rng& rng, double sigma = 1.0) {
  const AlgebraElement x = random_element(spec, rng, sigma);
  return exp_antihermitian(0.5 * (x - adjoint(x)));
}

inline UniversalOneForm random_one_form(const AlgebraSpec& spec, Rng& rng, std::size_t n_pairs = 3,
                                        double sigma = 1.0) {
  UniversalOneForm w;
  for (std::size_t j = 0; j < n_pairs; ++j) {
    AlgebraElement a = random_element(spec, rng, sigma);
    AlgebraElement b = random_element(spec, rng, sigma);
    w.pairs.push_back({std::move(a), std::move(b)});
  }
  return w;
}

inline UniversalOneForm random_self_adjoint_one_form(const AlgebraSpec& spec, Rng& rng, std::size_t n_pairs = 3,
                                                     double sigma = 1.0) {
  return self_adjoint_part(spec, random_one_form(spec, rng, n_pairs, sigma));
}

/// Normalized self-adjoint element: pairs ½(a_j, b_j), ½(b_j*, a_j*), ½(c, 1), ½(1, c) with
/// c = 1 − ½(s + s*), s = Σ a_j b_j.
inline PertElement random_pert(const AlgebraSpec& spec, Rng& rng, std::size_t n_pairs = 2, double sigma = 0.5) {
  std::vector<FormPair> pairs;
  AlgebraElement s = spec.zero();
  for (std::size_t j = 0; j < n_pairs; ++j) {
    const AlgebraElement a = random_element(spec, rng, sigma);
    const AlgebraElement b = random_element(spec, rng, sigma);
    s = s + a * b;
    pairs.push_back({0.5 * a, b});
    pairs.push_back({0.5 * adjoint(b), adjoint(a)});
  }
  const AlgebraElement c = spec.unit() - 0.5 * (s + adjoint(s));
  pairs.push_back({0.5 * c, spec.unit()});
  pairs.push_back({0.5 * spec.unit(), c});
  return PertElement::make(spec, std::move(pairs));
}

}  // namespace fluctus
