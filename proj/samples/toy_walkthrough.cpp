// Walks the toy model from axioms to the symmetry-breaking chain.
#include <cmath>
#include <cstdio>

#include "fluctus/fluctus.hpp"

using namespace fluctus;

int main() {
  const ToyParams p;
  const ActionParams ap;
  const FiniteSpectralTriple t = build_toy(p);

  const AxiomReport z = check_zeroth_order(t);
  const AxiomReport f_ev = check_first_order(t);
  const AxiomReport f_af = check_first_order(t, a_f());
  std::printf("zeroth order defect      %.3e\n", z.max_defect);
  std::printf("first order defect, A_ev %.3e\n", f_ev.max_defect);
  std::printf("first order defect, A_F  %.3e\n", f_af.max_defect);

  Rng rng(7);
  const PertElement pert = random_pert(t.algebra(), rng);
  const UniversalOneForm w = eta_one_form(pert);
  const ComplexMatrix dp = fluctuate(t, w);
  const FieldPoint fp = extract_fields(w);
  std::printf("fields x = %.4f%+.4fi  v = (%.4f%+.4fi, %.4f%+.4fi)\n", fp.x.real(), fp.x.imag(), fp.v1.real(),
              fp.v1.imag(), fp.v2.real(), fp.v2.imag());
  std::printf("closed form residual     %.3e\n", rel_diff(closed_dirac(p, fp), dp));
  std::printf("V(D') trace / closed     %.12f / %.12f\n", v_trace(p, ap, fp), v_closed(p, ap, fp));

  const double w_vev = vev_w(p, ap);
  std::printf("constrained vev |v|^2 = %.9f, s1 = %.9f\n", w_vev, -1.0 + std::sqrt(w_vev));

  const HessianCheck h = hessian_check(p, ap);
  std::printf("hessian diagonal         %.6f %.6f %.2e\n", h.fd.hessian(0, 0), h.fd.hessian(1, 1), h.fd.hessian(2, 2));

  const StabilizerChain s = stabilizer_chain(p, ap);
  std::printf("stabilizer dims          %d -> %d -> %d\n", s.at_zero, s.at_sigma, s.at_sigma_x);
  return 0;
}
