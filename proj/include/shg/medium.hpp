#pragma once

#include "shg/field.hpp"

namespace shg {

// Coefficient bundle: Grueneisen gamma_g, refraction perturbation eta,
// absorption sigma, SHG susceptibility chi2.  Admissibility: eta, sigma,
// gamma_g within positive bounds; chi2 may relax its lower bound to 0.
struct MediumSet {
  RealField gamma_g;  // Grueneisen coefficient (Gamma)
  RealField eta;      // refraction perturbation
  RealField sigma;    // absorption
  RealField chi2;     // second-harmonic susceptibility (gamma)

  const GridSpec& grid() const { return eta.grid; }
  // Throws AdmissibilityError naming the offending coefficient.
  void validate(double c1, double c2, bool chi2_relax_lower = true) const;
};

struct WaveParams {
  double k = 1.0;  // fundamental wavenumber; second harmonic uses 2k
};

// q1 = k^2 (1 + eta) + i k sigma,  q2 = 4 k^2 (1 + eta) + 2 i k sigma.
ComplexField potential_q1(const RealField& eta, const RealField& sigma, double k);
ComplexField potential_q2(const RealField& eta, const RealField& sigma, double k);

}  // namespace shg
