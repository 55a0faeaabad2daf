#pragma once

#include "shg/helmholtz.hpp"

namespace shg {

// Pointwise non-degeneracy margin of the linearized system:
//   margin = | (u1/conj(u1))^2 + v1/conj(v1) |    (in [0, 2])
// Nodes where |u1| or |v1| is at rounding level are excluded by the mask.
struct EllipticityReport {
  double min_margin = 0.0;
  double floor = 1e-3;
  bool pass = false;
  RealField margin;
  std::vector<uint8_t> mask;
};

EllipticityReport check_ellipticity(const ComplexField& u1, const ComplexField& v1, double floor = 1e-3);

// Phase rotation e^{i phi} of the second-harmonic illumination maximizing the
// worst-case margin; v1 is linear in h1 so no re-solve is needed.
struct PhaseFix {
  double phi = 0.0;
  double margin = 0.0;
};
PhaseFix optimize_phase(const ComplexField& u1, const ComplexField& v1, int samples = 64);

struct GammaSystemInput {
  ComplexField u1, v1;     // first-order fields
  ComplexField q1, q2;     // potentials at the fundamental / second harmonic
  double k = 1.0;
  RealField h3;            // third-order internal data
  RealField gamma_g;       // known Grueneisen (data-row scaling)
  RealField sigma;         // known absorption (data-row scaling)
  BoundaryTrace j_u2, j_v2;  // Neumann traces of the second-order fields
};

struct GammaWeights {
  double w_pde = 1.0;
  double w_data = 0.0;  // 0 selects the default 1/max(hx, hy)
  double w_neumann = 1.0;
};

struct GammaSolveResult {
  RealField gamma;        // interior solve, boundary filled from nearest interior
  ComplexField u2, v2;    // recovered second-order fields (zero trace)
  std::vector<uint8_t> interior_mask;
  double res_pde_u = 0.0;  // unweighted row-l2 block residuals
  double res_pde_v = 0.0;
  double res_data = 0.0;
  double res_neumann = 0.0;
  EllipticityReport ellipticity;
};

// Assembles the real-unknown least-squares system coupling (u2, v2, gamma):
// four PDE rows per interior node, one internal-data row per interior node,
// four Neumann rows per boundary edge node, zero Dirichlet trace eliminated.
// Solved through the sparse augmented KKT form.
GammaSolveResult assemble_and_solve(const GammaSystemInput& in, const GammaWeights& w = {},
                                    double ellipticity_floor = 1e-3);

// Elimination cross-check: gamma = -(lap + q1) u2 / (2 k^2 conj(u1) v1) on
// interior nodes with denominators above the threshold.
struct GammaFromU2Result {
  RealField gamma;
  std::vector<uint8_t> mask;
  double max_imag_residue = 0.0;  // relative to max |gamma|
};
GammaFromU2Result gamma_from_u2(const ComplexField& u2, const ComplexField& u1, const ComplexField& v1,
                                const ComplexField& q1, double k, double denom_threshold = 1e-8);

}  // namespace shg
