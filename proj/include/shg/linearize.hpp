#pragma once

#include <string>

#include "shg/coupled.hpp"

namespace shg {

// First- and second-order fields of the small-amplitude expansion with
// boundary data eps g1 + eps^2/2 g2 (and likewise for h).
struct LinearizedBundle {
  ComplexField u1, v1, u2, v2;
};

// (u1, v1): homogeneous linear solves with Dirichlet data (g1, h1).
std::pair<ComplexField, ComplexField> solve_first_order(const MediumSet& m, double k, const BoundaryTrace& g1,
                                                        const BoundaryTrace& h1, const SolveOptions& opts = {});

// (u2, v2): linear solves with sources -2 k^2 chi2 conj(u1) v1 and
// -8 k^2 chi2 u1^2 and Dirichlet data (g2, h2).
std::pair<ComplexField, ComplexField> solve_second_order(const MediumSet& m, double k, const ComplexField& u1,
                                                         const ComplexField& v1, const BoundaryTrace& g2,
                                                         const BoundaryTrace& h2, const SolveOptions& opts = {});

// H2 = 2 gamma_g sigma (|u1|^2 + |v1|^2)
// H3 = 3 gamma_g sigma (conj(u1) u2 + u1 conj(u2) + conj(v1) v2 + v1 conj(v2))
// H3 is evaluated in complex arithmetic; its imaginary residue must stay
// below 1e-12 relative (asserted).
std::pair<RealField, RealField> data_orders(const LinearizedBundle& b, const RealField& gamma_g,
                                            const RealField& sigma);

struct EpsFamilySpec {
  BoundaryTrace g1, h1, g2, h2;
  std::vector<double> eps;
};

struct CertifyOptions {
  CoupledOptions coupled;
  double floor_factor = 10.0;   // remainders below floor_factor * res_tol are dropped from fits
  double threshold_mu = 2.7;
  double threshold_nu = 2.7;
  double threshold_rho = 3.7;
  double threshold_h1 = 1.9;
  CertifyOptions() {
    coupled.res_tol = 1e-11;
    coupled.fp_tol = 1e-13;
  }
};

struct ConvergenceRow {
  double eps = 0.0;
  double mu_inf = 0.0;   // ||u_eps - eps u1 - eps^2/2 u2||_inf
  double nu_inf = 0.0;   // same for v
  double rho_inf = 0.0;  // ||H_eps - eps^2/2 H2 - eps^3/6 H3||_inf
  double h_inf = 0.0;    // ||H_eps||_inf (first-order data must vanish)
  bool floored_mu = false, floored_nu = false, floored_rho = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double slope_mu = 0.0, slope_nu = 0.0, slope_rho = 0.0, slope_h = 0.0;
  double threshold_mu = 2.7, threshold_nu = 2.7, threshold_rho = 3.7, threshold_h1 = 1.9;
  bool exact_linearity = false;  // all remainders at rounding level (e.g. chi2 == 0)
  bool pass_mu = false, pass_nu = false, pass_rho = false, pass_h = false;

  bool pass() const { return exact_linearity || (pass_mu && pass_nu && pass_rho && pass_h); }
  std::string summary() const;
};

// Solves the coupled model across the eps family and measures the expansion
// remainders against the first/second-order fields.
ConvergenceReport certify_expansion(const MediumSet& m, double k, const EpsFamilySpec& family,
                                    const CertifyOptions& opts = {});

void write_convergence_csv(const std::string& path, const ConvergenceReport& r);

}  // namespace shg
