#pragma once

#include "shg/helmholtz.hpp"

namespace shg {

enum class ForwardModel { Coupled, OneWay };

struct CoupledOptions {
  double fp_tol = 1e-12;        // relative update tolerance for the fixed point
  int max_iter = 200;
  double small_data_cap = 0.1;  // sup-norm cap on (g, h); the contraction regime
  bool enforce_small_data = true;
  double res_tol = 1e-8;
  bool allow_nonpositive_im_q = false;
};

struct SHGSolution {
  ComplexField u, v;
  int iterations = 0;
  double final_update = 0.0;
  std::vector<double> update_history;  // sup-norm iterate increments
  double residual_u = 0.0;             // interior sup-norm residual of the u equation
  double residual_v = 0.0;
};

// Fixed-point solve of the coupled second-harmonic system
//   Delta u + q1 u = -k^2    chi2 conj(u) v,   u = g on the boundary
//   Delta v + q2 v = -4 k^2  chi2 u^2,         v = h on the boundary
// iterated from (0, 0); both updates of a sweep use the previous pair.
// Stops when the sup-norm update falls to fp_tol relative to the iterate, or
// when the updates stall at the rounding floor of the sweep (below 1e-10
// relative); a stall above that floor or running out of iterations raises
// DivergedError.
SHGSolution solve_coupled(const MediumSet& m, double k, const BoundaryTrace& g, const BoundaryTrace& h,
                          const CoupledOptions& opts = {});

struct OneWayOptions {
  BCSpec bc_v = BCSpec::robin(2.0);  // impedance closure for the second harmonic
  double res_tol = 1e-8;
  bool allow_nonpositive_im_q = false;
};

// One-way model: u solves the linear fundamental equation with Dirichlet data
// g; v solves the second-harmonic equation driven by -4 k^2 chi2 u^2 with a
// homogeneous Robin (default) or Dirichlet-zero closure.
SHGSolution solve_one_way(const MediumSet& m, double k, const BoundaryTrace& g, const OneWayOptions& opts = {});

struct ResidualReport {
  double r_u = 0.0;
  double r_v = 0.0;
};

// Interior sup-norm residuals of the discrete equations for the given model.
ResidualReport residuals(const SHGSolution& s, const MediumSet& m, double k, ForwardModel model);

}  // namespace shg
