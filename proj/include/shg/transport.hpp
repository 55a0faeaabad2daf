#pragma once

#include "shg/fd_ops.hpp"

namespace shg {

struct TransportOptions {
  double delta = 0.5;            // streamline-diffusion strength (0 disables)
  double tangential_tol = 1e-12; // |Re(beta.nu)| below this times |beta| counts as outflow
  double res_tol = 1e-8;         // algebraic residual bound for the linear solve
};

struct TransportResult {
  ComplexField xi;
  std::vector<uint8_t> inflow;   // per node, 1 on inflow-Dirichlet rows
  int inflow_count = 0;
  double solve_residual_inf = 0.0;  // residual of the assembled linear system
  double adv_residual_l2 = 0.0;     // advective-only divergence of the solution
  double adv_residual_inf = 0.0;
};

// Solves div(xi beta) = 0 with xi = g1^2 on the inflow part of the boundary
// {Re(beta.nu) < 0}.  Conservative finite-volume upwind on full faces (face
// drift = mean of the adjacent nodes, upwind side picked by Re); boundary
// nodes close their cells with the outer-face flux beta.xi at the node.
// Interior rows add an along-streamline diffusive flux delta h |beta| bb^T
// grad(xi) oriented by Re(beta), in flux form so that sub-box balance is
// exact.  The drift may be complex; Re(beta) orients the upwinding.
TransportResult solve_transport(const VectorField& beta, const BoundaryTrace& g1, const TransportOptions& opts = {});

// Total (advective + diffusive) face fluxes of a candidate solution under
// the same discretization, oriented +x / +y.  fx has (nx-1)*ny entries
// indexed j*(nx-1)+i, fy has nx*(ny-1) entries indexed j*nx+i.
struct FaceFluxes {
  GridSpec grid;
  std::vector<Complex> fx, fy;
};
FaceFluxes face_fluxes(const VectorField& beta, const ComplexField& xi, const TransportOptions& opts = {});

}  // namespace shg
