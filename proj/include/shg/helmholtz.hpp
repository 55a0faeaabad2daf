#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "shg/field.hpp"
#include "shg/medium.hpp"

namespace shg {

enum class BCKind { Dirichlet, Robin };

// Dirichlet: u = data on the boundary.  Robin: u + i m k du/dnu = data with
// the one-sided 3-point normal stencil (corners average the two edges).
struct BCSpec {
  BCKind kind = BCKind::Dirichlet;
  double robin_m = 0.0;

  static BCSpec dirichlet() { return BCSpec{BCKind::Dirichlet, 0.0}; }
  static BCSpec robin(double m) { return BCSpec{BCKind::Robin, m}; }
};

struct SolveOptions {
  double res_tol = 1e-8;               // linear residual bound, relative to data scale
  bool check_residual = true;
  bool allow_nonpositive_im_q = false; // test-only override of the Im q > 0 guard
};

using SpMat = Eigen::SparseMatrix<Complex>;

// Discrete Delta_h + q with one boundary row per boundary node.  The LU
// factorization is built once and reused across solves (and adjoint solves).
class HelmholtzOperator {
 public:
  HelmholtzOperator(ComplexField q, BCSpec bc, double k, bool allow_nonpositive_im_q = false);

  // f is consumed on interior nodes, g supplies the boundary-row data.
  ComplexField solve(const ComplexField& f, const BoundaryTrace& g, const SolveOptions& opts = {}) const;
  ComplexField solve(const ComplexField& f, const SolveOptions& opts = {}) const;  // g = 0
  // Solves A^H w = r with r given on all nodes (row order = node order).
  ComplexField solve_adjoint(const ComplexField& r) const;

  const SpMat& matrix() const { return A_; }
  const ComplexField& q() const { return q_; }
  BCSpec bc() const { return bc_; }
  double k() const { return k_; }
  const GridSpec& grid() const { return q_.grid; }

  // sup-norm of (A u - b) over all rows for the given data.
  double residual(const ComplexField& u, const ComplexField& f, const BoundaryTrace& g) const;

 private:
  ComplexField q_;
  BCSpec bc_;
  double k_ = 0.0;
  SpMat A_;
  double anorm_inf_ = 0.0;
  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_;
};

// One-shot convenience wrapper around HelmholtzOperator.
ComplexField solve_scalar(const ComplexField& q, const ComplexField& f, const BoundaryTrace& g, BCSpec bc, double k,
                          const SolveOptions& opts = {});

// (Delta_h u + q u) on interior nodes, zero on boundary nodes.
ComplexField apply_interior_operator(const ComplexField& u, const ComplexField& q);

}  // namespace shg
