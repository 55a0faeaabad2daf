#include "shg/helmholtz.hpp"

#include <vector>

namespace shg {

namespace {

// Coefficients of the outward normal derivative at a boundary node, averaged
// over the sides meeting there.  Pairs of (node index, coefficient).
void normal_stencil(const GridSpec& g, const BoundaryNode& b, std::vector<std::pair<int, double>>& out) {
  out.clear();
  int parts = 0;
  auto add = [&](int idx, double c) { out.emplace_back(idx, c); };
  if (b.sides & kSideLeft) {
    const double c = 1.0 / (2.0 * g.hx());
    add(g.index(0, b.j), 3.0 * c);
    add(g.index(1, b.j), -4.0 * c);
    add(g.index(2, b.j), 1.0 * c);
    ++parts;
  }
  if (b.sides & kSideRight) {
    const double c = 1.0 / (2.0 * g.hx());
    add(g.index(g.nx - 1, b.j), 3.0 * c);
    add(g.index(g.nx - 2, b.j), -4.0 * c);
    add(g.index(g.nx - 3, b.j), 1.0 * c);
    ++parts;
  }
  if (b.sides & kSideBottom) {
    const double c = 1.0 / (2.0 * g.hy());
    add(g.index(b.i, 0), 3.0 * c);
    add(g.index(b.i, 1), -4.0 * c);
    add(g.index(b.i, 2), 1.0 * c);
    ++parts;
  }
  if (b.sides & kSideTop) {
    const double c = 1.0 / (2.0 * g.hy());
    add(g.index(b.i, g.ny - 1), 3.0 * c);
    add(g.index(b.i, g.ny - 2), -4.0 * c);
    add(g.index(b.i, g.ny - 3), 1.0 * c);
    ++parts;
  }
  for (auto& [idx, c] : out) c /= parts;
}

}  // namespace

HelmholtzOperator::HelmholtzOperator(ComplexField q, BCSpec bc, double k, bool allow_nonpositive_im_q)
    : q_(std::move(q)), bc_(bc), k_(k) {
  const GridSpec& g = q_.grid;
  if (g.nx < 4 || g.ny < 4) throw ConfigError("HelmholtzOperator: requires nx, ny >= 4");
  require_finite(q_, "HelmholtzOperator");
  if (!allow_nonpositive_im_q) {
    for (const Complex& v : q_.values) {
      if (!(v.imag() > 0.0))
        throw AdmissibilityError("HelmholtzOperator: Im q must be positive everywhere (set the override to bypass)");
    }
  }
  const int N = g.count();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<size_t>(5 * N));
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.index(i, j);
      if (!g.is_boundary(i, j)) {
        trips.emplace_back(n, g.index(i - 1, j), Complex(cx, 0));
        trips.emplace_back(n, g.index(i + 1, j), Complex(cx, 0));
        trips.emplace_back(n, g.index(i, j - 1), Complex(cy, 0));
        trips.emplace_back(n, g.index(i, j + 1), Complex(cy, 0));
        trips.emplace_back(n, n, Complex(-2.0 * cx - 2.0 * cy, 0) + q_.values[n]);
      }
    }
  }
  std::vector<std::pair<int, double>> st;
  for (const BoundaryNode& b : g.boundary_nodes()) {
    if (bc_.kind == BCKind::Dirichlet) {
      trips.emplace_back(b.index, b.index, Complex(1, 0));
    } else {
      trips.emplace_back(b.index, b.index, Complex(1, 0));
      normal_stencil(g, b, st);
      const Complex imk(0.0, bc_.robin_m * k_);
      for (auto& [idx, c] : st) trips.emplace_back(b.index, idx, imk * c);
    }
  }
  A_.resize(N, N);
  A_.setFromTriplets(trips.begin(), trips.end());
  A_.makeCompressed();
  std::vector<double> row_sum(static_cast<size_t>(N), 0.0);
  for (int c = 0; c < A_.outerSize(); ++c)
    for (SpMat::InnerIterator it(A_, c); it; ++it) row_sum[it.row()] += std::abs(it.value());
  anorm_inf_ = 0.0;
  for (double s : row_sum) anorm_inf_ = std::max(anorm_inf_, s);
  lu_ = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
  lu_->compute(A_);
  if (lu_->info() != Eigen::Success)
    throw SolverError("HelmholtzOperator: sparse LU factorization failed (singular or ill-conditioned system)");
}

namespace {

Eigen::VectorXcd build_rhs(const GridSpec& g, const ComplexField& f, const BoundaryTrace& gdata) {
  Eigen::VectorXcd b(g.count());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) b[g.index(i, j)] = g.is_boundary(i, j) ? Complex(0, 0) : f.at(i, j);
  auto bn = g.boundary_nodes();
  for (size_t m = 0; m < bn.size(); ++m) b[bn[m].index] = gdata.values[m];
  return b;
}

}  // namespace

ComplexField HelmholtzOperator::solve(const ComplexField& f, const BoundaryTrace& g, const SolveOptions& opts) const {
  require_same_grid(f.grid, q_.grid, "HelmholtzOperator::solve");
  if (static_cast<int>(g.values.size()) != q_.grid.boundary_count())
    throw ConfigError("HelmholtzOperator::solve: boundary trace length mismatch");
  require_finite(f, "HelmholtzOperator::solve rhs");
  const Eigen::VectorXcd b = build_rhs(q_.grid, f, g);
  Eigen::VectorXcd x = lu_->solve(b);
  if (lu_->info() != Eigen::Success) throw SolverError("HelmholtzOperator: back substitution failed");
  ComplexField u(q_.grid);
  for (int n = 0; n < q_.grid.count(); ++n) u.values[n] = x[n];
  if (opts.check_residual) {
    const double r = (A_ * x - b).lpNorm<Eigen::Infinity>();
    // normwise backward error: r / (||A|| ||x|| + ||b||)
    const double scale = std::max(anorm_inf_ * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>(), 1e-30);
    if (r > opts.res_tol * scale)
      throw SolverError("HelmholtzOperator: linear residual " + std::to_string(r) + " exceeds " +
                        std::to_string(opts.res_tol) + " times the backward-error scale " + std::to_string(scale));
  }
  return u;
}

ComplexField HelmholtzOperator::solve(const ComplexField& f, const SolveOptions& opts) const {
  return solve(f, BoundaryTrace(q_.grid), opts);
}

ComplexField HelmholtzOperator::solve_adjoint(const ComplexField& r) const {
  require_same_grid(r.grid, q_.grid, "HelmholtzOperator::solve_adjoint");
  Eigen::VectorXcd b(q_.grid.count());
  for (int n = 0; n < q_.grid.count(); ++n) b[n] = r.values[n];
  Eigen::VectorXcd x = lu_->adjoint().solve(b);
  ComplexField w(q_.grid);
  for (int n = 0; n < q_.grid.count(); ++n) w.values[n] = x[n];
  return w;
}

double HelmholtzOperator::residual(const ComplexField& u, const ComplexField& f, const BoundaryTrace& g) const {
  Eigen::VectorXcd x(q_.grid.count());
  for (int n = 0; n < q_.grid.count(); ++n) x[n] = u.values[n];
  const Eigen::VectorXcd b = build_rhs(q_.grid, f, g);
  return (A_ * x - b).lpNorm<Eigen::Infinity>();
}

ComplexField solve_scalar(const ComplexField& q, const ComplexField& f, const BoundaryTrace& g, BCSpec bc, double k,
                          const SolveOptions& opts) {
  HelmholtzOperator op(q, bc, k, opts.allow_nonpositive_im_q);
  return op.solve(f, g, opts);
}

ComplexField apply_interior_operator(const ComplexField& u, const ComplexField& q) {
  require_same_grid(u.grid, q.grid, "apply_interior_operator");
  const GridSpec& g = u.grid;
  ComplexField out(g);
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      out.at(i, j) = (u.at(i - 1, j) + u.at(i + 1, j) - 2.0 * u.at(i, j)) * cx +
                     (u.at(i, j - 1) + u.at(i, j + 1) - 2.0 * u.at(i, j)) * cy + q.at(i, j) * u.at(i, j);
    }
  }
  return out;
}

}  // namespace shg
