#include "shg/transport.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "shg/errors.hpp"

namespace shg {

namespace {

using CoeffList = std::vector<std::pair<int, Complex>>;

// Shared face-flux coefficient builder so that assembly, residual evaluation
// and the flux-balance diagnostics all see the identical discretization.
struct Scheme {
  const VectorField& beta;
  GridSpec g;
  TransportOptions opts;
  double hmax;
  std::vector<double> d11, d12, d22;  // nodal streamline-diffusion tensor

  Scheme(const VectorField& b, const TransportOptions& o)
      : beta(b), g(b.grid), opts(o), hmax(std::max(g.hx(), g.hy())) {
    const size_t N = static_cast<size_t>(g.count());
    d11.assign(N, 0.0);
    d12.assign(N, 0.0);
    d22.assign(N, 0.0);
    if (opts.delta <= 0.0) return;
    for (size_t n = 0; n < N; ++n) {
      const double rx = beta.vx[n].real(), ry = beta.vy[n].real();
      const double mag = std::sqrt(std::norm(beta.vx[n]) + std::norm(beta.vy[n]));
      const double rmag2 = rx * rx + ry * ry;
      if (rmag2 <= 1e-28 * std::max(mag * mag, 1.0)) continue;
      const double s = opts.delta * hmax * mag / rmag2;
      d11[n] = s * rx * rx;
      d12[n] = s * rx * ry;
      d22[n] = s * ry * ry;
    }
  }

  double node_mag(int n) const { return std::sqrt(std::norm(beta.vx[n]) + std::norm(beta.vy[n])); }

  // Flux through the x-face between (i, j) and (i+1, j), oriented +x.
  void x_face(int i, int j, CoeffList& out, bool with_diffusion) const {
    const int a = g.index(i, j), b = g.index(i + 1, j);
    const Complex bx = 0.5 * (beta.vx[a] + beta.vx[b]);
    out.emplace_back(bx.real() >= 0.0 ? a : b, bx);
    if (!with_diffusion || opts.delta <= 0.0) return;
    if (j < 1 || j > g.ny - 2 || i < 1 || i > g.nx - 3) return;
    const double f11 = 0.5 * (d11[a] + d11[b]);
    const double f12 = 0.5 * (d12[a] + d12[b]);
    if (f11 != 0.0) {
      out.emplace_back(b, Complex(-f11 / g.hx(), 0));
      out.emplace_back(a, Complex(f11 / g.hx(), 0));
    }
    if (f12 != 0.0) {
      const double c = f12 / (4.0 * g.hy());
      out.emplace_back(g.index(i, j + 1), Complex(-c, 0));
      out.emplace_back(g.index(i, j - 1), Complex(c, 0));
      out.emplace_back(g.index(i + 1, j + 1), Complex(-c, 0));
      out.emplace_back(g.index(i + 1, j - 1), Complex(c, 0));
    }
  }

  // Flux through the y-face between (i, j) and (i, j+1), oriented +y.
  void y_face(int i, int j, CoeffList& out, bool with_diffusion) const {
    const int a = g.index(i, j), b = g.index(i, j + 1);
    const Complex by = 0.5 * (beta.vy[a] + beta.vy[b]);
    out.emplace_back(by.real() >= 0.0 ? a : b, by);
    if (!with_diffusion || opts.delta <= 0.0) return;
    if (i < 1 || i > g.nx - 2 || j < 1 || j > g.ny - 3) return;
    const double f22 = 0.5 * (d22[a] + d22[b]);
    const double f21 = 0.5 * (d12[a] + d12[b]);
    if (f22 != 0.0) {
      out.emplace_back(b, Complex(-f22 / g.hy(), 0));
      out.emplace_back(a, Complex(f22 / g.hy(), 0));
    }
    if (f21 != 0.0) {
      const double c = f21 / (4.0 * g.hx());
      out.emplace_back(g.index(i + 1, j), Complex(-c, 0));
      out.emplace_back(g.index(i - 1, j), Complex(c, 0));
      out.emplace_back(g.index(i + 1, j + 1), Complex(-c, 0));
      out.emplace_back(g.index(i - 1, j + 1), Complex(c, 0));
    }
  }

  // Divergence row of node (i, j): (F_right - F_left)/hx + (F_top - F_bot)/hy
  // with outer faces closed by the nodal flux beta.xi.
  void row(int i, int j, CoeffList& out, bool with_diffusion) const {
    const int n = g.index(i, j);
    CoeffList face;
    auto accum = [&](double s) {
      for (auto& [idx, c] : face) out.emplace_back(idx, s * c);
      face.clear();
    };
    if (i < g.nx - 1) {
      x_face(i, j, face, with_diffusion);
      accum(1.0 / g.hx());
    } else {
      out.emplace_back(n, beta.vx[n] / g.hx());
    }
    if (i > 0) {
      x_face(i - 1, j, face, with_diffusion);
      accum(-1.0 / g.hx());
    } else {
      out.emplace_back(n, -beta.vx[n] / g.hx());
    }
    if (j < g.ny - 1) {
      y_face(i, j, face, with_diffusion);
      accum(1.0 / g.hy());
    } else {
      out.emplace_back(n, beta.vy[n] / g.hy());
    }
    if (j > 0) {
      y_face(i, j - 1, face, with_diffusion);
      accum(-1.0 / g.hy());
    } else {
      out.emplace_back(n, -beta.vy[n] / g.hy());
    }
  }
};

}  // namespace

TransportResult solve_transport(const VectorField& beta, const BoundaryTrace& g1, const TransportOptions& opts) {
  const GridSpec& g = beta.grid;
  if (g.nx < 4 || g.ny < 4) throw ConfigError("solve_transport: requires nx, ny >= 4");
  if (static_cast<int>(g1.values.size()) != g.boundary_count())
    throw ConfigError("solve_transport: boundary trace length mismatch");
  Scheme sch(beta, opts);

  TransportResult res;
  res.inflow.assign(static_cast<size_t>(g.count()), 0);
  auto bn = g.boundary_nodes();
  std::vector<Complex> inflow_value(static_cast<size_t>(g.count()), Complex(0, 0));
  for (size_t m = 0; m < bn.size(); ++m) {
    const BoundaryNode& b = bn[m];
    double nx = 0.0, ny = 0.0;
    if (b.sides & kSideLeft) nx -= 1.0;
    if (b.sides & kSideRight) nx += 1.0;
    if (b.sides & kSideBottom) ny -= 1.0;
    if (b.sides & kSideTop) ny += 1.0;
    const double nn = std::hypot(nx, ny);
    nx /= nn;
    ny /= nn;
    const Complex bdotnu = beta.vx[b.index] * nx + beta.vy[b.index] * ny;
    const double mag = sch.node_mag(b.index);
    if (bdotnu.real() < 0.0 && std::abs(bdotnu.real()) >= opts.tangential_tol * mag) {
      res.inflow[b.index] = 1;
      inflow_value[b.index] = g1.values[m] * g1.values[m];
      ++res.inflow_count;
    }
  }
  if (res.inflow_count == 0)
    throw DataConditionError("solve_transport: empty inflow set (drift never enters the domain)");

  const int N = g.count();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<size_t>(12 * N));
  Eigen::VectorXcd b(N);
  CoeffList row;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.index(i, j);
      if (res.inflow[n]) {
        trips.emplace_back(n, n, Complex(1, 0));
        b[n] = inflow_value[n];
        continue;
      }
      row.clear();
      sch.row(i, j, row, true);
      for (auto& [idx, c] : row) trips.emplace_back(n, idx, c);
      b[n] = 0.0;
    }
  }
  Eigen::SparseMatrix<Complex> A(N, N);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_transport: factorization failed (drift too degenerate for the upwind system)");
  Eigen::VectorXcd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw SolverError("solve_transport: back substitution failed");

  res.xi = ComplexField(g);
  for (int n = 0; n < N; ++n) res.xi.values[n] = x[n];
  res.solve_residual_inf = (A * x - b).lpNorm<Eigen::Infinity>();
  const double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1e-30);
  if (res.solve_residual_inf > opts.res_tol * scale)
    throw SolverError("solve_transport: linear residual exceeds tolerance");

  // Advective-only divergence of the computed solution (diagnostic).
  double l2 = 0.0, linf = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.index(i, j);
      if (res.inflow[n]) continue;
      row.clear();
      sch.row(i, j, row, false);
      Complex val(0, 0);
      for (auto& [idx, c] : row) val += c * res.xi.values[idx];
      l2 += std::norm(val);
      linf = std::max(linf, std::abs(val));
    }
  }
  res.adv_residual_l2 = std::sqrt(g.hx() * g.hy() * l2);
  res.adv_residual_inf = linf;
  return res;
}

FaceFluxes face_fluxes(const VectorField& beta, const ComplexField& xi, const TransportOptions& opts) {
  require_same_grid(beta.grid, xi.grid, "face_fluxes");
  const GridSpec& g = beta.grid;
  Scheme sch(beta, opts);
  FaceFluxes f;
  f.grid = g;
  f.fx.assign(static_cast<size_t>((g.nx - 1) * g.ny), Complex(0, 0));
  f.fy.assign(static_cast<size_t>(g.nx * (g.ny - 1)), Complex(0, 0));
  CoeffList cl;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx - 1; ++i) {
      cl.clear();
      sch.x_face(i, j, cl, true);
      Complex val(0, 0);
      for (auto& [idx, c] : cl) val += c * xi.values[idx];
      f.fx[static_cast<size_t>(j) * (g.nx - 1) + i] = val;
    }
  }
  for (int j = 0; j < g.ny - 1; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      cl.clear();
      sch.y_face(i, j, cl, true);
      Complex val(0, 0);
      for (auto& [idx, c] : cl) val += c * xi.values[idx];
      f.fy[static_cast<size_t>(j) * g.nx + i] = val;
    }
  }
  return f;
}

}  // namespace shg
