#include "shg/recon_gamma.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "shg/fd_ops.hpp"

namespace shg {

EllipticityReport check_ellipticity(const ComplexField& u1, const ComplexField& v1, double floor) {
  require_same_grid(u1.grid, v1.grid, "check_ellipticity");
  EllipticityReport rep;
  rep.floor = floor;
  rep.margin = RealField(u1.grid);
  rep.mask.assign(u1.values.size(), 0);
  const double tiny_u = 1e-12 * std::max(norm_linf(u1), 1e-300);
  const double tiny_v = 1e-12 * std::max(norm_linf(v1), 1e-300);
  double mn = std::numeric_limits<double>::infinity();
  bool any = false;
  for (size_t n = 0; n < u1.values.size(); ++n) {
    const Complex u = u1.values[n], v = v1.values[n];
    if (std::abs(u) < tiny_u || std::abs(v) < tiny_v) continue;
    const Complex ru = u / std::conj(u);
    const double m = std::abs(ru * ru + v / std::conj(v));
    rep.margin.values[n] = m;
    rep.mask[n] = 1;
    mn = std::min(mn, m);
    any = true;
  }
  if (!any) throw DataConditionError("check_ellipticity: u1 or v1 vanishes everywhere");
  rep.min_margin = mn;
  rep.pass = mn >= floor;
  return rep;
}

PhaseFix optimize_phase(const ComplexField& u1, const ComplexField& v1, int samples) {
  require_same_grid(u1.grid, v1.grid, "optimize_phase");
  if (samples < 4) throw ConfigError("optimize_phase: need at least 4 samples");
  const double tiny_u = 1e-12 * std::max(norm_linf(u1), 1e-300);
  const double tiny_v = 1e-12 * std::max(norm_linf(v1), 1e-300);
  std::vector<Complex> a, b;
  for (size_t n = 0; n < u1.values.size(); ++n) {
    const Complex u = u1.values[n], v = v1.values[n];
    if (std::abs(u) < tiny_u || std::abs(v) < tiny_v) continue;
    const Complex ru = u / std::conj(u);
    a.push_back(ru * ru);
    b.push_back(v / std::conj(v));
  }
  if (a.empty()) throw DataConditionError("optimize_phase: u1 or v1 vanishes everywhere");
  auto worst = [&](double phi) {
    const Complex rot = std::polar(1.0, 2.0 * phi);
    double mn = std::numeric_limits<double>::infinity();
    for (size_t n = 0; n < a.size(); ++n) mn = std::min(mn, std::abs(a[n] + rot * b[n]));
    return mn;
  };
  // coarse scan over half a period (the margin has period pi in phi), then
  // a few rounds of local refinement
  double best_phi = 0.0, best = -1.0;
  for (int s = 0; s < samples; ++s) {
    const double phi = M_PI * s / samples;
    const double m = worst(phi);
    if (m > best) {
      best = m;
      best_phi = phi;
    }
  }
  double step = M_PI / samples;
  for (int round = 0; round < 20; ++round) {
    step *= 0.5;
    for (double phi : {best_phi - step, best_phi + step}) {
      const double m = worst(phi);
      if (m > best) {
        best = m;
        best_phi = phi;
      }
    }
  }
  return PhaseFix{best_phi, best};
}

namespace {

struct Block {
  // column offsets of the unknown blocks (interior-node indexed)
  int re_u2, im_u2, re_v2, im_v2, gam;
};

}  // namespace

GammaSolveResult assemble_and_solve(const GammaSystemInput& in, const GammaWeights& w_in, double ellipticity_floor) {
  const GridSpec& g = in.u1.grid;
  require_same_grid(g, in.v1.grid, "assemble_and_solve");
  require_same_grid(g, in.h3.grid, "assemble_and_solve");
  require_same_grid(g, in.q1.grid, "assemble_and_solve");
  if (g.nx < 5 || g.ny < 5) throw ConfigError("assemble_and_solve: requires nx, ny >= 5");
  if (!(in.k > 0.0)) throw ConfigError("assemble_and_solve: k must be positive");

  GammaSolveResult out;
  out.ellipticity = check_ellipticity(in.u1, in.v1, ellipticity_floor);

  GammaWeights w = w_in;
  if (w.w_data <= 0.0) w.w_data = 1.0 / std::max(g.hx(), g.hy());

  // interior-node numbering
  const int nint = g.interior_count();
  std::vector<int> int_id(static_cast<size_t>(g.count()), -1);
  {
    int c = 0;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) int_id[g.index(i, j)] = c++;
  }
  const Block blk{0, nint, 2 * nint, 3 * nint, 4 * nint};
  const int ncols = 5 * nint;

  std::vector<Eigen::Triplet<double>> trips;  // rows of A
  std::vector<double> rhs;
  std::vector<double> wgt;
  std::vector<int> block_of_row;  // 0 pde_u, 1 pde_v, 2 data, 3 neumann
  int nrows = 0;
  auto new_row = [&](double weight, int block, double b) {
    rhs.push_back(b);
    wgt.push_back(weight);
    block_of_row.push_back(block);
    return nrows++;
  };

  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());

  // helper: add coefficient of a complex unknown z (re-block, im-block) for a
  // complex row pair (re_row, im_row) given multiplier c: contribution c*z
  auto add_cz = [&](int re_row, int im_row, int re_col, int im_col, Complex c) {
    trips.emplace_back(re_row, re_col, c.real());
    trips.emplace_back(re_row, im_col, -c.imag());
    trips.emplace_back(im_row, re_col, c.imag());
    trips.emplace_back(im_row, im_col, c.real());
  };
  // contribution c*gamma with gamma real
  auto add_cg = [&](int re_row, int im_row, int col, Complex c) {
    trips.emplace_back(re_row, col, c.real());
    trips.emplace_back(im_row, col, c.imag());
  };

  const double kk = in.k * in.k;
  // PDE rows at interior nodes (boundary u2, v2 vanish and drop out)
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const int n = g.index(i, j);
      const int c = int_id[n];
      // u-equation: (lap + q1) u2 + 2 k^2 conj(u1) v1 gamma = 0
      {
        const int rr = new_row(w.w_pde, 0, 0.0), ri = new_row(w.w_pde, 0, 0.0);
        auto stencil = [&](int ii, int jj, double coef) {
          const int m = int_id[g.index(ii, jj)];
          if (m < 0) return;  // zero Dirichlet neighbor
          add_cz(rr, ri, blk.re_u2 + m, blk.im_u2 + m, Complex(coef, 0.0));
        };
        stencil(i - 1, j, cx);
        stencil(i + 1, j, cx);
        stencil(i, j - 1, cy);
        stencil(i, j + 1, cy);
        add_cz(rr, ri, blk.re_u2 + c, blk.im_u2 + c, Complex(-2.0 * cx - 2.0 * cy, 0.0) + in.q1.values[n]);
        add_cg(rr, ri, blk.gam + c, 2.0 * kk * std::conj(in.u1.values[n]) * in.v1.values[n]);
      }
      // v-equation: (lap + q2) v2 + 8 k^2 u1^2 gamma = 0
      {
        const int rr = new_row(w.w_pde, 1, 0.0), ri = new_row(w.w_pde, 1, 0.0);
        auto stencil = [&](int ii, int jj, double coef) {
          const int m = int_id[g.index(ii, jj)];
          if (m < 0) return;
          add_cz(rr, ri, blk.re_v2 + m, blk.im_v2 + m, Complex(coef, 0.0));
        };
        stencil(i - 1, j, cx);
        stencil(i + 1, j, cx);
        stencil(i, j - 1, cy);
        stencil(i, j + 1, cy);
        add_cz(rr, ri, blk.re_v2 + c, blk.im_v2 + c, Complex(-2.0 * cx - 2.0 * cy, 0.0) + in.q2.values[n]);
        add_cg(rr, ri, blk.gam + c, 8.0 * kk * in.u1.values[n] * in.u1.values[n]);
      }
      // data row: 2 Re(conj(u1) u2) + 2 Re(conj(v1) v2) = h3 / (3 gamma_g sigma)
      {
        const double den = 3.0 * in.gamma_g.values[n] * in.sigma.values[n];
        if (!(den > 0.0)) throw DataConditionError("assemble_and_solve: gamma_g sigma must be positive");
        const int r = new_row(w.w_data, 2, in.h3.values[n] / den);
        trips.emplace_back(r, blk.re_u2 + c, 2.0 * in.u1.values[n].real());
        trips.emplace_back(r, blk.im_u2 + c, 2.0 * in.u1.values[n].imag());
        trips.emplace_back(r, blk.re_v2 + c, 2.0 * in.v1.values[n].real());
        trips.emplace_back(r, blk.im_v2 + c, 2.0 * in.v1.values[n].imag());
      }
    }
  }

  // Neumann rows at edge (non-corner) boundary nodes; the node's own value
  // vanishes, leaving the two interior neighbors of the one-sided stencil.
  auto bn = g.boundary_nodes();
  for (size_t m = 0; m < bn.size(); ++m) {
    const BoundaryNode& b = bn[m];
    if (b.corner()) continue;
    int n1 = -1, n2 = -1;
    double c1 = 0.0, c2 = 0.0;
    if (b.sides == kSideLeft) {
      n1 = g.index(1, b.j);
      n2 = g.index(2, b.j);
      c1 = -4.0 / (2.0 * g.hx());
      c2 = 1.0 / (2.0 * g.hx());
    } else if (b.sides == kSideRight) {
      n1 = g.index(g.nx - 2, b.j);
      n2 = g.index(g.nx - 3, b.j);
      c1 = -4.0 / (2.0 * g.hx());
      c2 = 1.0 / (2.0 * g.hx());
    } else if (b.sides == kSideBottom) {
      n1 = g.index(b.i, 1);
      n2 = g.index(b.i, 2);
      c1 = -4.0 / (2.0 * g.hy());
      c2 = 1.0 / (2.0 * g.hy());
    } else {
      n1 = g.index(b.i, g.ny - 2);
      n2 = g.index(b.i, g.ny - 3);
      c1 = -4.0 / (2.0 * g.hy());
      c2 = 1.0 / (2.0 * g.hy());
    }
    const int m1 = int_id[n1], m2 = int_id[n2];
    {
      const int rr = new_row(w.w_neumann, 3, in.j_u2.values[m].real());
      const int ri = new_row(w.w_neumann, 3, in.j_u2.values[m].imag());
      add_cz(rr, ri, blk.re_u2 + m1, blk.im_u2 + m1, Complex(c1, 0.0));
      add_cz(rr, ri, blk.re_u2 + m2, blk.im_u2 + m2, Complex(c2, 0.0));
    }
    {
      const int rr = new_row(w.w_neumann, 3, in.j_v2.values[m].real());
      const int ri = new_row(w.w_neumann, 3, in.j_v2.values[m].imag());
      add_cz(rr, ri, blk.re_v2 + m1, blk.im_v2 + m1, Complex(c1, 0.0));
      add_cz(rr, ri, blk.re_v2 + m2, blk.im_v2 + m2, Complex(c2, 0.0));
    }
  }

  Eigen::SparseMatrix<double> A(nrows, ncols);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  // Weighted least squares through the augmented KKT system
  //   [ W^-1  A ] [y]   [b]
  //   [ A^T   0 ] [x] = [0]
  std::vector<Eigen::Triplet<double>> kt;
  kt.reserve(static_cast<size_t>(A.nonZeros()) * 2 + nrows);
  for (int r = 0; r < nrows; ++r) kt.emplace_back(r, r, 1.0 / (wgt[r] * wgt[r]));
  for (int c = 0; c < A.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
      kt.emplace_back(static_cast<int>(it.row()), nrows + c, it.value());
      kt.emplace_back(nrows + c, static_cast<int>(it.row()), it.value());
    }
  }
  Eigen::SparseMatrix<double> K(nrows + ncols, nrows + ncols);
  K.setFromTriplets(kt.begin(), kt.end());
  K.makeCompressed();
  Eigen::VectorXd kb = Eigen::VectorXd::Zero(nrows + ncols);
  for (int r = 0; r < nrows; ++r) kb[r] = rhs[r];
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) {
    throw SolverError("assemble_and_solve: KKT factorization failed (system rank-deficient; ellipticity margin " +
                      std::to_string(out.ellipticity.min_margin) + ")");
  }
  Eigen::VectorXd sol = lu.solve(kb);
  if (lu.info() != Eigen::Success) throw SolverError("assemble_and_solve: KKT back substitution failed");
  const Eigen::VectorXd x = sol.tail(ncols);

  // block residuals (unweighted row l2)
  Eigen::VectorXd res(nrows);
  res = A * x;
  for (int r = 0; r < nrows; ++r) res[r] -= rhs[r];
  double s_pu = 0, s_pv = 0, s_d = 0, s_n = 0;
  for (int r = 0; r < nrows; ++r) {
    const double v2 = res[r] * res[r];
    if (block_of_row[r] == 0) s_pu += v2;
    else if (block_of_row[r] == 1) s_pv += v2;
    else if (block_of_row[r] == 2) s_d += v2;
    else s_n += v2;
  }
  out.res_pde_u = std::sqrt(s_pu);
  out.res_pde_v = std::sqrt(s_pv);
  out.res_data = std::sqrt(s_d);
  out.res_neumann = std::sqrt(s_n);

  out.u2 = ComplexField(g);
  out.v2 = ComplexField(g);
  out.gamma = RealField(g);
  out.interior_mask.assign(static_cast<size_t>(g.count()), 0);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const int n = g.index(i, j);
      const int c = int_id[n];
      out.u2.values[n] = Complex(x[blk.re_u2 + c], x[blk.im_u2 + c]);
      out.v2.values[n] = Complex(x[blk.re_v2 + c], x[blk.im_v2 + c]);
      out.gamma.values[n] = x[blk.gam + c];
      out.interior_mask[n] = 1;
    }
  }
  // extend gamma to the boundary from the nearest interior node
  for (const BoundaryNode& b : bn) {
    const int ii = std::clamp(b.i, 1, g.nx - 2);
    const int jj = std::clamp(b.j, 1, g.ny - 2);
    out.gamma.values[b.index] = out.gamma.values[g.index(ii, jj)];
  }
  return out;
}

GammaFromU2Result gamma_from_u2(const ComplexField& u2, const ComplexField& u1, const ComplexField& v1,
                                const ComplexField& q1, double k, double denom_threshold) {
  require_same_grid(u2.grid, u1.grid, "gamma_from_u2");
  require_same_grid(u2.grid, v1.grid, "gamma_from_u2");
  require_same_grid(u2.grid, q1.grid, "gamma_from_u2");
  const GridSpec& g = u2.grid;
  GammaFromU2Result out;
  out.gamma = RealField(g);
  out.mask.assign(u2.values.size(), 0);
  const ComplexField num = apply_interior_operator(u2, q1);
  double dmax = 0.0;
  std::vector<Complex> den(u2.values.size());
  for (size_t n = 0; n < den.size(); ++n) {
    den[n] = 2.0 * k * k * std::conj(u1.values[n]) * v1.values[n];
    dmax = std::max(dmax, std::abs(den[n]));
  }
  if (!(dmax > 0.0)) throw DataConditionError("gamma_from_u2: denominator vanishes everywhere");
  double max_im = 0.0, max_abs = 0.0;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const int n = g.index(i, j);
      if (std::abs(den[n]) < denom_threshold * dmax) continue;
      const Complex gam = -num.values[n] / den[n];
      out.gamma.values[n] = gam.real();
      out.mask[n] = 1;
      max_im = std::max(max_im, std::abs(gam.imag()));
      max_abs = std::max(max_abs, std::abs(gam));
    }
  }
  out.max_imag_residue = max_abs > 0.0 ? max_im / max_abs : 0.0;
  return out;
}

}  // namespace shg
