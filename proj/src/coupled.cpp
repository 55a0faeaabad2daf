#include "shg/coupled.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "shg/fd_ops.hpp"

namespace shg {

namespace {

ComplexField source_u(const MediumSet& m, double k, const ComplexField& u, const ComplexField& v) {
  ComplexField f(u.grid);
  const double kk = k * k;
  for (size_t n = 0; n < f.values.size(); ++n)
    f.values[n] = -kk * m.chi2.values[n] * std::conj(u.values[n]) * v.values[n];
  return f;
}

ComplexField source_v(const MediumSet& m, double k, const ComplexField& u) {
  ComplexField f(u.grid);
  const double kk4 = 4.0 * k * k;
  for (size_t n = 0; n < f.values.size(); ++n)
    f.values[n] = -kk4 * m.chi2.values[n] * u.values[n] * u.values[n];
  return f;
}

double update_norm(const ComplexField& a, const ComplexField& b) {
  double s = 0.0;
  for (size_t n = 0; n < a.values.size(); ++n) s = std::max(s, std::abs(a.values[n] - b.values[n]));
  return s;
}

}  // namespace

SHGSolution solve_coupled(const MediumSet& m, double k, const BoundaryTrace& g, const BoundaryTrace& h,
                          const CoupledOptions& opts) {
  const GridSpec& grid = m.grid();
  if (opts.enforce_small_data) {
    const double cap = opts.small_data_cap * (1.0 + 1e-12);  // slack for |exp(i phi)| rounding
    if (norm_linf(g) > cap || norm_linf(h) > cap) {
      throw ConfigError("solve_coupled: boundary data exceeds the small-data cap " +
                        std::to_string(opts.small_data_cap) +
                        " (the fixed point is only certified in the contraction regime)");
    }
  }
  HelmholtzOperator op1(potential_q1(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  HelmholtzOperator op2(potential_q2(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  SolveOptions so;
  so.res_tol = opts.res_tol;
  so.allow_nonpositive_im_q = opts.allow_nonpositive_im_q;

  SHGSolution sol;
  sol.u = ComplexField(grid);
  sol.v = ComplexField(grid);
  // Updates contract geometrically until they reach the rounding floor of the
  // two sparse solves; a stall at or below kFloorRel (relative to the iterate)
  // is accepted as converged, a stall above it means the contraction failed.
  constexpr double kFloorRel = 1e-10;
  constexpr int kStallLimit = 15;
  int stall = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    ComplexField un = op1.solve(source_u(m, k, sol.u, sol.v), g, so);
    ComplexField vn = op2.solve(source_v(m, k, sol.u), h, so);
    const double upd = std::max(update_norm(un, sol.u), update_norm(vn, sol.v));
    sol.u = std::move(un);
    sol.v = std::move(vn);
    sol.iterations = it;
    sol.final_update = upd;
    sol.update_history.push_back(upd);
    const double scale = std::max(norm_linf(sol.u), norm_linf(sol.v));
    if (upd <= opts.fp_tol * std::max(scale, 1e-300)) break;
    if (upd <= 0.9 * best)
      stall = 0;
    else
      ++stall;
    best = std::min(best, upd);
    if (stall >= kStallLimit || it == opts.max_iter) {
      if (upd <= kFloorRel * std::max(scale, 1e-300)) break;
      std::ostringstream os;
      os << "solve_coupled: no contraction within " << it << " iterations; update history tail:";
      const size_t n0 = sol.update_history.size() > 12 ? sol.update_history.size() - 12 : 0;
      for (size_t n = n0; n < sol.update_history.size(); ++n) os << ' ' << sol.update_history[n];
      throw DivergedError(os.str());
    }
  }
  ResidualReport r = residuals(sol, m, k, ForwardModel::Coupled);
  sol.residual_u = r.r_u;
  sol.residual_v = r.r_v;
  return sol;
}

SHGSolution solve_one_way(const MediumSet& m, double k, const BoundaryTrace& g, const OneWayOptions& opts) {
  SolveOptions so;
  so.res_tol = opts.res_tol;
  so.allow_nonpositive_im_q = opts.allow_nonpositive_im_q;
  HelmholtzOperator op1(potential_q1(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  HelmholtzOperator op2(potential_q2(m.eta, m.sigma, k), opts.bc_v, k, opts.allow_nonpositive_im_q);
  SHGSolution sol;
  sol.u = op1.solve(ComplexField(m.grid()), g, so);
  sol.v = op2.solve(source_v(m, k, sol.u), so);
  sol.iterations = 1;
  ResidualReport r = residuals(sol, m, k, ForwardModel::OneWay);
  sol.residual_u = r.r_u;
  sol.residual_v = r.r_v;
  return sol;
}

ResidualReport residuals(const SHGSolution& s, const MediumSet& m, double k, ForwardModel model) {
  const ComplexField q1 = potential_q1(m.eta, m.sigma, k);
  const ComplexField q2 = potential_q2(m.eta, m.sigma, k);
  ComplexField ru = apply_interior_operator(s.u, q1);
  ComplexField rv = apply_interior_operator(s.v, q2);
  const ComplexField fu = source_u(m, k, s.u, s.v);
  const ComplexField fv = source_v(m, k, s.u);
  const GridSpec& g = s.u.grid;
  double mu = 0.0, mv = 0.0;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const int n = g.index(i, j);
      const Complex du = ru.values[n] - (model == ForwardModel::Coupled ? fu.values[n] : Complex(0, 0));
      const Complex dv = rv.values[n] - fv.values[n];
      mu = std::max(mu, std::abs(du));
      mv = std::max(mv, std::abs(dv));
    }
  }
  return ResidualReport{mu, mv};
}

}  // namespace shg
