#include "shg/linearize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shg/fd_ops.hpp"
#include "shg/synth.hpp"
#include "shg/util.hpp"

namespace shg {

std::pair<ComplexField, ComplexField> solve_first_order(const MediumSet& m, double k, const BoundaryTrace& g1,
                                                        const BoundaryTrace& h1, const SolveOptions& opts) {
  HelmholtzOperator op1(potential_q1(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  HelmholtzOperator op2(potential_q2(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  return {op1.solve(ComplexField(m.grid()), g1, opts), op2.solve(ComplexField(m.grid()), h1, opts)};
}

std::pair<ComplexField, ComplexField> solve_second_order(const MediumSet& m, double k, const ComplexField& u1,
                                                         const ComplexField& v1, const BoundaryTrace& g2,
                                                         const BoundaryTrace& h2, const SolveOptions& opts) {
  require_same_grid(u1.grid, m.grid(), "solve_second_order");
  HelmholtzOperator op1(potential_q1(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  HelmholtzOperator op2(potential_q2(m.eta, m.sigma, k), BCSpec::dirichlet(), k, opts.allow_nonpositive_im_q);
  ComplexField fu(u1.grid), fv(u1.grid);
  const double kk = k * k;
  for (size_t n = 0; n < fu.values.size(); ++n) {
    fu.values[n] = -2.0 * kk * m.chi2.values[n] * std::conj(u1.values[n]) * v1.values[n];
    fv.values[n] = -8.0 * kk * m.chi2.values[n] * u1.values[n] * u1.values[n];
  }
  return {op1.solve(fu, g2, opts), op2.solve(fv, h2, opts)};
}

std::pair<RealField, RealField> data_orders(const LinearizedBundle& b, const RealField& gamma_g,
                                            const RealField& sigma) {
  require_same_grid(b.u1.grid, gamma_g.grid, "data_orders");
  RealField h2(b.u1.grid), h3(b.u1.grid);
  double max_im = 0.0, max_abs = 0.0;
  for (size_t n = 0; n < h2.values.size(); ++n) {
    const double gs = gamma_g.values[n] * sigma.values[n];
    h2.values[n] = 2.0 * gs * (std::norm(b.u1.values[n]) + std::norm(b.v1.values[n]));
    const Complex z = std::conj(b.u1.values[n]) * b.u2.values[n] + b.u1.values[n] * std::conj(b.u2.values[n]) +
                      std::conj(b.v1.values[n]) * b.v2.values[n] + b.v1.values[n] * std::conj(b.v2.values[n]);
    const Complex h3n = 3.0 * gs * z;
    h3.values[n] = h3n.real();
    max_im = std::max(max_im, std::abs(h3n.imag()));
    max_abs = std::max(max_abs, std::abs(h3n));
  }
  if (max_im > 1e-12 * std::max(max_abs, 1e-300))
    throw SolverError("data_orders: third-order data has a non-negligible imaginary residue");
  return {std::move(h2), std::move(h3)};
}

ConvergenceReport certify_expansion(const MediumSet& m, double k, const EpsFamilySpec& family,
                                    const CertifyOptions& opts) {
  if (family.eps.size() < 2) throw ConfigError("certify_expansion: need at least two eps values");
  for (double e : family.eps)
    if (!(e > 0.0)) throw ConfigError("certify_expansion: eps values must be positive");

  SolveOptions so;
  so.res_tol = opts.coupled.res_tol;
  so.allow_nonpositive_im_q = opts.coupled.allow_nonpositive_im_q;
  auto [u1, v1] = solve_first_order(m, k, family.g1, family.h1, so);
  auto [u2, v2] = solve_second_order(m, k, u1, v1, family.g2, family.h2, so);
  LinearizedBundle b{u1, v1, u2, v2};
  auto [H2, H3] = data_orders(b, m.gamma_g, m.sigma);

  ConvergenceReport rep;
  rep.threshold_mu = opts.threshold_mu;
  rep.threshold_nu = opts.threshold_nu;
  rep.threshold_rho = opts.threshold_rho;
  rep.threshold_h1 = opts.threshold_h1;

  const double data_scale = std::max({norm_linf(family.g1), norm_linf(family.h1), 1.0});
  const double floor = opts.floor_factor * opts.coupled.res_tol * data_scale;

  for (double eps : family.eps) {
    const Complex e1(eps, 0.0), e2(0.5 * eps * eps, 0.0);
    BoundaryTrace ge = add(scale(family.g1, e1), scale(family.g2, e2));
    BoundaryTrace he = add(scale(family.h1, e1), scale(family.h2, e2));
    SHGSolution sol = solve_coupled(m, k, ge, he, opts.coupled);
    ConvergenceRow row;
    row.eps = eps;
    double mu = 0.0, nu = 0.0;
    for (size_t n = 0; n < sol.u.values.size(); ++n) {
      mu = std::max(mu, std::abs(sol.u.values[n] - eps * u1.values[n] - 0.5 * eps * eps * u2.values[n]));
      nu = std::max(nu, std::abs(sol.v.values[n] - eps * v1.values[n] - 0.5 * eps * eps * v2.values[n]));
    }
    RealField He = internal_data(sol.u, sol.v, m.gamma_g, m.sigma);
    double rho = 0.0;
    const double c2 = 0.5 * eps * eps, c3 = eps * eps * eps / 6.0;
    for (size_t n = 0; n < He.values.size(); ++n)
      rho = std::max(rho, std::abs(He.values[n] - c2 * H2.values[n] - c3 * H3.values[n]));
    row.mu_inf = mu;
    row.nu_inf = nu;
    row.rho_inf = rho;
    row.h_inf = norm_linf(He);
    row.floored_mu = mu < floor;
    row.floored_nu = nu < floor;
    row.floored_rho = rho < floor;
    rep.rows.push_back(row);
  }

  auto fit = [&](auto value, auto floored, double threshold, double& slope, bool& pass) {
    std::vector<double> lx, ly;
    for (const ConvergenceRow& r : rep.rows) {
      if (floored(r)) continue;
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(value(r)));
    }
    if (lx.size() < 2) {
      // everything at the rounding floor: better than any polynomial order
      slope = std::numeric_limits<double>::quiet_NaN();
      pass = true;
      return;
    }
    slope = fit_slope(lx, ly);
    pass = slope >= threshold;
  };
  fit([](const ConvergenceRow& r) { return r.mu_inf; }, [](const ConvergenceRow& r) { return r.floored_mu; },
      rep.threshold_mu, rep.slope_mu, rep.pass_mu);
  fit([](const ConvergenceRow& r) { return r.nu_inf; }, [](const ConvergenceRow& r) { return r.floored_nu; },
      rep.threshold_nu, rep.slope_nu, rep.pass_nu);
  fit([](const ConvergenceRow& r) { return r.rho_inf; }, [](const ConvergenceRow& r) { return r.floored_rho; },
      rep.threshold_rho, rep.slope_rho, rep.pass_rho);
  {
    std::vector<double> lx, ly;
    for (const ConvergenceRow& r : rep.rows) {
      if (r.h_inf <= 0.0) continue;
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(r.h_inf));
    }
    if (lx.size() < 2) {
      rep.slope_h = std::numeric_limits<double>::quiet_NaN();
      rep.pass_h = true;
    } else {
      rep.slope_h = fit_slope(lx, ly);
      rep.pass_h = rep.slope_h >= rep.threshold_h1;
    }
  }
  rep.exact_linearity = true;
  for (const ConvergenceRow& r : rep.rows)
    if (!(r.floored_mu && r.floored_nu && r.floored_rho)) rep.exact_linearity = false;
  return rep;
}

std::string ConvergenceReport::summary() const {
  std::ostringstream os;
  os.precision(4);
  os << "expansion certification: " << (pass() ? "PASS" : "FAIL") << "\n";
  if (exact_linearity) os << "  exact linearity detected (all remainders at rounding level)\n";
  os << "  slope(mu)  = " << slope_mu << " (threshold " << threshold_mu << ")\n"
     << "  slope(nu)  = " << slope_nu << " (threshold " << threshold_nu << ")\n"
     << "  slope(rho) = " << slope_rho << " (threshold " << threshold_rho << ")\n"
     << "  slope(H)   = " << slope_h << " (threshold " << threshold_h1 << ")\n";
  os << "  eps        mu_inf       nu_inf       rho_inf      H_inf\n";
  for (const ConvergenceRow& r : rows) {
    os << "  " << r.eps << "   " << r.mu_inf << (r.floored_mu ? "*" : " ") << "  " << r.nu_inf
       << (r.floored_nu ? "*" : " ") << "  " << r.rho_inf << (r.floored_rho ? "*" : " ") << "  " << r.h_inf << "\n";
  }
  if (!rows.empty()) os << "  (* = at rounding floor, excluded from the fit)\n";
  return os.str();
}

void write_convergence_csv(const std::string& path, const ConvergenceReport& r) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("write_convergence_csv: cannot open " + path);
  os.precision(17);
  os << "eps,mu_inf,nu_inf,rho_inf,h_inf,floored_mu,floored_nu,floored_rho\n";
  for (const ConvergenceRow& row : r.rows) {
    os << row.eps << ',' << row.mu_inf << ',' << row.nu_inf << ',' << row.rho_inf << ',' << row.h_inf << ','
       << (row.floored_mu ? 1 : 0) << ',' << (row.floored_nu ? 1 : 0) << ',' << (row.floored_rho ? 1 : 0) << "\n";
  }
}

}  // namespace shg
