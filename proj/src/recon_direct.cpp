#include "shg/recon_direct.hpp"

#include <cmath>

namespace shg {

VectorField build_beta(const RealField& e1, const ComplexField& e2, double alpha_floor_rel) {
  require_same_grid(e1.grid, e2.grid, "build_beta");
  const double e1max = norm_linf(e1);
  if (!(e1max > 0.0)) throw DataConditionError("build_beta: E1 is identically zero");
  const double floor = alpha_floor_rel * e1max;
  ComplexField r(e1.grid);
  for (size_t n = 0; n < r.values.size(); ++n) {
    if (!(e1.values[n] >= floor))
      throw DataConditionError("build_beta: E1 falls below the positivity floor (condition B-i)");
    r.values[n] = e2.values[n] / e1.values[n];
  }
  return gradient(r);
}

ConditionReport check_conditions(const RealField& e1, const ComplexField& e2, const VectorField& beta,
                                 double alpha_floor_rel, double beta_floor) {
  require_same_grid(e1.grid, beta.grid, "check_conditions");
  ConditionReport rep;
  rep.alpha0 = e1.values.empty() ? 0.0 : e1.values[0];
  for (double v : e1.values) rep.alpha0 = std::min(rep.alpha0, v);
  double bmin = std::numeric_limits<double>::infinity(), bmax = 0.0, rmax = 0.0;
  for (size_t n = 0; n < beta.vx.size(); ++n) {
    const double m = std::sqrt(std::norm(beta.vx[n]) + std::norm(beta.vy[n]));
    bmin = std::min(bmin, m);
    bmax = std::max(bmax, m);
    if (e1.values[n] > 0.0) rmax = std::max(rmax, std::abs(e2.values[n]) / e1.values[n]);
  }
  rep.beta0 = bmin;
  rep.beta_sup = bmax;
  rep.e2e1_sup = rmax;
  rep.pass_alpha = rep.alpha0 >= alpha_floor_rel * norm_linf(e1);
  rep.pass_beta = rep.beta0 >= beta_floor;
  return rep;
}

PotentialResult recover_potential(const ComplexField& xi, double k, double threshold) {
  if (!(k > 0.0)) throw ConfigError("recover_potential: k must be positive");
  const GridSpec& g = xi.grid;
  PotentialResult out;
  out.eta = RealField(g);
  out.sigma = RealField(g);
  out.q = ComplexField(g);
  out.mask.assign(xi.values.size(), 0);
  out.sigma_pos.assign(xi.values.size(), 0);
  const ComplexField lap = laplacian(xi);
  const VectorField grad = gradient(xi);
  const double ximax = norm_linf(xi);
  if (!(ximax > 0.0)) throw DataConditionError("recover_potential: xi is identically zero");
  const double floor = threshold * ximax;
  for (size_t n = 0; n < xi.values.size(); ++n) {
    const Complex x = xi.values[n];
    if (std::abs(x) < floor) {
      ++out.masked_count;
      continue;
    }
    const Complex gg = grad.vx[n] * grad.vx[n] + grad.vy[n] * grad.vy[n];
    const Complex q = -(2.0 * x * lap.values[n] - gg) / (4.0 * x * x);
    out.mask[n] = 1;
    const double sig = q.imag() / k;
    const double eta = q.real() / (k * k) - 1.0;
    out.sigma.values[n] = sig;
    out.eta.values[n] = eta;
    // reassemble so the stored potential satisfies the exact identity
    out.q.values[n] = Complex(k * k * (1.0 + eta), k * sig);
    out.sigma_pos[n] = sig > 0.0 ? 1 : 0;
  }
  return out;
}

GrueneisenResult recover_grueneisen(const RealField& h1, const RealField& sigma, const ComplexField& xi,
                                    const std::vector<uint8_t>& mask) {
  require_same_grid(h1.grid, sigma.grid, "recover_grueneisen");
  require_same_grid(h1.grid, xi.grid, "recover_grueneisen");
  if (mask.size() != h1.values.size()) throw ConfigError("recover_grueneisen: mask size mismatch");
  GrueneisenResult out;
  out.gamma_g = RealField(h1.grid);
  out.mask.assign(h1.values.size(), 0);
  for (size_t n = 0; n < h1.values.size(); ++n) {
    if (!mask[n] || !(sigma.values[n] > 0.0)) continue;
    const double den = sigma.values[n] * std::abs(xi.values[n]);
    if (!(den > 0.0)) continue;
    out.gamma_g.values[n] = h1.values[n] / den;
    out.mask[n] = 1;
  }
  return out;
}

DirectReconResult direct_pipeline(const PolarizedPair& data, const BoundaryTrace& g1, double k,
                                  const DirectReconOptions& opts) {
  DirectReconResult r;
  r.beta = build_beta(data.E1, data.E2, opts.alpha_floor_rel);
  r.conditions = check_conditions(data.E1, data.E2, r.beta, opts.alpha_floor_rel, opts.beta_floor);
  r.transport = solve_transport(r.beta, g1, opts.transport);
  r.potential = recover_potential(r.transport.xi, k, opts.xi_mask_threshold);
  r.grueneisen = recover_grueneisen(data.H1, r.potential.sigma, r.transport.xi, r.potential.mask);
  return r;
}

StabilityReport stability_surrogate(const PolarizedPair& a, const DirectReconResult& ra, const PolarizedPair& b,
                                    const DirectReconResult& rb) {
  require_same_grid(a.E1.grid, b.E1.grid, "stability_surrogate");
  const GridSpec& g = a.E1.grid;
  const double w = g.hx() * g.hy();
  double num = 0.0;
  for (size_t n = 0; n < a.E1.values.size(); ++n) {
    if (!ra.grueneisen.mask[n] || !rb.grueneisen.mask[n]) continue;
    const double pa = ra.grueneisen.gamma_g.values[n] * ra.potential.sigma.values[n];
    const double pb = rb.grueneisen.gamma_g.values[n] * rb.potential.sigma.values[n];
    num += w * (pa - pb) * (pa - pb);
  }
  StabilityReport rep;
  rep.num = std::sqrt(num);
  rep.den = norm_l2(sub(a.H1, b.H1)) + norm_l2(sub(a.E1, b.E1)) + norm_l2(sub(a.E2, b.E2));
  rep.ratio = rep.den > 0.0 ? rep.num / rep.den : 0.0;
  return rep;
}

}  // namespace shg
