#include "shg/medium.hpp"

namespace shg {

namespace {
void check_range(const RealField& f, double lo, double hi, const char* name) {
  for (double v : f.values) {
    if (v < lo || v > hi) {
      throw AdmissibilityError(std::string("coefficient '") + name + "' out of [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]: value " + std::to_string(v));
    }
  }
}
}  // namespace

void MediumSet::validate(double c1, double c2, bool chi2_relax_lower) const {
  if (!(c1 > 0.0) || !(c2 >= c1)) throw ConfigError("MediumSet: bounds must satisfy 0 < c1 <= c2");
  require_same_grid(gamma_g.grid, eta.grid, "MediumSet");
  require_same_grid(gamma_g.grid, sigma.grid, "MediumSet");
  require_same_grid(gamma_g.grid, chi2.grid, "MediumSet");
  check_range(gamma_g, c1, c2, "gamma_g");
  check_range(eta, c1, c2, "eta");
  check_range(sigma, c1, c2, "sigma");
  check_range(chi2, chi2_relax_lower ? 0.0 : c1, c2, "chi2");
}

ComplexField potential_q1(const RealField& eta, const RealField& sigma, double k) {
  require_same_grid(eta.grid, sigma.grid, "potential_q1");
  ComplexField q(eta.grid);
  for (size_t n = 0; n < q.values.size(); ++n)
    q.values[n] = Complex(k * k * (1.0 + eta.values[n]), k * sigma.values[n]);
  return q;
}

ComplexField potential_q2(const RealField& eta, const RealField& sigma, double k) {
  require_same_grid(eta.grid, sigma.grid, "potential_q2");
  ComplexField q(eta.grid);
  for (size_t n = 0; n < q.values.size(); ++n)
    q.values[n] = Complex(4.0 * k * k * (1.0 + eta.values[n]), 2.0 * k * sigma.values[n]);
  return q;
}

}  // namespace shg
