#include "shg/phantom.hpp"

#include <cmath>

namespace shg {

RealField make_phantom(const GridSpec& g, double background, const std::vector<Inclusion>& inclusions) {
  RealField out(g, background);
  for (const Inclusion& inc : inclusions) {
    if (!(inc.size > 0.0)) throw ConfigError("make_phantom: inclusion size must be positive");
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double dx = g.x(i) - inc.cx;
        const double dy = g.y(j) - inc.cy;
        switch (inc.kind) {
          case InclusionKind::Disk:
            if (dx * dx + dy * dy <= inc.size * inc.size) out.at(i, j) += inc.amplitude;
            break;
          case InclusionKind::Square:
            if (std::abs(dx) <= inc.size && std::abs(dy) <= inc.size) out.at(i, j) += inc.amplitude;
            break;
          case InclusionKind::Gaussian:
            out.at(i, j) += inc.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * inc.size * inc.size));
            break;
        }
      }
    }
  }
  return out;
}

RealField make_phantom_bounded(const GridSpec& g, double background, const std::vector<Inclusion>& inclusions,
                               double c1, double c2, const std::string& name) {
  if (!(c1 <= c2)) throw ConfigError("make_phantom_bounded: c1 > c2 for " + name);
  RealField out = make_phantom(g, background, inclusions);
  for (double v : out.values) {
    if (v < c1 || v > c2) {
      throw AdmissibilityError("phantom '" + name + "' violates bounds [" + std::to_string(c1) + ", " +
                               std::to_string(c2) + "]: value " + std::to_string(v));
    }
  }
  return out;
}

}  // namespace shg
