#pragma once

#include <string>
#include <vector>

#include "shg/field.hpp"

namespace shg {

enum class InclusionKind { Disk, Square, Gaussian };

struct Inclusion {
  InclusionKind kind = InclusionKind::Disk;
  double cx = 0.0;
  double cy = 0.0;
  double size = 0.1;       // radius / half-width / gaussian sigma
  double amplitude = 0.0;  // added on top of the background
};

// Coefficient field: background plus additive inclusions.  Disk and square
// inclusions are indicator-supported; gaussian is smooth and global.
RealField make_phantom(const GridSpec& g, double background, const std::vector<Inclusion>& inclusions);

// Same, then checks c1 <= f <= c2 everywhere and throws AdmissibilityError
// naming `name` on violation.
RealField make_phantom_bounded(const GridSpec& g, double background, const std::vector<Inclusion>& inclusions,
                               double c1, double c2, const std::string& name);

}  // namespace shg
