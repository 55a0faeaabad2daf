#pragma once

#include "shg/field.hpp"

namespace shg {

// Five-point Laplacian.  Interior nodes use the centered stencil; boundary
// nodes use one-sided second-order differences along the off-grid axis
// (4-point when nx or ny >= 4, 3-point fallback otherwise).  Boundary values
// are meaningful only where an operation explicitly consumes them.
ComplexField laplacian(const ComplexField& f);
RealField laplacian(const RealField& f);

// Nodal gradient: centered interior, one-sided 3-point second-order at the
// boundary.  Requires nx, ny >= 3.
VectorField gradient(const ComplexField& f);
VectorField gradient(const RealField& f);

// Divergence of a nodal vector field, same stencils as gradient.
ComplexField divergence(const VectorField& v);

// Outward normal derivative on the boundary nodes, canonical order.
// One-sided 3-point stencil along the normal axis; corners average the two
// edge formulas.  Requires nx, ny >= 4.
BoundaryTrace normal_derivative(const ComplexField& f);
BoundaryTrace normal_derivative(const RealField& f);

// Trapezoid-free discrete norms: l2 is sqrt(hx*hy * sum |f|^2).
double norm_l2(const RealField& f);
double norm_l2(const ComplexField& f);
double norm_linf(const RealField& f);
double norm_linf(const ComplexField& f);
double norm_linf(const BoundaryTrace& g);
double rel_l2(const RealField& f, const RealField& ref);
double rel_l2(const ComplexField& f, const ComplexField& ref);

// rel_l2 restricted to nodes where mask != 0.
double rel_l2_masked(const RealField& f, const RealField& ref, const std::vector<uint8_t>& mask);

}  // namespace shg
