#pragma once

#include <complex>
#include <vector>

#include "shg/grid.hpp"

namespace shg {

using Complex = std::complex<double>;

// Nodal scalar field, values in linear-index order (x fastest, y slow).
struct RealField {
  GridSpec grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const GridSpec& g, double fill = 0.0)
      : grid(g), values(static_cast<size_t>(g.count()), fill) {}
  double& at(int i, int j) { return values[grid.index(i, j)]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }
};

struct ComplexField {
  GridSpec grid;
  std::vector<Complex> values;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g, Complex fill = Complex(0, 0))
      : grid(g), values(static_cast<size_t>(g.count()), fill) {}
  Complex& at(int i, int j) { return values[grid.index(i, j)]; }
  Complex at(int i, int j) const { return values[grid.index(i, j)]; }
};

// Nodal vector field with complex components (gradients of complex fields).
struct VectorField {
  GridSpec grid;
  std::vector<Complex> vx, vy;

  VectorField() = default;
  explicit VectorField(const GridSpec& g)
      : grid(g), vx(static_cast<size_t>(g.count())), vy(static_cast<size_t>(g.count())) {}
};

// Values on the boundary nodes in the canonical boundary order of GridSpec.
struct BoundaryTrace {
  GridSpec grid;
  std::vector<Complex> values;

  BoundaryTrace() = default;
  explicit BoundaryTrace(const GridSpec& g, Complex fill = Complex(0, 0))
      : grid(g), values(static_cast<size_t>(g.boundary_count()), fill) {}
};

// --- basic field algebra ----------------------------------------------------

ComplexField to_complex(const RealField& f);
RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);
RealField abs2(const ComplexField& f);       // |f|^2 nodewise
ComplexField conj(const ComplexField& f);

ComplexField add(const ComplexField& a, const ComplexField& b);
ComplexField sub(const ComplexField& a, const ComplexField& b);
RealField add(const RealField& a, const RealField& b);
RealField sub(const RealField& a, const RealField& b);
ComplexField scale(const ComplexField& a, Complex s);
RealField scale(const RealField& a, double s);
ComplexField mul(const ComplexField& a, const ComplexField& b);
RealField mul(const RealField& a, const RealField& b);

BoundaryTrace add(const BoundaryTrace& a, const BoundaryTrace& b);
BoundaryTrace scale(const BoundaryTrace& a, Complex s);

void require_finite(const RealField& f, const char* what);
void require_finite(const ComplexField& f, const char* what);

// Evaluate f(x, y) at every node.
template <class F>
RealField sample_real(const GridSpec& g, F&& f) {
  RealField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

template <class F>
ComplexField sample_complex(const GridSpec& g, F&& f) {
  ComplexField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

// Evaluate f(x, y) on the boundary nodes in canonical order.
template <class F>
BoundaryTrace sample_trace(const GridSpec& g, F&& f) {
  BoundaryTrace out(g);
  auto bn = g.boundary_nodes();
  for (size_t m = 0; m < bn.size(); ++m) out.values[m] = f(g.x(bn[m].i), g.y(bn[m].j));
  return out;
}

// Restriction of a nodal field to the boundary, canonical order.
BoundaryTrace boundary_restrict(const ComplexField& f);

}  // namespace shg
