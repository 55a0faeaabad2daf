#include "shg/field.hpp"

#include <cmath>

namespace shg {

ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid);
  for (size_t n = 0; n < f.values.size(); ++n) out.values[n] = Complex(f.values[n], 0.0);
  return out;
}

RealField real_part(const ComplexField& f) {
  RealField out(f.grid);
  for (size_t n = 0; n < f.values.size(); ++n) out.values[n] = f.values[n].real();
  return out;
}

RealField imag_part(const ComplexField& f) {
  RealField out(f.grid);
  for (size_t n = 0; n < f.values.size(); ++n) out.values[n] = f.values[n].imag();
  return out;
}

RealField abs2(const ComplexField& f) {
  RealField out(f.grid);
  for (size_t n = 0; n < f.values.size(); ++n) out.values[n] = std::norm(f.values[n]);
  return out;
}

ComplexField conj(const ComplexField& f) {
  ComplexField out(f.grid);
  for (size_t n = 0; n < f.values.size(); ++n) out.values[n] = std::conj(f.values[n]);
  return out;
}

ComplexField add(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid, b.grid, "add");
  ComplexField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] + b.values[n];
  return out;
}

ComplexField sub(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid, b.grid, "sub");
  ComplexField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] - b.values[n];
  return out;
}

RealField add(const RealField& a, const RealField& b) {
  require_same_grid(a.grid, b.grid, "add");
  RealField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] + b.values[n];
  return out;
}

RealField sub(const RealField& a, const RealField& b) {
  require_same_grid(a.grid, b.grid, "sub");
  RealField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] - b.values[n];
  return out;
}

ComplexField scale(const ComplexField& a, Complex s) {
  ComplexField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = s * a.values[n];
  return out;
}

RealField scale(const RealField& a, double s) {
  RealField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = s * a.values[n];
  return out;
}

ComplexField mul(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid, b.grid, "mul");
  ComplexField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] * b.values[n];
  return out;
}

RealField mul(const RealField& a, const RealField& b) {
  require_same_grid(a.grid, b.grid, "mul");
  RealField out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] * b.values[n];
  return out;
}

BoundaryTrace add(const BoundaryTrace& a, const BoundaryTrace& b) {
  require_same_grid(a.grid, b.grid, "add");
  BoundaryTrace out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = a.values[n] + b.values[n];
  return out;
}

BoundaryTrace scale(const BoundaryTrace& a, Complex s) {
  BoundaryTrace out(a.grid);
  for (size_t n = 0; n < a.values.size(); ++n) out.values[n] = s * a.values[n];
  return out;
}

void require_finite(const RealField& f, const char* what) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": field has non-finite entries");
}

void require_finite(const ComplexField& f, const char* what) {
  for (const Complex& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ConfigError(std::string(what) + ": field has non-finite entries");
}

BoundaryTrace boundary_restrict(const ComplexField& f) {
  BoundaryTrace out(f.grid);
  auto bn = f.grid.boundary_nodes();
  for (size_t m = 0; m < bn.size(); ++m) out.values[m] = f.values[bn[m].index];
  return out;
}

}  // namespace shg
