#include "shg/fd_ops.hpp"

#include <cmath>

namespace shg {
namespace {

// One-dimensional second derivative at position p in a line of n nodes with
// spacing h; accessor a(t) returns the value at offset t from the line start.
template <class A>
auto d2_1d(const A& a, int p, int n, double h) {
  const double ih2 = 1.0 / (h * h);
  if (p > 0 && p < n - 1) return (a(p - 1) + a(p + 1) - 2.0 * a(p)) * ih2;
  if (p == 0) {
    if (n >= 4) return (2.0 * a(0) - 5.0 * a(1) + 4.0 * a(2) - a(3)) * ih2;
    return (a(0) - 2.0 * a(1) + a(2)) * ih2;
  }
  if (n >= 4) return (2.0 * a(n - 1) - 5.0 * a(n - 2) + 4.0 * a(n - 3) - a(n - 4)) * ih2;
  return (a(n - 1) - 2.0 * a(n - 2) + a(n - 3)) * ih2;
}

template <class A>
auto d1_1d(const A& a, int p, int n, double h) {
  const double i2h = 1.0 / (2.0 * h);
  if (p > 0 && p < n - 1) return (a(p + 1) - a(p - 1)) * i2h;
  if (p == 0) return (-3.0 * a(0) + 4.0 * a(1) - a(2)) * i2h;
  return (3.0 * a(n - 1) - 4.0 * a(n - 2) + a(n - 3)) * i2h;
}

template <class Field>
Field laplacian_impl(const Field& f) {
  const GridSpec& g = f.grid;
  if (g.nx < 3 || g.ny < 3) throw ConfigError("laplacian: requires nx, ny >= 3");
  Field out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      auto ax = [&](int t) { return f.at(t, j); };
      auto ay = [&](int t) { return f.at(i, t); };
      out.at(i, j) = d2_1d(ax, i, g.nx, g.hx()) + d2_1d(ay, j, g.ny, g.hy());
    }
  }
  return out;
}

template <class Field>
VectorField gradient_impl(const Field& f) {
  const GridSpec& g = f.grid;
  if (g.nx < 3 || g.ny < 3) throw ConfigError("gradient: requires nx, ny >= 3");
  VectorField out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      auto ax = [&](int t) { return f.at(t, j); };
      auto ay = [&](int t) { return f.at(i, t); };
      out.vx[g.index(i, j)] = d1_1d(ax, i, g.nx, g.hx());
      out.vy[g.index(i, j)] = d1_1d(ay, j, g.ny, g.hy());
    }
  }
  return out;
}

template <class Field>
BoundaryTrace normal_derivative_impl(const Field& f) {
  const GridSpec& g = f.grid;
  if (g.nx < 4 || g.ny < 4) throw ConfigError("normal_derivative: requires nx, ny >= 4");
  BoundaryTrace out(g);
  auto bn = g.boundary_nodes();
  for (size_t m = 0; m < bn.size(); ++m) {
    const BoundaryNode& b = bn[m];
    auto ax = [&](int t) { return f.at(t, b.j); };
    auto ay = [&](int t) { return f.at(b.i, t); };
    Complex acc(0, 0);
    int parts = 0;
    if (b.sides & kSideLeft) { acc += -Complex(d1_1d(ax, 0, g.nx, g.hx())); ++parts; }
    if (b.sides & kSideRight) { acc += Complex(d1_1d(ax, g.nx - 1, g.nx, g.hx())); ++parts; }
    if (b.sides & kSideBottom) { acc += -Complex(d1_1d(ay, 0, g.ny, g.hy())); ++parts; }
    if (b.sides & kSideTop) { acc += Complex(d1_1d(ay, g.ny - 1, g.ny, g.hy())); ++parts; }
    out.values[m] = acc / static_cast<double>(parts);
  }
  return out;
}

}  // namespace

ComplexField laplacian(const ComplexField& f) { return laplacian_impl(f); }
RealField laplacian(const RealField& f) { return laplacian_impl(f); }
VectorField gradient(const ComplexField& f) { return gradient_impl(f); }
VectorField gradient(const RealField& f) { return gradient_impl(f); }

ComplexField divergence(const VectorField& v) {
  const GridSpec& g = v.grid;
  if (g.nx < 3 || g.ny < 3) throw ConfigError("divergence: requires nx, ny >= 3");
  ComplexField out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      auto ax = [&](int t) { return v.vx[g.index(t, j)]; };
      auto ay = [&](int t) { return v.vy[g.index(i, t)]; };
      out.at(i, j) = d1_1d(ax, i, g.nx, g.hx()) + d1_1d(ay, j, g.ny, g.hy());
    }
  }
  return out;
}

BoundaryTrace normal_derivative(const ComplexField& f) { return normal_derivative_impl(f); }
BoundaryTrace normal_derivative(const RealField& f) { return normal_derivative_impl(to_complex(f)); }

double norm_l2(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(f.grid.hx() * f.grid.hy() * s);
}

double norm_l2(const ComplexField& f) {
  double s = 0.0;
  for (const Complex& v : f.values) s += std::norm(v);
  return std::sqrt(f.grid.hx() * f.grid.hy() * s);
}

double norm_linf(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s = std::max(s, std::abs(v));
  return s;
}

double norm_linf(const ComplexField& f) {
  double s = 0.0;
  for (const Complex& v : f.values) s = std::max(s, std::abs(v));
  return s;
}

double norm_linf(const BoundaryTrace& g) {
  double s = 0.0;
  for (const Complex& v : g.values) s = std::max(s, std::abs(v));
  return s;
}

double rel_l2(const RealField& f, const RealField& ref) {
  require_same_grid(f.grid, ref.grid, "rel_l2");
  double num = 0.0, den = 0.0;
  for (size_t n = 0; n < f.values.size(); ++n) {
    const double d = f.values[n] - ref.values[n];
    num += d * d;
    den += ref.values[n] * ref.values[n];
  }
  if (den == 0.0) throw ConfigError("rel_l2: reference field is identically zero");
  return std::sqrt(num / den);
}

double rel_l2(const ComplexField& f, const ComplexField& ref) {
  require_same_grid(f.grid, ref.grid, "rel_l2");
  double num = 0.0, den = 0.0;
  for (size_t n = 0; n < f.values.size(); ++n) {
    num += std::norm(f.values[n] - ref.values[n]);
    den += std::norm(ref.values[n]);
  }
  if (den == 0.0) throw ConfigError("rel_l2: reference field is identically zero");
  return std::sqrt(num / den);
}

double rel_l2_masked(const RealField& f, const RealField& ref, const std::vector<uint8_t>& mask) {
  require_same_grid(f.grid, ref.grid, "rel_l2_masked");
  if (mask.size() != f.values.size()) throw ConfigError("rel_l2_masked: mask size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t n = 0; n < f.values.size(); ++n) {
    if (!mask[n]) continue;
    const double d = f.values[n] - ref.values[n];
    num += d * d;
    den += ref.values[n] * ref.values[n];
  }
  if (den == 0.0) throw ConfigError("rel_l2_masked: reference is zero on the masked set");
  return std::sqrt(num / den);
}

}  // namespace shg
