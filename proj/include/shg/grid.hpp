#pragma once

#include <cstdint>
#include <vector>

#include "shg/errors.hpp"

namespace shg {

// Sides of the rectangular domain, usable as a bitmask for corner nodes.
enum Side : unsigned {
  kSideNone = 0,
  kSideLeft = 1,
  kSideRight = 2,
  kSideBottom = 4,
  kSideTop = 8,
};

struct BoundaryNode {
  int i = 0;
  int j = 0;
  int index = 0;        // linear node index j*nx + i
  unsigned sides = 0;   // bitmask of Side
  bool corner() const { return sides != kSideLeft && sides != kSideRight && sides != kSideBottom && sides != kSideTop; }
};

// Uniform tensor grid on [x0, x0+lx] x [y0, y0+ly] with nx*ny nodes.
// Linear index is row-major with x fastest: index(i,j) = j*nx + i.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 0.0;
  double ly = 0.0;

  static GridSpec make(int nx, int ny, double x0, double y0, double lx, double ly) {
    if (nx < 2 || ny < 2) throw ConfigError("GridSpec: nx, ny must be >= 2");
    if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("GridSpec: lx, ly must be positive");
    return GridSpec{nx, ny, x0, y0, lx, ly};
  }
  static GridSpec unit_square(int n) { return make(n, n, 0.0, 0.0, 1.0, 1.0); }

  double hx() const { return lx / (nx - 1); }
  double hy() const { return ly / (ny - 1); }
  int count() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  double x(int i) const { return x0 + i * hx(); }
  double y(int j) const { return y0 + j * hy(); }

  bool is_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  unsigned sides(int i, int j) const {
    unsigned s = kSideNone;
    if (i == 0) s |= kSideLeft;
    if (i == nx - 1) s |= kSideRight;
    if (j == 0) s |= kSideBottom;
    if (j == ny - 1) s |= kSideTop;
    return s;
  }
  int boundary_count() const { return 2 * nx + 2 * ny - 4; }
  int interior_count() const { return (nx - 2) * (ny - 2); }

  // Boundary nodes in canonical order: ascending linear index.  This order is
  // the storage contract for boundary traces everywhere in the toolkit.
  std::vector<BoundaryNode> boundary_nodes() const;

  bool operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && lx == o.lx && ly == o.ly;
  }
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace shg
