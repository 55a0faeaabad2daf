#include "shg/grid.hpp"

namespace shg {

std::vector<BoundaryNode> GridSpec::boundary_nodes() const {
  std::vector<BoundaryNode> out;
  out.reserve(static_cast<size_t>(boundary_count()));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!is_boundary(i, j)) continue;
      out.push_back(BoundaryNode{i, j, index(i, j), sides(i, j)});
    }
  }
  return out;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": fields live on different grids");
}

}  // namespace shg
