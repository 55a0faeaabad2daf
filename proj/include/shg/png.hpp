#pragma once

#include <string>
#include <vector>

#include "shg/field.hpp"

namespace shg {

enum class Colormap { Gray, Viridis };

struct PngOptions {
  Colormap map = Colormap::Viridis;
  bool range_sidecar = true;  // writes <path>.json with min/max/nan_count
  bool fixed_range = false;   // otherwise min/max of the finite values
  double vmin = 0.0;
  double vmax = 1.0;
};

// 8-bit RGB image of the field, rows top to bottom in descending y so the
// output is oriented like a plot.  Non-finite values render magenta.
void write_png(const std::string& path, const RealField& f, const PngOptions& opts = {});

// Raw RGB encoder (3 bytes per pixel, row-major from the top row).
void write_png_rgb(const std::string& path, int width, int height, const std::vector<unsigned char>& rgb);

}  // namespace shg
