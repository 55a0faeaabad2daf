#pragma once

#include <optional>
#include <string>

#include "shg/field.hpp"

namespace shg {

// FGRID v1: little-endian binary scalar field container.
//   magic   "FGRD" (4 bytes)
//   version u32 = 1
//   nx, ny  u32
//   dtype   u8   (0 = real64, 1 = complex128)
//   x0, y0, lx, ly  float64
//   values  row-major with x fastest (complex stored as re, im pairs)
// Boundary traces are stored as 1 x m complex files (ny = 1, ly = 0) whose
// column order is the canonical boundary order of GridSpec.

enum class FgridDtype : uint8_t { Real64 = 0, Complex128 = 1 };

struct FgridFile {
  uint32_t nx = 0, ny = 0;
  FgridDtype dtype = FgridDtype::Real64;
  double x0 = 0, y0 = 0, lx = 0, ly = 0;
  std::vector<double> real_values;      // filled when dtype == Real64
  std::vector<Complex> complex_values;  // filled when dtype == Complex128
};

void write_fgrid(const std::string& path, const RealField& f);
void write_fgrid(const std::string& path, const ComplexField& f);
void write_fgrid_trace(const std::string& path, const BoundaryTrace& t);

FgridFile read_fgrid(const std::string& path);
RealField read_fgrid_real(const std::string& path);
ComplexField read_fgrid_complex(const std::string& path);
BoundaryTrace read_fgrid_trace(const std::string& path, const GridSpec& grid);

// CSV export with header "x,y,re[,im]"; one row per node, linear-index order.
void write_csv(const std::string& path, const RealField& f);
void write_csv(const std::string& path, const ComplexField& f);

}  // namespace shg
