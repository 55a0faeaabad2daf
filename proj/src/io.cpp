#include "shg/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace shg {

static_assert(std::endian::native == std::endian::little, "FGRID writer assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'F', 'G', 'R', 'D'};
constexpr uint32_t kVersion = 1;

struct Header {
  uint32_t nx, ny;
  uint8_t dtype;
  double x0, y0, lx, ly;
};

void write_header(std::ofstream& os, const Header& h) {
  os.write(kMagic, 4);
  uint32_t v = kVersion;
  os.write(reinterpret_cast<const char*>(&v), 4);
  os.write(reinterpret_cast<const char*>(&h.nx), 4);
  os.write(reinterpret_cast<const char*>(&h.ny), 4);
  os.write(reinterpret_cast<const char*>(&h.dtype), 1);
  os.write(reinterpret_cast<const char*>(&h.x0), 8);
  os.write(reinterpret_cast<const char*>(&h.y0), 8);
  os.write(reinterpret_cast<const char*>(&h.lx), 8);
  os.write(reinterpret_cast<const char*>(&h.ly), 8);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  return os;
}

}  // namespace

void write_fgrid(const std::string& path, const RealField& f) {
  auto os = open_out(path);
  write_header(os, Header{static_cast<uint32_t>(f.grid.nx), static_cast<uint32_t>(f.grid.ny),
                          static_cast<uint8_t>(FgridDtype::Real64), f.grid.x0, f.grid.y0, f.grid.lx, f.grid.ly});
  os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
  if (!os) throw ConfigError("short write: " + path);
}

void write_fgrid(const std::string& path, const ComplexField& f) {
  auto os = open_out(path);
  write_header(os, Header{static_cast<uint32_t>(f.grid.nx), static_cast<uint32_t>(f.grid.ny),
                          static_cast<uint8_t>(FgridDtype::Complex128), f.grid.x0, f.grid.y0, f.grid.lx, f.grid.ly});
  os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 16));
  if (!os) throw ConfigError("short write: " + path);
}

void write_fgrid_trace(const std::string& path, const BoundaryTrace& t) {
  auto os = open_out(path);
  const uint32_t m = static_cast<uint32_t>(t.values.size());
  write_header(os, Header{m, 1, static_cast<uint8_t>(FgridDtype::Complex128), 0.0, 0.0,
                          m > 1 ? static_cast<double>(m - 1) : 0.0, 0.0});
  os.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * 16));
  if (!os) throw ConfigError("short write: " + path);
}

FgridFile read_fgrid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("not an FGRID file: " + path);
  uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), 4);
  if (version != kVersion) throw ConfigError("unsupported FGRID version in " + path);
  FgridFile f;
  uint8_t dtype = 0;
  is.read(reinterpret_cast<char*>(&f.nx), 4);
  is.read(reinterpret_cast<char*>(&f.ny), 4);
  is.read(reinterpret_cast<char*>(&dtype), 1);
  is.read(reinterpret_cast<char*>(&f.x0), 8);
  is.read(reinterpret_cast<char*>(&f.y0), 8);
  is.read(reinterpret_cast<char*>(&f.lx), 8);
  is.read(reinterpret_cast<char*>(&f.ly), 8);
  if (!is) throw ConfigError("truncated FGRID header: " + path);
  if (dtype > 1) throw ConfigError("unknown FGRID dtype in " + path);
  f.dtype = static_cast<FgridDtype>(dtype);
  const size_t n = static_cast<size_t>(f.nx) * f.ny;
  if (f.dtype == FgridDtype::Real64) {
    f.real_values.resize(n);
    is.read(reinterpret_cast<char*>(f.real_values.data()), static_cast<std::streamsize>(n * 8));
  } else {
    f.complex_values.resize(n);
    is.read(reinterpret_cast<char*>(f.complex_values.data()), static_cast<std::streamsize>(n * 16));
  }
  if (!is) throw ConfigError("truncated FGRID payload: " + path);
  return f;
}

RealField read_fgrid_real(const std::string& path) {
  FgridFile f = read_fgrid(path);
  if (f.dtype != FgridDtype::Real64) throw ConfigError("expected real64 FGRID: " + path);
  RealField out(GridSpec::make(static_cast<int>(f.nx), static_cast<int>(f.ny), f.x0, f.y0, f.lx, f.ly));
  out.values = std::move(f.real_values);
  return out;
}

ComplexField read_fgrid_complex(const std::string& path) {
  FgridFile f = read_fgrid(path);
  if (f.dtype != FgridDtype::Complex128) throw ConfigError("expected complex128 FGRID: " + path);
  ComplexField out(GridSpec::make(static_cast<int>(f.nx), static_cast<int>(f.ny), f.x0, f.y0, f.lx, f.ly));
  out.values = std::move(f.complex_values);
  return out;
}

BoundaryTrace read_fgrid_trace(const std::string& path, const GridSpec& grid) {
  FgridFile f = read_fgrid(path);
  if (f.dtype != FgridDtype::Complex128 || f.ny != 1) throw ConfigError("expected 1 x m complex trace: " + path);
  if (static_cast<int>(f.nx) != grid.boundary_count())
    throw ConfigError("trace length does not match grid boundary count: " + path);
  BoundaryTrace t(grid);
  t.values = std::move(f.complex_values);
  return t;
}

namespace {

void write_csv_impl(const std::string& path, const GridSpec& g, const std::vector<double>* re,
                    const std::vector<Complex>* cx) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os.precision(17);
  os << (cx ? "x,y,re,im\n" : "x,y,re\n");
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.index(i, j);
      os << g.x(i) << ',' << g.y(j) << ',';
      if (cx)
        os << (*cx)[n].real() << ',' << (*cx)[n].imag() << '\n';
      else
        os << (*re)[n] << '\n';
    }
  }
  if (!os) throw ConfigError("short write: " + path);
}

}  // namespace

void write_csv(const std::string& path, const RealField& f) { write_csv_impl(path, f.grid, &f.values, nullptr); }
void write_csv(const std::string& path, const ComplexField& f) { write_csv_impl(path, f.grid, nullptr, &f.values); }

}  // namespace shg
