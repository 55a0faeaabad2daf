#include "shg/png.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "shg/errors.hpp"

namespace shg {
namespace {

void put_be32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void put_chunk(std::vector<unsigned char>& out, const char type[4], const std::vector<unsigned char>& data) {
  put_be32(out, static_cast<uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_be32(out, static_cast<uint32_t>(crc));
}

// viridis anchors sampled uniformly on [0, 1]
constexpr unsigned char kViridis[16][3] = {
    {68, 1, 84},   {71, 24, 106},  {71, 45, 123},  {66, 64, 134},  {59, 82, 139},  {51, 99, 141},
    {44, 114, 142}, {38, 130, 142}, {33, 145, 140}, {31, 160, 136}, {40, 174, 128}, {63, 188, 115},
    {94, 201, 98},  {132, 212, 75}, {173, 220, 48}, {253, 231, 37}};

void colorize(double t, Colormap map, unsigned char* px) {
  t = std::clamp(t, 0.0, 1.0);
  if (map == Colormap::Gray) {
    const auto v = static_cast<unsigned char>(std::lround(255.0 * t));
    px[0] = px[1] = px[2] = v;
    return;
  }
  const double s = t * 15.0;
  const int lo = std::min(14, static_cast<int>(s));
  const double w = s - lo;
  for (int c = 0; c < 3; ++c)
    px[c] = static_cast<unsigned char>(std::lround((1.0 - w) * kViridis[lo][c] + w * kViridis[lo + 1][c]));
}

}  // namespace

void write_png_rgb(const std::string& path, int width, int height, const std::vector<unsigned char>& rgb) {
  if (width <= 0 || height <= 0) throw ConfigError("png: empty image");
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw ConfigError("png: pixel buffer size mismatch");

  // filter byte 0 per scanline
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(height) * (1 + static_cast<std::size_t>(width) * 3));
  for (int r = 0; r < height; ++r) {
    raw.push_back(0);
    const auto* row = rgb.data() + static_cast<std::size_t>(r) * width * 3;
    raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * 3);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> z(bound);
  if (compress2(z.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error("png: deflate failed");
  z.resize(bound);

  std::vector<unsigned char> out;
  static const unsigned char sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  out.insert(out.end(), sig, sig + 8);
  std::vector<unsigned char> ihdr;
  put_be32(ihdr, static_cast<uint32_t>(width));
  put_be32(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write failed: " + path);
}

void write_png(const std::string& path, const RealField& f, const PngOptions& opts) {
  const int nx = f.grid.nx, ny = f.grid.ny;
  double vmin = opts.vmin, vmax = opts.vmax;
  std::size_t nan_count = 0;
  if (!opts.fixed_range) {
    vmin = std::numeric_limits<double>::infinity();
    vmax = -vmin;
    for (double v : f.values) {
      if (std::isfinite(v)) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    }
    if (!std::isfinite(vmin)) {
      vmin = 0.0;
      vmax = 1.0;
    }
  }
  for (double v : f.values)
    if (!std::isfinite(v)) ++nan_count;
  const double span = vmax > vmin ? vmax - vmin : 1.0;

  std::vector<unsigned char> rgb(static_cast<std::size_t>(nx) * ny * 3);
  for (int r = 0; r < ny; ++r) {
    const int j = ny - 1 - r;
    for (int i = 0; i < nx; ++i) {
      unsigned char* px = rgb.data() + (static_cast<std::size_t>(r) * nx + i) * 3;
      const double v = f.at(i, j);
      if (!std::isfinite(v)) {
        px[0] = 255;
        px[1] = 0;
        px[2] = 255;
      } else {
        colorize((v - vmin) / span, opts.map, px);
      }
    }
  }
  write_png_rgb(path, nx, ny, rgb);

  if (opts.range_sidecar) {
    nlohmann::json j;
    j["min"] = vmin;
    j["max"] = vmax;
    j["nan_count"] = nan_count;
    std::ofstream s(path + ".json");
    if (!s) throw Error("cannot open " + path + ".json");
    s << j.dump(2) << '\n';
  }
}

}  // namespace shg
