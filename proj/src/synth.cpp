#include "shg/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "shg/fd_ops.hpp"
#include "shg/io.hpp"

namespace shg {

namespace fs = std::filesystem;
using nlohmann::json;

IlluminationPattern IlluminationPattern::constant(double amp) {
  IlluminationPattern p;
  p.kind = Kind::Constant;
  p.amplitude = amp;
  return p;
}

IlluminationPattern IlluminationPattern::plane_wave(double angle, double amp) {
  IlluminationPattern p;
  p.kind = Kind::PlaneWave;
  p.angle = angle;
  p.amplitude = amp;
  return p;
}

IlluminationPattern IlluminationPattern::boundary_bump(double center, double width, double amp) {
  if (!(width > 0.0)) throw ConfigError("boundary_bump: width must be positive");
  IlluminationPattern p;
  p.kind = Kind::BoundaryBump;
  p.center = center;
  p.width = width;
  p.amplitude = amp;
  return p;
}

IlluminationPattern IlluminationPattern::affine_plane_wave(double angle, double c0, double cx, double cy, double amp) {
  IlluminationPattern p;
  p.kind = Kind::AffinePlaneWave;
  p.angle = angle;
  p.c0 = c0;
  p.cx = cx;
  p.cy = cy;
  p.amplitude = amp;
  return p;
}

namespace {

// Normalized arclength in [0, 1), counterclockwise from (x0, y0).
double arclength(const GridSpec& g, const BoundaryNode& b) {
  const double P = 2.0 * (g.lx + g.ly);
  const double x = g.x(b.i) - g.x0, y = g.y(b.j) - g.y0;
  if (b.sides & kSideBottom) return x / P;
  if (b.sides & kSideRight) return (g.lx + y) / P;
  if (b.sides & kSideTop) return (g.lx + g.ly + (g.lx - x)) / P;
  return (2.0 * g.lx + g.ly + (g.ly - y)) / P;
}

}  // namespace

BoundaryTrace IlluminationPattern::evaluate(const GridSpec& g, double kappa) const {
  BoundaryTrace t(g);
  auto bn = g.boundary_nodes();
  for (size_t m = 0; m < bn.size(); ++m) {
    const double x = g.x(bn[m].i), y = g.y(bn[m].j);
    switch (kind) {
      case Kind::Zero:
        t.values[m] = 0.0;
        break;
      case Kind::Constant:
        t.values[m] = amplitude;
        break;
      case Kind::PlaneWave: {
        const double ph = kappa * (std::cos(angle) * x + std::sin(angle) * y);
        t.values[m] = amplitude * Complex(std::cos(ph), std::sin(ph));
        break;
      }
      case Kind::BoundaryBump: {
        const double s = arclength(g, bn[m]);
        double d = std::abs(s - center);
        d = std::min(d, 1.0 - d);
        t.values[m] = amplitude * std::exp(-d * d / (2.0 * width * width));
        break;
      }
      case Kind::AffinePlaneWave: {
        const double ph = kappa * (std::cos(angle) * x + std::sin(angle) * y);
        t.values[m] = (c0 + cx * x + cy * y) * amplitude * Complex(std::cos(ph), std::sin(ph));
        break;
      }
    }
  }
  return t;
}

IlluminationSet plane_wave_set(int n_s, double amplitude) {
  if (n_s < 1) throw ConfigError("plane_wave_set: n_s must be >= 1");
  IlluminationSet out;
  for (int j = 0; j < n_s; ++j) {
    const double angle = 2.0 * M_PI * j / n_s;
    out.push_back(IlluminationPair{IlluminationPattern::plane_wave(angle, amplitude), IlluminationPattern::zero()});
  }
  return out;
}

RealField internal_data(const ComplexField& u, const ComplexField& v, const RealField& gamma_g,
                        const RealField& sigma) {
  require_same_grid(u.grid, v.grid, "internal_data");
  require_same_grid(u.grid, gamma_g.grid, "internal_data");
  require_same_grid(u.grid, sigma.grid, "internal_data");
  RealField h(u.grid);
  for (size_t n = 0; n < h.values.size(); ++n)
    h.values[n] = gamma_g.values[n] * sigma.values[n] * (std::norm(u.values[n]) + std::norm(v.values[n]));
  return h;
}

BoundaryTrace neumann_data(const ComplexField& u) { return normal_derivative(u); }

ComplexField polarize(const RealField& h1, const RealField& h2, const RealField& h_sum, const RealField& h_isum) {
  require_same_grid(h1.grid, h2.grid, "polarize");
  require_same_grid(h1.grid, h_sum.grid, "polarize");
  require_same_grid(h1.grid, h_isum.grid, "polarize");
  ComplexField e(h1.grid);
  for (size_t n = 0; n < e.values.size(); ++n) {
    const double a = h1.values[n] + h2.values[n];
    e.values[n] = 0.5 * Complex(h_sum.values[n] - a, h_isum.values[n] - a);
  }
  return e;
}

RealField add_noise(const RealField& h, double level, uint64_t seed, uint64_t stream) {
  if (level < 0.0) throw ConfigError("add_noise: level must be nonnegative");
  RealField out = h;
  if (level == 0.0) return out;
  std::seed_seq sq{static_cast<uint64_t>(0x5347u), seed, stream};
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (double& v : out.values) v *= 1.0 + level * n01(rng);
  return out;
}

GridSpec refined_grid(const GridSpec& g, int factor) {
  if (factor < 1) throw ConfigError("refined_grid: factor must be >= 1");
  return GridSpec::make((g.nx - 1) * factor + 1, (g.ny - 1) * factor + 1, g.x0, g.y0, g.lx, g.ly);
}

RealField prolong_bilinear(const RealField& f, const GridSpec& fine) {
  const GridSpec& c = f.grid;
  if ((fine.nx - 1) % (c.nx - 1) != 0 || (fine.ny - 1) % (c.ny - 1) != 0)
    throw ConfigError("prolong_bilinear: fine grid is not a refinement of the coarse grid");
  const int fx = (fine.nx - 1) / (c.nx - 1), fy = (fine.ny - 1) / (c.ny - 1);
  RealField out(fine);
  for (int J = 0; J < fine.ny; ++J) {
    const int j0 = std::min(J / fy, c.ny - 2);
    const double s = static_cast<double>(J - j0 * fy) / fy;
    for (int I = 0; I < fine.nx; ++I) {
      const int i0 = std::min(I / fx, c.nx - 2);
      const double r = static_cast<double>(I - i0 * fx) / fx;
      out.at(I, J) = (1 - r) * (1 - s) * f.at(i0, j0) + r * (1 - s) * f.at(i0 + 1, j0) +
                     (1 - r) * s * f.at(i0, j0 + 1) + r * s * f.at(i0 + 1, j0 + 1);
    }
  }
  return out;
}

RealField restrict_inject(const RealField& f, const GridSpec& coarse) {
  const GridSpec& w = f.grid;
  if ((w.nx - 1) % (coarse.nx - 1) != 0 || (w.ny - 1) % (coarse.ny - 1) != 0)
    throw ConfigError("restrict_inject: grids are not nested");
  const int fx = (w.nx - 1) / (coarse.nx - 1), fy = (w.ny - 1) / (coarse.ny - 1);
  RealField out(coarse);
  for (int j = 0; j < coarse.ny; ++j)
    for (int i = 0; i < coarse.nx; ++i) out.at(i, j) = f.at(i * fx, j * fy);
  return out;
}

namespace {

BoundaryTrace restrict_trace(const BoundaryTrace& fine_tr, const GridSpec& fine, const GridSpec& coarse) {
  const int fx = (fine.nx - 1) / (coarse.nx - 1), fy = (fine.ny - 1) / (coarse.ny - 1);
  std::vector<int> pos(static_cast<size_t>(fine.count()), -1);
  auto fb = fine.boundary_nodes();
  for (size_t m = 0; m < fb.size(); ++m) pos[fb[m].index] = static_cast<int>(m);
  BoundaryTrace out(coarse);
  auto cb = coarse.boundary_nodes();
  for (size_t m = 0; m < cb.size(); ++m) {
    const int fi = fine.index(cb[m].i * fx, cb[m].j * fy);
    out.values[m] = fine_tr.values[pos[fi]];
  }
  return out;
}

MediumSet prolong_media(const MediumSet& m, const GridSpec& fine) {
  return MediumSet{prolong_bilinear(m.gamma_g, fine), prolong_bilinear(m.eta, fine),
                   prolong_bilinear(m.sigma, fine), prolong_bilinear(m.chi2, fine)};
}

}  // namespace

DataSet synthesize(const MediumSet& media, double k, const IlluminationSet& illum, ForwardModel model,
                   const SynthOptions& opts) {
  if (illum.empty()) throw ConfigError("synthesize: no illuminations");
  if (!(k > 0.0)) throw ConfigError("synthesize: k must be positive");
  const GridSpec data_grid = media.grid();
  const GridSpec work = opts.fine_factor > 1 ? refined_grid(data_grid, opts.fine_factor) : data_grid;
  const MediumSet media_w = opts.fine_factor > 1 ? prolong_media(media, work) : media;

  DataSet ds;
  ds.grid = data_grid;
  ds.k = k;
  ds.model = model;
  ds.polarized = opts.polarized;
  ds.noise_level = opts.noise_level;
  ds.seed = opts.seed;
  ds.fine_factor = opts.fine_factor;
  for (const IlluminationPair& p : illum) {
    ds.g.push_back(p.g.evaluate(data_grid, k));
    ds.h.push_back(p.h.evaluate(data_grid, 2.0 * k));
  }

  auto noisy = [&](RealField hf, uint64_t stream) {
    RealField r = restrict_inject(hf, data_grid);
    return opts.noise_level > 0.0 ? add_noise(r, opts.noise_level, opts.seed, stream) : r;
  };

  if (opts.polarized) {
    // Linear fundamental model; data for illumination w is gamma_g sigma |u(w)|^2.
    HelmholtzOperator op1(potential_q1(media_w.eta, media_w.sigma, k), BCSpec::dirichlet(), k,
                          opts.one_way.allow_nonpositive_im_q);
    SolveOptions so;
    so.res_tol = opts.one_way.res_tol;
    std::vector<ComplexField> u;
    u.reserve(illum.size());
    for (const IlluminationPair& p : illum) u.push_back(op1.solve(ComplexField(work), p.g.evaluate(work, k), so));
    const ComplexField zero_v(work);
    auto data_of = [&](const ComplexField& w) { return internal_data(w, zero_v, media_w.gamma_g, media_w.sigma); };
    const uint64_t n_s = illum.size();
    RealField h0 = noisy(data_of(u[0]), 0);
    ds.H.push_back(h0);
    ds.E.push_back(to_complex(h0));
    for (size_t j = 1; j < illum.size(); ++j) {
      RealField hj = noisy(data_of(u[j]), j);
      ComplexField us = add(u[0], u[j]);
      ComplexField ut = add(u[0], scale(u[j], Complex(0, 1)));
      RealField hs = noisy(data_of(us), n_s + 2 * j);
      RealField ht = noisy(data_of(ut), n_s + 2 * j + 1);
      ds.H.push_back(hj);
      ds.E.push_back(conj(polarize(h0, hj, hs, ht)));  // gamma_g sigma u_j conj(u_1)
    }
    if (opts.want_neumann)
      for (size_t j = 0; j < u.size(); ++j) ds.J_u.push_back(restrict_trace(neumann_data(u[j]), work, data_grid));
    return ds;
  }

  for (size_t j = 0; j < illum.size(); ++j) {
    SHGSolution sol;
    if (model == ForwardModel::Coupled) {
      sol = solve_coupled(media_w, k, illum[j].g.evaluate(work, k), illum[j].h.evaluate(work, 2.0 * k), opts.coupled);
    } else {
      sol = solve_one_way(media_w, k, illum[j].g.evaluate(work, k), opts.one_way);
    }
    ds.H.push_back(noisy(internal_data(sol.u, sol.v, media_w.gamma_g, media_w.sigma), j));
    if (opts.want_neumann) {
      ds.J_u.push_back(restrict_trace(neumann_data(sol.u), work, data_grid));
      ds.J_v.push_back(restrict_trace(neumann_data(sol.v), work, data_grid));
    }
  }
  return ds;
}

// --- directory serialization --------------------------------------------------

namespace {

std::string seqname(const char* stem, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu.fgrd", stem, i);
  return buf;
}

}  // namespace

void save_dataset(const std::string& dir, const DataSet& ds) {
  fs::create_directories(dir);
  json m;
  m["format"] = "shg-dataset";
  m["version"] = 1;
  m["grid"] = {{"nx", ds.grid.nx}, {"ny", ds.grid.ny}, {"x0", ds.grid.x0},
               {"y0", ds.grid.y0}, {"lx", ds.grid.lx}, {"ly", ds.grid.ly}};
  m["k"] = ds.k;
  m["model"] = ds.model == ForwardModel::Coupled ? "coupled" : "one_way";
  m["polarized"] = ds.polarized;
  m["noise_level"] = ds.noise_level;
  m["seed"] = ds.seed;
  m["fine_factor"] = ds.fine_factor;
  m["counts"] = {{"H", ds.H.size()}, {"E", ds.E.size()}, {"J_u", ds.J_u.size()},
                 {"J_v", ds.J_v.size()}, {"g", ds.g.size()}, {"h", ds.h.size()}};
  m["boundary_order"] = "ascending linear node index (j*nx + i, x fastest)";
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw ConfigError("save_dataset: cannot write manifest in " + dir);
  os << m.dump(2) << "\n";
  for (size_t i = 0; i < ds.H.size(); ++i) write_fgrid((fs::path(dir) / seqname("H", i)).string(), ds.H[i]);
  for (size_t i = 0; i < ds.E.size(); ++i) write_fgrid((fs::path(dir) / seqname("E", i)).string(), ds.E[i]);
  for (size_t i = 0; i < ds.J_u.size(); ++i) write_fgrid_trace((fs::path(dir) / seqname("J_u", i)).string(), ds.J_u[i]);
  for (size_t i = 0; i < ds.J_v.size(); ++i) write_fgrid_trace((fs::path(dir) / seqname("J_v", i)).string(), ds.J_v[i]);
  for (size_t i = 0; i < ds.g.size(); ++i) write_fgrid_trace((fs::path(dir) / seqname("g", i)).string(), ds.g[i]);
  for (size_t i = 0; i < ds.h.size(); ++i) write_fgrid_trace((fs::path(dir) / seqname("h", i)).string(), ds.h[i]);
}

DataSet load_dataset(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw ConfigError("load_dataset: no manifest in " + dir);
  json m = json::parse(is, nullptr, true);
  if (m.value("format", "") != "shg-dataset") throw ConfigError("load_dataset: not a dataset directory: " + dir);
  DataSet ds;
  const auto& gj = m.at("grid");
  ds.grid = GridSpec::make(gj.at("nx").get<int>(), gj.at("ny").get<int>(), gj.at("x0").get<double>(),
                           gj.at("y0").get<double>(), gj.at("lx").get<double>(), gj.at("ly").get<double>());
  ds.k = m.at("k").get<double>();
  ds.model = m.at("model").get<std::string>() == "coupled" ? ForwardModel::Coupled : ForwardModel::OneWay;
  ds.polarized = m.at("polarized").get<bool>();
  ds.noise_level = m.at("noise_level").get<double>();
  ds.seed = m.at("seed").get<uint64_t>();
  ds.fine_factor = m.at("fine_factor").get<int>();
  const auto& c = m.at("counts");
  for (size_t i = 0; i < c.at("H").get<size_t>(); ++i)
    ds.H.push_back(read_fgrid_real((fs::path(dir) / seqname("H", i)).string()));
  for (size_t i = 0; i < c.at("E").get<size_t>(); ++i)
    ds.E.push_back(read_fgrid_complex((fs::path(dir) / seqname("E", i)).string()));
  for (size_t i = 0; i < c.at("J_u").get<size_t>(); ++i)
    ds.J_u.push_back(read_fgrid_trace((fs::path(dir) / seqname("J_u", i)).string(), ds.grid));
  for (size_t i = 0; i < c.at("J_v").get<size_t>(); ++i)
    ds.J_v.push_back(read_fgrid_trace((fs::path(dir) / seqname("J_v", i)).string(), ds.grid));
  for (size_t i = 0; i < c.at("g").get<size_t>(); ++i)
    ds.g.push_back(read_fgrid_trace((fs::path(dir) / seqname("g", i)).string(), ds.grid));
  for (size_t i = 0; i < c.at("h").get<size_t>(); ++i)
    ds.h.push_back(read_fgrid_trace((fs::path(dir) / seqname("h", i)).string(), ds.grid));
  return ds;
}

}  // namespace shg
