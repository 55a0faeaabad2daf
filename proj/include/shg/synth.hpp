#pragma once

#include <cstdint>
#include <string>

#include "shg/coupled.hpp"

namespace shg {

// Boundary illumination patterns, evaluable on any grid at any wavenumber.
struct IlluminationPattern {
  enum class Kind { Zero, Constant, PlaneWave, BoundaryBump, AffinePlaneWave };
  Kind kind = Kind::Zero;
  double amplitude = 1.0;
  double angle = 0.0;          // plane-wave direction
  double center = 0.0;         // bump position, normalized arclength in [0, 1)
  double width = 0.1;          // bump width in arclength units
  double c0 = 0.0, cx = 0.0, cy = 0.0;  // affine factor (c0 + cx x + cy y)

  static IlluminationPattern zero() { return {}; }
  static IlluminationPattern constant(double amp);
  static IlluminationPattern plane_wave(double angle, double amp = 1.0);
  static IlluminationPattern boundary_bump(double center, double width, double amp = 1.0);
  static IlluminationPattern affine_plane_wave(double angle, double c0, double cx, double cy, double amp = 1.0);

  // Trace at wavenumber kappa (pass k for the fundamental, 2k for the
  // second harmonic).
  BoundaryTrace evaluate(const GridSpec& g, double kappa) const;
};

struct IlluminationPair {
  IlluminationPattern g;  // fundamental Dirichlet data
  IlluminationPattern h;  // second-harmonic Dirichlet data (coupled model)
};

using IlluminationSet = std::vector<IlluminationPair>;

// N_s plane waves at angles 2 pi j / N_s.
IlluminationSet plane_wave_set(int n_s, double amplitude = 1.0);

// --- internal data ------------------------------------------------------------

// H = gamma_g sigma (|u|^2 + |v|^2)
RealField internal_data(const ComplexField& u, const ComplexField& v, const RealField& gamma_g,
                        const RealField& sigma);

BoundaryTrace neumann_data(const ComplexField& u);

// Polarization identity: from the four measurements for illuminations
// (g1, g2, g1+g2, g1+i g2) recover E = gamma_g sigma u1 conj(u2):
//   E = (H_sum + i H_isum - (1+i) H1 - (1+i) H2) / 2
ComplexField polarize(const RealField& h1, const RealField& h2, const RealField& h_sum, const RealField& h_isum);

// Multiplicative Gaussian noise H (1 + level zeta), zeta ~ N(0,1) iid.
// The RNG stream is derived deterministically from (seed, stream).
RealField add_noise(const RealField& h, double level, uint64_t seed, uint64_t stream);

// --- grid transfer -------------------------------------------------------------

GridSpec refined_grid(const GridSpec& g, int factor);
RealField prolong_bilinear(const RealField& f, const GridSpec& fine);
RealField restrict_inject(const RealField& f, const GridSpec& coarse);

// --- synthesis ------------------------------------------------------------------

struct SynthOptions {
  double noise_level = 0.0;
  uint64_t seed = 0;
  int fine_factor = 1;      // solve on a refined grid, restrict data by injection
  bool want_neumann = false;
  bool polarized = false;   // linear-model four-pattern protocol producing E fields
  CoupledOptions coupled;
  OneWayOptions one_way;
};

struct DataSet {
  GridSpec grid;
  double k = 1.0;
  ForwardModel model = ForwardModel::OneWay;
  bool polarized = false;
  double noise_level = 0.0;
  uint64_t seed = 0;
  int fine_factor = 1;
  std::vector<RealField> H;
  std::vector<ComplexField> E;        // polarized combinations, E[0] real-valued
  std::vector<BoundaryTrace> J_u, J_v;
  std::vector<BoundaryTrace> g, h;    // illumination traces on the data grid
};

// Forward-solve every illumination and package the internal data.  In
// polarized mode the fundamental is the linear model (second-order data up to
// a common positive multiple) and E_j = gamma_g sigma u_j conj(u_1).
DataSet synthesize(const MediumSet& media, double k, const IlluminationSet& illum, ForwardModel model,
                   const SynthOptions& opts = {});

// Directory round trip: manifest.json plus one FGRID file per field/trace.
void save_dataset(const std::string& dir, const DataSet& ds);
DataSet load_dataset(const std::string& dir);

}  // namespace shg
