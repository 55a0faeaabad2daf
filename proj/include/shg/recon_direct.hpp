#pragma once

#include "shg/transport.hpp"

namespace shg {

// Polarized second-order data for a pair of illuminations (g1, g2):
//   E1 = gamma_g sigma |u1|^2   (real, positive where usable)
//   E2 = gamma_g sigma u2 conj(u1)
//   H1 = measured internal data for g1 (equal to E1 in the noise-free limit)
struct PolarizedPair {
  RealField E1;
  ComplexField E2;
  RealField H1;
};

// beta = grad(E2 / E1); requires E1 >= alpha_floor_rel * max(E1) everywhere.
VectorField build_beta(const RealField& e1, const ComplexField& e2, double alpha_floor_rel = 1e-8);

struct ConditionReport {
  double alpha0 = 0.0;    // min E1
  double beta0 = 0.0;     // min |beta|
  double beta_sup = 0.0;  // max |beta|
  double e2e1_sup = 0.0;  // max |E2/E1|
  bool pass_alpha = false;
  bool pass_beta = false;
  bool pass() const { return pass_alpha && pass_beta; }
};

ConditionReport check_conditions(const RealField& e1, const ComplexField& e2, const VectorField& beta,
                                 double alpha_floor_rel = 1e-8, double beta_floor = 1e-8);

struct PotentialResult {
  ComplexField q;     // reassembled: exactly k^2 (1 + eta) + i k sigma
  RealField eta;
  RealField sigma;
  std::vector<uint8_t> mask;       // 1 = node accepted (|xi| above threshold)
  std::vector<uint8_t> sigma_pos;  // 1 = recovered sigma positive
  int masked_count = 0;
};

// Branch-free potential from xi = u1^2:
//   q = -(2 xi lap(xi) - grad(xi).grad(xi)) / (4 xi^2)  (= -lap(u1)/u1)
// Nodes with |xi| < threshold * max|xi| are masked out.
PotentialResult recover_potential(const ComplexField& xi, double k, double threshold = 1e-6);

// gamma_g = H1 / (sigma |xi|); masked where sigma <= 0 or the input mask is 0.
struct GrueneisenResult {
  RealField gamma_g;
  std::vector<uint8_t> mask;
};
GrueneisenResult recover_grueneisen(const RealField& h1, const RealField& sigma, const ComplexField& xi,
                                    const std::vector<uint8_t>& mask);

struct DirectReconOptions {
  TransportOptions transport;
  double alpha_floor_rel = 1e-8;
  double beta_floor = 1e-8;
  double xi_mask_threshold = 1e-6;
};

struct DirectReconResult {
  VectorField beta;
  ConditionReport conditions;
  TransportResult transport;
  PotentialResult potential;
  GrueneisenResult grueneisen;
};

// Full chain: beta, transport for xi, potential split, Grueneisen.
DirectReconResult direct_pipeline(const PolarizedPair& data, const BoundaryTrace& g1, double k,
                                  const DirectReconOptions& opts = {});

// Measured stability ratio between two data/reconstruction pairs:
//   || (gamma sigma) - (gamma~ sigma~) ||_L2  over
//   || H1 - H1~ ||_L2 + || E1 - E1~ ||_L2 + || E2 - E2~ ||_L2
struct StabilityReport {
  double num = 0.0, den = 0.0, ratio = 0.0;
};
StabilityReport stability_surrogate(const PolarizedPair& a, const DirectReconResult& ra, const PolarizedPair& b,
                                    const DirectReconResult& rb);

}  // namespace shg
