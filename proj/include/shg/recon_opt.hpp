#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "shg/field.hpp"
#include "shg/helmholtz.hpp"
#include "shg/lbfgs.hpp"
#include "shg/medium.hpp"

namespace shg {

// Absolute: misfit of Gamma sigma (|u|^2 + |v|^2) against H per illumination.
// Ratio: misfit of intensity ratios against data ratios, reference = first
// illumination; insensitive to Gamma and to any static data calibration.
enum class ObjForm { Absolute, Ratio };

struct UnknownSpec {
  bool active = false;
  double reg = 0.0;  // weight on the squared discrete gradient
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct ObjectiveSpec {
  ObjForm form = ObjForm::Absolute;
  double k = 1.0;
  double robin_m = 2.0;
  double res_tol = 1e-8;
  RealField gamma_g;              // known Grueneisen, absolute form only
  RealField eta0, sigma0, chi20;  // initial values; held fixed where inactive
  std::vector<BoundaryTrace> g;   // fundamental Dirichlet data per illumination
  std::vector<RealField> data;    // measured H per illumination
  UnknownSpec eta, sigma, chi2;
};

// Least-squares objective for the one-way model (linear u, v driven by
// -4 k^2 chi2 u^2 under an impedance boundary).  Gradients are discrete
// adjoints against the same LU factorizations as the forward solves, so they
// match the discrete objective to solver accuracy.  When eta and sigma are
// both inactive the operators and fundamentals are factorized/solved once.
class OneWayObjective {
 public:
  explicit OneWayObjective(ObjectiveSpec spec);

  int dim() const { return static_cast<int>(nf_) * nactive_; }
  std::vector<double> pack_initial() const;
  std::vector<double> lower_bounds() const;  // empty when no finite bound
  std::vector<double> upper_bounds() const;
  MediumSet unpack(const std::vector<double>& x) const;

  double eval_grad(const std::vector<double>& x, std::vector<double>* grad);
  ObjFn as_objfn();  // binds this; the objective must outlive the closure

  const ObjectiveSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  long solves() const { return solves_; }

 private:
  struct Block {
    const UnknownSpec* spec = nullptr;
    const RealField* init = nullptr;
    std::size_t offset = 0;
  };
  std::vector<Block> blocks_;  // active unknowns in eta, sigma, chi2 order

  ObjectiveSpec spec_;
  GridSpec grid_;
  std::size_t nf_ = 0;
  int nactive_ = 0;
  bool cache_ops_ = false;
  std::unique_ptr<HelmholtzOperator> a1_, a2_;
  std::vector<ComplexField> u_cached_;
  Eigen::SparseMatrix<double> reg_k_;  // grad^T grad, shared by all unknowns
  bool any_reg_ = false;
  long solves_ = 0;
};

struct OptReconResult {
  MediumSet medium;
  double objective = 0.0;
  std::vector<double> grad;
  OptTrace trace;
  long solves = 0;
};

OptReconResult reconstruct_one_way(const ObjectiveSpec& spec, const LbfgsOptions& lopts);

struct GammaAverageResult {
  RealField gamma_g;
  std::vector<std::uint8_t> mask;  // 1 where every illumination gave a usable denominator
};

// Pointwise mean over illuminations of H_j / (sigma (|u_j|^2 + |v_j|^2)) with
// u_j, v_j re-simulated from the given medium under the one-way model.
GammaAverageResult recover_gamma_g_avg(const MediumSet& m, double k, const std::vector<BoundaryTrace>& g,
                                       const std::vector<RealField>& data, double robin_m = 2.0,
                                       double res_tol = 1e-8);

}  // namespace shg
