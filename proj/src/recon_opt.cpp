#include "shg/recon_opt.hpp"

#include <algorithm>
#include <cmath>

#include "shg/errors.hpp"

namespace shg {
namespace {

Eigen::SparseMatrix<double> gradient_normal_matrix(const GridSpec& g) {
  const int nx = g.nx, ny = g.ny;
  const double cx = 1.0 / g.hx(), cy = 1.0 / g.hy();
  const long nedge = static_cast<long>(nx - 1) * ny + static_cast<long>(nx) * (ny - 1);
  Eigen::SparseMatrix<double> grad(nedge, g.count());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * static_cast<std::size_t>(nedge));
  long row = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i, ++row) {
      trip.emplace_back(row, g.index(i, j), -cx);
      trip.emplace_back(row, g.index(i + 1, j), cx);
    }
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i, ++row) {
      trip.emplace_back(row, g.index(i, j), -cy);
      trip.emplace_back(row, g.index(i, j + 1), cy);
    }
  grad.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> k = Eigen::SparseMatrix<double>(grad.transpose()) * grad;
  k.makeCompressed();
  return k;
}

}  // namespace

OneWayObjective::OneWayObjective(ObjectiveSpec spec) : spec_(std::move(spec)) {
  if (spec_.g.empty()) throw ConfigError("objective: no illuminations");
  if (spec_.g.size() != spec_.data.size()) throw ConfigError("objective: illumination/data count mismatch");
  grid_ = spec_.eta0.grid;
  nf_ = static_cast<std::size_t>(grid_.count());
  require_same_grid(grid_, spec_.sigma0.grid, "sigma0");
  require_same_grid(grid_, spec_.chi20.grid, "chi20");
  for (const auto& d : spec_.data) require_same_grid(grid_, d.grid, "data");
  for (const auto& t : spec_.g) require_same_grid(grid_, t.grid, "illumination");
  if (spec_.form == ObjForm::Absolute) {
    require_same_grid(grid_, spec_.gamma_g.grid, "gamma_g");
  } else {
    if (spec_.g.size() < 2) throw ConfigError("ratio objective needs at least two illuminations");
    double dmin = spec_.data[0].values[0];
    for (double h : spec_.data[0].values) dmin = std::min(dmin, h);
    if (!(dmin > 0.0)) throw DataConditionError("ratio objective: reference data must be positive everywhere");
  }

  const UnknownSpec* specs[3] = {&spec_.eta, &spec_.sigma, &spec_.chi2};
  const RealField* inits[3] = {&spec_.eta0, &spec_.sigma0, &spec_.chi20};
  for (int f = 0; f < 3; ++f) {
    if (!specs[f]->active) continue;
    if (specs[f]->lower > specs[f]->upper) throw ConfigError("objective: empty bound interval");
    blocks_.push_back({specs[f], inits[f], static_cast<std::size_t>(nactive_) * nf_});
    ++nactive_;
  }
  if (nactive_ == 0) throw ConfigError("objective: no active unknowns");
  for (const auto& b : blocks_) any_reg_ = any_reg_ || b.spec->reg > 0.0;
  if (any_reg_) reg_k_ = gradient_normal_matrix(grid_);

  cache_ops_ = !spec_.eta.active && !spec_.sigma.active;
  if (cache_ops_) {
    const double k = spec_.k;
    a1_ = std::make_unique<HelmholtzOperator>(potential_q1(spec_.eta0, spec_.sigma0, k), BCSpec::dirichlet(), k, true);
    a2_ = std::make_unique<HelmholtzOperator>(potential_q2(spec_.eta0, spec_.sigma0, k), BCSpec::robin(spec_.robin_m),
                                              k, true);
    SolveOptions sopt;
    sopt.res_tol = spec_.res_tol;
    sopt.allow_nonpositive_im_q = true;
    const ComplexField zero(grid_);
    u_cached_.reserve(spec_.g.size());
    for (const auto& t : spec_.g) {
      u_cached_.push_back(a1_->solve(zero, t, sopt));
      ++solves_;
    }
  }
}

std::vector<double> OneWayObjective::pack_initial() const {
  std::vector<double> x(static_cast<std::size_t>(dim()));
  for (const auto& b : blocks_) std::copy(b.init->values.begin(), b.init->values.end(), x.begin() + b.offset);
  return x;
}

std::vector<double> OneWayObjective::lower_bounds() const {
  bool any = false;
  for (const auto& b : blocks_) any = any || std::isfinite(b.spec->lower);
  if (!any) return {};
  std::vector<double> lo(static_cast<std::size_t>(dim()));
  for (const auto& b : blocks_) std::fill(lo.begin() + b.offset, lo.begin() + b.offset + nf_, b.spec->lower);
  return lo;
}

std::vector<double> OneWayObjective::upper_bounds() const {
  bool any = false;
  for (const auto& b : blocks_) any = any || std::isfinite(b.spec->upper);
  if (!any) return {};
  std::vector<double> hi(static_cast<std::size_t>(dim()));
  for (const auto& b : blocks_) std::fill(hi.begin() + b.offset, hi.begin() + b.offset + nf_, b.spec->upper);
  return hi;
}

MediumSet OneWayObjective::unpack(const std::vector<double>& x) const {
  if (x.size() != static_cast<std::size_t>(dim())) throw ConfigError("objective: bad vector length");
  MediumSet m;
  m.gamma_g = spec_.form == ObjForm::Absolute ? spec_.gamma_g : RealField(grid_, 1.0);
  m.eta = spec_.eta0;
  m.sigma = spec_.sigma0;
  m.chi2 = spec_.chi20;
  RealField* fields[3] = {&m.eta, &m.sigma, &m.chi2};
  const UnknownSpec* specs[3] = {&spec_.eta, &spec_.sigma, &spec_.chi2};
  std::size_t bi = 0;
  for (int f = 0; f < 3; ++f) {
    if (!specs[f]->active) continue;
    std::copy(x.begin() + blocks_[bi].offset, x.begin() + blocks_[bi].offset + nf_, fields[f]->values.begin());
    ++bi;
  }
  return m;
}

double OneWayObjective::eval_grad(const std::vector<double>& x, std::vector<double>* grad) {
  const MediumSet m = unpack(x);
  const double k = spec_.k;
  const std::size_t N = nf_;
  const std::size_t ns = spec_.g.size();
  const double wq = grid_.hx() * grid_.hy();

  HelmholtzOperator* A1 = a1_.get();
  HelmholtzOperator* A2 = a2_.get();
  std::unique_ptr<HelmholtzOperator> own1, own2;
  if (!cache_ops_) {
    own1 = std::make_unique<HelmholtzOperator>(potential_q1(m.eta, m.sigma, k), BCSpec::dirichlet(), k, true);
    own2 = std::make_unique<HelmholtzOperator>(potential_q2(m.eta, m.sigma, k), BCSpec::robin(spec_.robin_m), k, true);
    A1 = own1.get();
    A2 = own2.get();
  }
  SolveOptions sopt;
  sopt.res_tol = spec_.res_tol;
  sopt.allow_nonpositive_im_q = true;

  std::vector<ComplexField> u(ns), v(ns);
  std::vector<RealField> P(ns);
  const ComplexField zero(grid_);
  for (std::size_t j = 0; j < ns; ++j) {
    if (cache_ops_) {
      u[j] = u_cached_[j];
    } else {
      u[j] = A1->solve(zero, spec_.g[j], sopt);
      ++solves_;
    }
    ComplexField s(grid_);
    for (std::size_t n = 0; n < N; ++n) {
      const Complex un = u[j].values[n];
      s.values[n] = -4.0 * k * k * m.chi2.values[n] * un * un;
    }
    v[j] = A2->solve(s, sopt);
    ++solves_;
    P[j] = RealField(grid_);
    for (std::size_t n = 0; n < N; ++n) P[j].values[n] = std::norm(u[j].values[n]) + std::norm(v[j].values[n]);
  }

  const bool absolute = spec_.form == ObjForm::Absolute;
  double f = 0.0;
  std::vector<RealField> r(ns, RealField(grid_));
  if (absolute) {
    for (std::size_t j = 0; j < ns; ++j)
      for (std::size_t n = 0; n < N; ++n) {
        const double rn = spec_.gamma_g.values[n] * m.sigma.values[n] * P[j].values[n] - spec_.data[j].values[n];
        r[j].values[n] = rn;
        f += 0.5 * wq * rn * rn;
      }
  } else {
    double pmin = P[0].values[0];
    for (double p : P[0].values) pmin = std::min(pmin, p);
    if (!(pmin > 0.0)) throw DataConditionError("ratio objective: reference intensity vanished");
    for (std::size_t j = 1; j < ns; ++j)
      for (std::size_t n = 0; n < N; ++n) {
        const double rn =
            P[j].values[n] / P[0].values[n] - spec_.data[j].values[n] / spec_.data[0].values[n];
        r[j].values[n] = rn;
        f += 0.5 * wq * rn * rn;
      }
  }

  std::vector<double> gfield[3];
  if (grad) {
    for (auto& gf : gfield) gf.assign(N, 0.0);
    auto& geta = gfield[0];
    auto& gsig = gfield[1];
    auto& gchi = gfield[2];

    // Ratio form: direct coefficient on the reference pair, accumulated over j.
    std::vector<double> cref;
    if (!absolute) {
      cref.assign(N, 0.0);
      for (std::size_t j = 1; j < ns; ++j)
        for (std::size_t n = 0; n < N; ++n)
          cref[n] -= 2.0 * wq * r[j].values[n] * P[j].values[n] / (P[0].values[n] * P[0].values[n]);
    }

    for (std::size_t j = 0; j < ns; ++j) {
      ComplexField gv(grid_), gu(grid_);
      if (absolute) {
        for (std::size_t n = 0; n < N; ++n) {
          const double c = 2.0 * wq * r[j].values[n] * spec_.gamma_g.values[n] * m.sigma.values[n];
          gv.values[n] = c * v[j].values[n];
          gu.values[n] = c * u[j].values[n];
        }
      } else if (j == 0) {
        for (std::size_t n = 0; n < N; ++n) {
          gv.values[n] = cref[n] * v[0].values[n];
          gu.values[n] = cref[n] * u[0].values[n];
        }
      } else {
        for (std::size_t n = 0; n < N; ++n) {
          const double c = 2.0 * wq * r[j].values[n] / P[0].values[n];
          gv.values[n] = c * v[j].values[n];
          gu.values[n] = c * u[j].values[n];
        }
      }

      const ComplexField lam = A2->solve_adjoint(gv);
      ++solves_;
      for (int jj = 1; jj + 1 < grid_.ny; ++jj)
        for (int ii = 1; ii + 1 < grid_.nx; ++ii) {
          const std::size_t n = static_cast<std::size_t>(grid_.index(ii, jj));
          gu.values[n] += -8.0 * k * k * m.chi2.values[n] * std::conj(u[j].values[n]) * lam.values[n];
        }
      const ComplexField mu = A1->solve_adjoint(gu);
      ++solves_;

      for (int jj = 1; jj + 1 < grid_.ny; ++jj)
        for (int ii = 1; ii + 1 < grid_.nx; ++ii) {
          const std::size_t n = static_cast<std::size_t>(grid_.index(ii, jj));
          const Complex lu = std::conj(lam.values[n]);
          const Complex mu_c = std::conj(mu.values[n]);
          gchi[n] += -4.0 * k * k * std::real(lu * u[j].values[n] * u[j].values[n]);
          geta[n] += -k * k * std::real(mu_c * u[j].values[n]) - 4.0 * k * k * std::real(lu * v[j].values[n]);
          gsig[n] += std::real(mu_c * Complex(0.0, -k) * u[j].values[n]) +
                     std::real(lu * Complex(0.0, -2.0 * k) * v[j].values[n]);
        }
      if (absolute)
        for (std::size_t n = 0; n < N; ++n)
          gsig[n] += wq * r[j].values[n] * spec_.gamma_g.values[n] * P[j].values[n];
    }
  }

  // Regularization: 0.5 beta wq z^T K z per active field.
  if (any_reg_) {
    const RealField* fields[3] = {&m.eta, &m.sigma, &m.chi2};
    const UnknownSpec* specs[3] = {&spec_.eta, &spec_.sigma, &spec_.chi2};
    for (int fidx = 0; fidx < 3; ++fidx) {
      if (!specs[fidx]->active || specs[fidx]->reg <= 0.0) continue;
      Eigen::Map<const Eigen::VectorXd> z(fields[fidx]->values.data(), static_cast<long>(N));
      Eigen::VectorXd kz = reg_k_ * z;
      const double beta = specs[fidx]->reg;
      f += 0.5 * beta * wq * z.dot(kz);
      if (grad)
        for (std::size_t n = 0; n < N; ++n) gfield[fidx][n] += beta * wq * kz[static_cast<long>(n)];
    }
  }

  if (grad) {
    grad->assign(static_cast<std::size_t>(dim()), 0.0);
    const UnknownSpec* specs[3] = {&spec_.eta, &spec_.sigma, &spec_.chi2};
    std::size_t bi = 0;
    for (int fidx = 0; fidx < 3; ++fidx) {
      if (!specs[fidx]->active) continue;
      std::copy(gfield[fidx].begin(), gfield[fidx].end(), grad->begin() + blocks_[bi].offset);
      ++bi;
    }
  }
  return f;
}

ObjFn OneWayObjective::as_objfn() {
  return [this](const std::vector<double>& x, std::vector<double>* g) { return eval_grad(x, g); };
}

OptReconResult reconstruct_one_way(const ObjectiveSpec& spec, const LbfgsOptions& lopts) {
  OneWayObjective obj(spec);
  LbfgsResult lr = lbfgs_minimize(obj.as_objfn(), obj.pack_initial(), obj.lower_bounds(), obj.upper_bounds(), lopts);
  OptReconResult out;
  out.medium = obj.unpack(lr.x);
  out.objective = lr.f;
  out.grad = std::move(lr.grad);
  out.trace = std::move(lr.trace);
  out.solves = obj.solves();
  return out;
}

GammaAverageResult recover_gamma_g_avg(const MediumSet& m, double k, const std::vector<BoundaryTrace>& g,
                                       const std::vector<RealField>& data, double robin_m, double res_tol) {
  if (g.empty() || g.size() != data.size()) throw ConfigError("gamma average: illumination/data count mismatch");
  const GridSpec& gr = m.grid();
  const std::size_t N = static_cast<std::size_t>(gr.count());
  HelmholtzOperator a1(potential_q1(m.eta, m.sigma, k), BCSpec::dirichlet(), k, true);
  HelmholtzOperator a2(potential_q2(m.eta, m.sigma, k), BCSpec::robin(robin_m), k, true);
  SolveOptions sopt;
  sopt.res_tol = res_tol;
  sopt.allow_nonpositive_im_q = true;
  const ComplexField zero(gr);

  std::vector<RealField> den(g.size(), RealField(gr));
  double dmax = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    require_same_grid(gr, data[j].grid, "data");
    const ComplexField u = a1.solve(zero, g[j], sopt);
    ComplexField s(gr);
    for (std::size_t n = 0; n < N; ++n) s.values[n] = -4.0 * k * k * m.chi2.values[n] * u.values[n] * u.values[n];
    const ComplexField v = a2.solve(s, sopt);
    for (std::size_t n = 0; n < N; ++n) {
      den[j].values[n] = m.sigma.values[n] * (std::norm(u.values[n]) + std::norm(v.values[n]));
      dmax = std::max(dmax, std::abs(den[j].values[n]));
    }
  }
  if (dmax <= 0.0) throw DataConditionError("gamma average: all denominators vanish");

  GammaAverageResult out;
  out.gamma_g = RealField(gr);
  out.mask.assign(N, 1);
  const double floor = 1e-12 * dmax;
  std::size_t usable = 0;
  for (std::size_t n = 0; n < N; ++n) {
    double acc = 0.0;
    bool ok = true;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (den[j].values[n] <= floor) {
        ok = false;
        break;
      }
      acc += data[j].values[n] / den[j].values[n];
    }
    if (ok) {
      out.gamma_g.values[n] = acc / static_cast<double>(g.size());
      ++usable;
    } else {
      out.mask[n] = 0;
    }
  }
  if (usable == 0) throw DataConditionError("gamma average: no usable nodes");
  return out;
}

}  // namespace shg
