#include "shg/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>

#include "shg/errors.hpp"

namespace shg {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

bool project(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
  bool moved = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xi = x[i];
    if (!lo.empty() && xi < lo[i]) xi = lo[i];
    if (!hi.empty() && xi > hi[i]) xi = hi[i];
    if (xi != x[i]) {
      x[i] = xi;
      moved = true;
    }
  }
  return moved;
}

struct CurvPair {
  std::vector<double> s;
  std::vector<double> y;
  double rho = 0.0;
};

}  // namespace

double fd_direction_check(const ObjFn& fn, const std::vector<double>& x, int probes, double step, uint64_t seed) {
  std::vector<double> g(x.size(), 0.0);
  fn(x, &g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    std::vector<double> d(x.size());
    for (auto& di : d) di = dist(rng);
    const double nd = norm2(d);
    if (nd == 0.0) continue;
    for (auto& di : d) di /= nd;
    std::vector<double> xp = x;
    std::vector<double> xm = x;
    axpy(step, d, xp);
    axpy(-step, d, xm);
    const double fd = (fn(xp, nullptr) - fn(xm, nullptr)) / (2.0 * step);
    const double an = dot(g, d);
    const double scale = std::max({std::abs(fd), std::abs(an), 1e-12});
    worst = std::max(worst, std::abs(fd - an) / scale);
  }
  return worst;
}

LbfgsResult lbfgs_minimize(const ObjFn& fn, std::vector<double> x0, const std::vector<double>& lo,
                           const std::vector<double>& hi, const LbfgsOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw ConfigError("lbfgs: empty start vector");
  if (!lo.empty() && lo.size() != n) throw ConfigError("lbfgs: lower bound size mismatch");
  if (!hi.empty() && hi.size() != n) throw ConfigError("lbfgs: upper bound size mismatch");
  for (std::size_t i = 0; i < n && !lo.empty() && !hi.empty(); ++i)
    if (lo[i] > hi[i]) throw ConfigError("lbfgs: lower bound exceeds upper bound");

  project(x0, lo, hi);
  if (opts.fd_guard) {
    const double err = fd_direction_check(fn, x0, opts.fd_probes, opts.fd_step, opts.fd_seed);
    if (!(err <= opts.fd_tol))
      throw SolverError("lbfgs: gradient inconsistent with finite differences at start (relative error " +
                        std::to_string(err) + ")");
  }

  LbfgsResult res;
  res.x = std::move(x0);
  res.grad.assign(n, 0.0);
  res.f = fn(res.x, &res.grad);
  if (!std::isfinite(res.f)) throw SolverError("lbfgs: objective not finite at start");
  const double g0norm = norm2(res.grad);
  const double gstop = opts.gtol * std::max(g0norm, 1e-300);
  res.trace.rows.push_back({0, res.f, g0norm, 0.0, 0, false});

  std::deque<CurvPair> mem;
  std::vector<double> xtrial(n), gtrial(n), d(n);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    if (norm2(res.grad) <= gstop) {
      res.trace.converged = true;
      res.trace.stop_reason = "gradient tolerance reached";
      return res;
    }

    // Two-loop recursion for d = -H g.
    d = res.grad;
    std::vector<double> alpha(mem.size(), 0.0);
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
      alpha[i] = mem[i].rho * dot(mem[i].s, d);
      axpy(-alpha[i], mem[i].y, d);
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      const double yy = dot(last.y, last.y);
      if (yy > 0.0) {
        const double gamma = dot(last.s, last.y) / yy;
        for (auto& di : d) di *= gamma;
      }
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * dot(mem[i].y, d);
      axpy(alpha[i] - beta, mem[i].s, d);
    }
    for (auto& di : d) di = -di;

    double dg0 = dot(res.grad, d);
    if (!(dg0 < 0.0)) {
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -res.grad[i];
      dg0 = dot(res.grad, d);
      if (!(dg0 < 0.0)) {
        res.trace.converged = true;
        res.trace.stop_reason = "gradient vanished";
        return res;
      }
    }

    const double f0 = res.f;
    int evals = 0;
    double ftr = 0.0;  // value at xtrial after each phi() call
    auto phi = [&](double a, double* dphi) {
      xtrial = res.x;
      axpy(a, d, xtrial);
      ++evals;
      ftr = fn(xtrial, &gtrial);
      if (dphi) *dphi = dot(gtrial, d);
      return ftr;
    };

    // Strong Wolfe line search: bracketing then zoom.
    double a_acc = -1.0;
    double lo_a = 0.0, lo_f = f0, lo_d = dg0;
    double hi_a = 0.0, hi_f = 0.0, hi_d = 0.0;
    bool bracket = false;
    {
      double a_prev = 0.0, f_prev = f0, d_prev = dg0;
      double a = 1.0;
      while (evals < opts.max_ls) {
        double da = 0.0;
        const double fa = phi(a, &da);
        if (!std::isfinite(fa) || fa > f0 + opts.c1 * a * dg0 || (evals > 1 && fa >= f_prev)) {
          lo_a = a_prev; lo_f = f_prev; lo_d = d_prev;
          hi_a = a; hi_f = fa; hi_d = da;
          bracket = true;
          break;
        }
        if (std::abs(da) <= -opts.c2 * dg0) {
          a_acc = a;
          break;
        }
        if (da >= 0.0) {
          lo_a = a; lo_f = fa; lo_d = da;
          hi_a = a_prev; hi_f = f_prev; hi_d = d_prev;
          bracket = true;
          break;
        }
        a_prev = a; f_prev = fa; d_prev = da;
        a *= 2.0;
      }
    }
    if (bracket && a_acc < 0.0) {
      while (evals < opts.max_ls) {
        const double dd = hi_a - lo_a;
        if (std::abs(dd) <= 1e-14 * std::max(1.0, std::abs(lo_a))) break;
        double t = 0.5;
        const double denom = hi_f - lo_f - lo_d * dd;
        if (std::isfinite(denom) && std::abs(denom) > 1e-300) t = std::clamp(-lo_d * dd / (2.0 * denom), 0.1, 0.9);
        if (!std::isfinite(t)) t = 0.5;
        const double aj = lo_a + t * dd;
        double dj = 0.0;
        const double fj = phi(aj, &dj);
        if (!std::isfinite(fj) || fj > f0 + opts.c1 * aj * dg0 || fj >= lo_f) {
          hi_a = aj; hi_f = fj; hi_d = dj;
        } else {
          if (std::abs(dj) <= -opts.c2 * dg0) {
            a_acc = aj;
            break;
          }
          if (dj * (hi_a - lo_a) >= 0.0) {
            hi_a = lo_a; hi_f = lo_f; hi_d = lo_d;
          }
          lo_a = aj; lo_f = fj; lo_d = dj;
        }
      }
      if (a_acc < 0.0 && lo_a > 0.0 && lo_f < f0) a_acc = lo_a;  // Armijo fallback
    }

    if (a_acc < 0.0) {
      res.trace.ls_failed = true;
      res.trace.stop_reason = "line search failed";
      return res;
    }
    // The Armijo fallback can leave the trial state at a different probe.
    bool current = true;
    for (std::size_t i = 0; i < n; ++i)
      if (xtrial[i] != res.x[i] + a_acc * d[i]) { current = false; break; }
    if (!current) phi(a_acc, nullptr);

    // Box projection; backtrack along the segment if the projected point is worse.
    bool projected = false;
    double a_used = a_acc;
    if (!lo.empty() || !hi.empty()) {
      std::vector<double> xp = xtrial;
      if (project(xp, lo, hi)) {
        projected = true;
        double fp = fn(xp, &gtrial);
        ++evals;
        double a_try = a_acc;
        while (!(fp < f0) && evals < 2 * opts.max_ls && a_try > 1e-20) {
          a_try *= 0.5;
          xp = res.x;
          axpy(a_try, d, xp);
          project(xp, lo, hi);
          fp = fn(xp, &gtrial);
          ++evals;
        }
        if (!(fp < f0)) {
          res.trace.ls_failed = true;
          res.trace.stop_reason = "projected step did not decrease the objective";
          return res;
        }
        xtrial = xp;
        ftr = fp;
        a_used = a_try;
      }
    }

    // Curvature pair from the accepted move.
    CurvPair pr;
    pr.s.resize(n);
    pr.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pr.s[i] = xtrial[i] - res.x[i];
      pr.y[i] = gtrial[i] - res.grad[i];
    }
    const double sy = dot(pr.s, pr.y);

    res.x = xtrial;
    res.grad = gtrial;
    const double fnew = ftr;
    const double gnorm = norm2(res.grad);
    res.trace.rows.push_back({iter, fnew, gnorm, a_used, evals, projected});

    if (projected) {
      mem.clear();  // metric is stale across an active-set change
    } else if (sy > 1e-10 * norm2(pr.s) * norm2(pr.y)) {
      pr.rho = 1.0 / sy;
      mem.push_back(std::move(pr));
      if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
    }

    const double df = f0 - fnew;
    res.f = fnew;
    if (df <= opts.ftol * std::max(1.0, std::abs(fnew))) {
      res.trace.converged = true;
      res.trace.stop_reason = "objective stagnated";
      return res;
    }
  }
  res.trace.stop_reason = "iteration limit reached";
  return res;
}

void write_opt_trace_csv(const std::string& path, const OptTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  out << "iter,f,gnorm,step,ls_evals,projected\n";
  out.precision(17);
  for (const auto& r : trace.rows)
    out << r.iter << ',' << r.f << ',' << r.gnorm << ',' << r.step << ',' << r.ls_evals << ','
        << (r.projected ? 1 : 0) << '\n';
  if (!out) throw Error("write failed: " + path);
}

}  // namespace shg
