#pragma once

#include <functional>
#include <string>
#include <vector>

namespace shg {

// Objective callback: returns f(x); when grad != nullptr also fills it.
using ObjFn = std::function<double(const std::vector<double>&, std::vector<double>*)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 500;
  double gtol = 1e-8;   // stop when ||g|| <= gtol * ||g0||
  double ftol = 1e-12;  // stop on relative objective stagnation
  double c1 = 1e-4;     // strong Wolfe sufficient decrease
  double c2 = 0.9;      // strong Wolfe curvature
  int max_ls = 40;      // line-search evaluations before declaring failure
  bool fd_guard = true; // verify the gradient at x0 before iterating
  double fd_tol = 1e-3;
  double fd_step = 1e-5;
  int fd_probes = 2;
  uint64_t fd_seed = 7;
};

struct OptTraceRow {
  int iter = 0;
  double f = 0.0;
  double gnorm = 0.0;
  double step = 0.0;
  int ls_evals = 0;
  bool projected = false;
};

struct OptTrace {
  std::vector<OptTraceRow> rows;
  std::string stop_reason;
  bool converged = false;
  bool ls_failed = false;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> grad;
  OptTrace trace;
};

// Limited-memory BFGS with a strong Wolfe line search and projection onto the
// box [lo, hi] (empty bounds vectors disable the box).  The iterate sequence
// is monotone in f; on line-search failure the best iterate is returned with
// trace.ls_failed set.
LbfgsResult lbfgs_minimize(const ObjFn& fn, std::vector<double> x0, const std::vector<double>& lo,
                           const std::vector<double>& hi, const LbfgsOptions& opts = {});

void write_opt_trace_csv(const std::string& path, const OptTrace& trace);

// Central finite-difference directional-derivative check of grad at x along
// n random unit directions; returns the worst relative error.
double fd_direction_check(const ObjFn& fn, const std::vector<double>& x, int probes, double step, uint64_t seed);

}  // namespace shg
