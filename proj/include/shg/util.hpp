#pragma once

#include <functional>
#include <vector>

namespace shg {

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Runs fn(i) for i in [0, n) on up to `threads` workers.  fn must write only
// to disjoint state per index.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace shg
