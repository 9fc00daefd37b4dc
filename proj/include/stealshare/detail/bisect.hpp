#pragma once

#include <cmath>
#include <utility>

#include "stealshare/error.hpp"

namespace stealshare::detail {

struct BisectResult {
  double root = 0;
  int iterations = 0;
  double f_at_root = 0;  // function value at the returned midpoint
};

// Bisection for a function with a single sign change on [lo, hi].  Stops
// when the bracket is narrower than tol (so |root - midpoint| <= tol/2) or
// after max_iter halvings.  Endpoints with f == 0 are returned directly.
template <class F>
BisectResult bisect(F&& f, double lo, double hi, double tol,
                    int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi)) {
    fail(ErrorKind::numeric_failure, "bisection endpoint evaluated to NaN");
  }
  if (flo == 0.0) return {lo, 0, 0.0};
  if (fhi == 0.0) return {hi, 0, 0.0};
  if ((flo < 0) == (fhi < 0)) {
    fail(ErrorKind::bracket_failure,
         "no sign change over bisection bracket [" + std::to_string(lo) +
             ", " + std::to_string(hi) + "]");
  }
  int it = 0;
  while (hi - lo > tol && it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    ++it;
    if (fmid == 0.0) return {mid, it, 0.0};
    if ((fmid < 0) == (flo < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
  }
  const double root = 0.5 * (lo + hi);
  return {root, it, f(root)};
}

}  // namespace stealshare::detail
