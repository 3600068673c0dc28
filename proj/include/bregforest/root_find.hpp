#pragma once

#include <algorithm>
#include <cmath>

namespace bregforest {

struct RootBracket {
  // f(lower) and f(upper) have opposite signs (or one of them is zero).
  double lower = 0.0;
  double upper = 0.0;
  double f_lower = 0.0;
  double f_upper = 0.0;
  int iterations = 0;
  bool converged = false;

  double best() const { return std::abs(f_lower) <= std::abs(f_upper) ? lower : upper; }
};

/// Safeguarded secant (regula falsi with the Illinois modification) on a
/// sign-changing bracket. A secant step that lands outside the middle 98% of
/// the bracket is replaced by bisection. Stops after `max_iterations` or once
/// the bracket width or |f| drops below `tolerance` (relative to the initial
/// bracket width and to the larger initial |f|).
template <typename Function>
RootBracket secant_bisection(Function&& f, double lower, double upper, double f_lower, double f_upper,
                             int max_iterations, double tolerance) {
  RootBracket b{lower, upper, f_lower, f_upper, 0, false};
  if (f_lower == 0.0 || f_upper == 0.0) {
    b.converged = true;
    return b;
  }
  if ((f_lower > 0.0) == (f_upper > 0.0)) return b;
  const double width0 = std::abs(upper - lower);
  const double f_scale = std::max(std::abs(f_lower), std::abs(f_upper));
  int stale_side = 0;  // +1: lower kept twice in a row, -1: upper
  while (b.iterations < max_iterations) {
    ++b.iterations;
    double fl = b.f_lower;
    double fu = b.f_upper;
    if (stale_side > 1) fl *= 0.5;
    if (stale_side < -1) fu *= 0.5;
    double x = b.upper - fu * (b.upper - b.lower) / (fu - fl);
    const double span = b.upper - b.lower;
    const double margin = 0.01 * span;
    if (!std::isfinite(x) || (span > 0 ? (x <= b.lower + margin || x >= b.upper - margin)
                                       : (x >= b.lower + margin || x <= b.upper - margin))) {
      x = 0.5 * (b.lower + b.upper);
    }
    const double fx = f(x);
    if (fx == 0.0) {
      b.lower = b.upper = x;
      b.f_lower = b.f_upper = 0.0;
      b.converged = true;
      return b;
    }
    if ((fx > 0.0) == (b.f_lower > 0.0)) {
      b.lower = x;
      b.f_lower = fx;
      stale_side = stale_side < 0 ? stale_side - 1 : -1;
    } else {
      b.upper = x;
      b.f_upper = fx;
      stale_side = stale_side > 0 ? stale_side + 1 : 1;
    }
    if (std::abs(b.upper - b.lower) <= tolerance * width0 || std::abs(fx) <= tolerance * f_scale) {
      b.converged = true;
      return b;
    }
  }
  return b;
}

}  // namespace bregforest
