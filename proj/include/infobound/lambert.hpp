#pragma once

#include <cmath>

#include "infobound/errors.hpp"

namespace infobound {

// Principal branch W0 of the Lambert W function on [-1/e, inf).
// Series start near the branch point, log start for large arguments, then
// Halley iterations; a bisection fallback guards the rare stall.
inline double lambert_w0(double x) {
  const double inv_e = std::exp(-1.0);
  if (!(x >= -inv_e)) throw validation_error("lambert_w0: x < -1/e");
  if (x == 0.0) return 0.0;

  const double p2 = 2.0 * (std::exp(1.0) * x + 1.0);
  if (p2 <= 0.0) return -1.0;  // x == -1/e up to rounding

  double w;
  if (p2 < 2.0) {
    const double p = std::sqrt(p2);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 3.0) {
    w = x / (1.0 + x);
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx);
  }

  const auto residual = [&](double v) { return v * std::exp(v) - x; };
  bool converged = false;
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= 1e-16 * std::max(1.0, std::abs(x))) {
      converged = true;
      break;
    }
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    if (denom == 0.0 || !std::isfinite(denom)) break;
    const double step = f / denom;
    w -= step;
    if (w < -1.0) w = -1.0 + 1e-17;
    if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(w))) {
      converged = true;
      break;
    }
  }

  if (!converged && std::abs(residual(w)) > 1e-13 * std::max(1.0, std::abs(x))) {
    double lo = -1.0;
    double hi = (x > 0.0) ? std::max(1.0, std::log(x + 1.0) + 1.0) : 0.0;
    while (hi * std::exp(hi) < x) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (residual(mid) < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    w = 0.5 * (lo + hi);
  }
  return w;
}

}  // namespace infobound
