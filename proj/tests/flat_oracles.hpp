// Reference computations for the interval maps: plain bisection on the chart
// formula and finite differences. Only the Real type is shared with the library.
#pragma once

#include <functional>

#include "surfdiff/real.hpp"

namespace oracle {

using surfdiff::Real;

inline Real chart(const Real& alpha, const Real& beta, const Real& y) {
  const Real w = beta - alpha;
  return exp(w / (beta - y)) - exp(w / (y - alpha));
}

// χ⁻¹(c) by bisection, to about 2^-bits absolute.
inline Real chart_inverse(const Real& alpha, const Real& beta, const Real& c, int bits) {
  Real lo = alpha, hi = beta;
  for (int i = 0; i < bits + 8; ++i) {
    const Real mid = (lo + hi) / 2;
    if (chart(alpha, beta, mid) < c)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

inline Real step(const Real& alpha, const Real& beta, double eps, const Real& y, int bits) {
  return chart_inverse(alpha, beta, chart(alpha, beta, y) + eps, bits);
}

// central difference of order 1 and its Richardson extrapolation
inline Real central(const std::function<Real(const Real&)>& f, const Real& y, const Real& h) {
  return (f(y + h) - f(y - h)) / (2 * h);
}
inline Real richardson(const std::function<Real(const Real&)>& f, const Real& y, const Real& h) {
  return (4 * central(f, y, h / 2) - central(f, y, h)) / 3;
}

}  // namespace oracle
