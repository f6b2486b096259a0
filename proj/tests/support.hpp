#pragma once

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "roughlab/core.hpp"

namespace testing {

// Independent quadrature oracles; none of them share code with the library.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

inline double integrate_singular(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b);
}

// (2 - s) * int_0^inf (1 - cos y) y^(-1-s) dy * 2, split at 1 and with the
// tail done in closed form beyond a large radius.
inline double cos_symbol(double s) {
  auto near = [s](double y) {
    if (y <= 0.0) return 0.0;
    if (y < 1e-4) return 0.5 * std::pow(y, 1.0 - s) * (1.0 - y * y / 12.0);
    return (1.0 - std::cos(y)) * std::pow(y, -1.0 - s);
  };
  double acc = integrate_singular(near, 0.0, 1.0);
  // Sum over periods on [1, R], then the remainder (mean of 1 - cos is 1).
  const double R = 2.0 * M_PI * 4000.0;
  double lo = 1.0;
  while (lo < R) {
    const double hi = std::min(R, lo + 2.0 * M_PI);
    acc += integrate(near, lo, hi);
    lo = hi;
  }
  acc += std::pow(R, -s) / s;
  return 2.0 * (2.0 - s) * acc;
}

inline roughlab::SpaceTimeField frozen(const roughlab::Grid& g, std::function<double(double)> f,
                                       roughlab::BoundClass bound) {
  return roughlab::SpaceTimeField::sample(g, {0.0}, [f](double x, double) { return f(x); }, bound, false);
}

}  // namespace testing
