#pragma once

// Reference computations that share no code with the library.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace oracle {

/// (1 - x^2)^s for |x| < 1, zero outside.
inline double barrier(double x, double s) { return std::abs(x) < 1.0 ? std::pow(1.0 - x * x, s) : 0.0; }

/// Principal value of int (f(x) - f(y)) |x - y|^{-1-2s} dy over the real line
/// for the barrier f, written as int_0^inf (2f(x) - f(x+t) - f(x-t)) t^{-1-2s} dt.
/// On [0, c] the bracket is replaced by -f''(x) t^2 and integrated exactly;
/// the rest is split at the kinks t = 1 -+ x and handed to tanh-sinh, which
/// absorbs the endpoint singularities of each piece.
inline double barrier_fractional_laplacian(double x, double s)
{
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double fx = barrier(x, s);
  const double w = 1.0 - x * x;
  const double f2 = -2.0 * s * std::pow(w, s - 1.0) + 4.0 * s * (s - 1.0) * x * x * std::pow(w, s - 2.0);
  const double c = 1e-5;
  auto integrand = [&](double t) {
    return (2.0 * fx - barrier(x + t, s) - barrier(x - t, s)) * std::pow(t, -1.0 - 2.0 * s);
  };
  const double a = std::min(1.0 - x, 1.0 + x);
  const double b = std::max(1.0 - x, 1.0 + x);
  double total = -f2 * std::pow(c, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  total += integrator.integrate(integrand, c, a);
  if (b > a) total += integrator.integrate(integrand, a, b);
  // Beyond b both neighbours vanish.
  total += 2.0 * fx * std::pow(b, -2.0 * s) / (2.0 * s);
  return total;
}

}  // namespace oracle
