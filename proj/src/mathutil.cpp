#include "gridsec/mathutil.hpp"

#include <cmath>
#include <limits>

namespace gridsec {

double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-x) = 2*exp(x^2) - erfcx(x); only used for moderate |x|.
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 12.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  // Asymptotic continued-fraction tail: erfcx(x) ~ 1/(sqrt(pi)*x) *
  // (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + ...).
  const double inv2 = 1.0 / (2.0 * x * x);
  double series = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    series += term;
  }
  return series / (x * std::sqrt(M_PI));
}

double erfc_inv(double y) {
  if (!(y > 0.0 && y < 2.0)) {
    throw std::domain_error("erfc_inv: argument must lie in (0, 2)");
  }
  if (y == 1.0) return 0.0;
  // Bracketing + Newton. erfc is strictly decreasing, erfc(+-27) under/overflows y's range.
  double lo = -27.0, hi = 27.0;
  double x = 0.0;
  // Initial guess from the asymptotic erfc(x) ~ exp(-x^2)/(x sqrt(pi)) for small y,
  // otherwise start at 0.
  if (y < 0.5) {
    double t = -std::log(y * std::sqrt(M_PI));
    x = std::sqrt(std::max(t, 0.0));
  } else if (y > 1.5) {
    double t = -std::log((2.0 - y) * std::sqrt(M_PI));
    x = -std::sqrt(std::max(t, 0.0));
  }
  for (int it = 0; it < 100; ++it) {
    double f = std::erfc(x) - y;
    if (f > 0.0) {
      lo = x;  // erfc(x) too big -> x too small
    } else {
      hi = x;
    }
    double df = -2.0 / std::sqrt(M_PI) * std::exp(-x * x);
    double step = f / df;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-15 * (1.0 + std::abs(xn))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive");
  }
  double result = 0.0;
  // psi(x) = psi(x+1) - 1/x until the asymptotic series is accurate.
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli numbers B2..B14.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  static const double coeff[] = {
      1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
      1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0};
  double p = inv2;
  for (double c : coeff) {
    series -= c * p;
    p *= inv2;
  }
  return result + series;
}

}  // namespace gridsec
