#pragma once

#include <cmath>
#include <stdexcept>

namespace gridsec {

/// Scaled complementary error function, exp(x^2) * erfc(x).
/// Stable for large positive x where erfc underflows.
double erfcx(double x);

/// Inverse of erfc on (0, 2). erfc(erfc_inv(y)) == y to ~1e-14.
double erfc_inv(double y);

/// Euler digamma function for x > 0. Upward recurrence into the
/// asymptotic regime, then the standard Bernoulli series.
/// Absolute accuracy better than 1e-12 for x >= 1.
double digamma(double x);

}  // namespace gridsec
