#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridsec/mathutil.hpp"

using namespace gridsec;

namespace {
constexpr double kEulerGamma = 0.57721566490153286;
}

TEST_CASE("digamma anchors") {
  CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-13));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - kEulerGamma).epsilon(1e-13));
  // psi(1/2) = -gamma - 2 ln 2
  CHECK(digamma(0.5) ==
        doctest::Approx(-kEulerGamma - 2.0 * std::log(2.0)).epsilon(1e-13));
  // Recurrence psi(x+1) = psi(x) + 1/x across the asymptotic switch.
  for (double x : {0.7, 3.2, 9.9, 42.0}) {
    CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
  }
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
}

TEST_CASE("digamma matches harmonic-number identity for integers") {
  // psi(n) = -gamma + sum_{j=1}^{n-1} 1/j
  double harmonic = 0.0;
  for (int n = 1; n <= 60; ++n) {
    CHECK(digamma(n) == doctest::Approx(-kEulerGamma + harmonic).epsilon(1e-12));
    harmonic += 1.0 / n;
  }
}

TEST_CASE("erfcx consistency with erfc") {
  CHECK(erfcx(0.0) == doctest::Approx(1.0));
  for (double x = 0.0; x <= 5.0; x += 0.25) {
    CHECK(erfcx(x) * std::exp(-x * x) == doctest::Approx(std::erfc(x)).epsilon(1e-13));
  }
  // Series branch agrees with the direct formula where both are valid.
  for (double x : {12.5, 15.0, 20.0}) {
    CHECK(erfcx(x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-12));
  }
  // Asymptotic sandwich 1/(sqrt(pi)(x + 1/x)) < erfcx(x) < 1/(sqrt(pi) x).
  for (double x : {15.0, 40.0, 300.0}) {
    CHECK(erfcx(x) < 1.0 / (std::sqrt(M_PI) * x));
    CHECK(erfcx(x) > 1.0 / (std::sqrt(M_PI) * (x + 1.0 / x)));
  }
  // Negative arguments via the reflection.
  CHECK(erfcx(-1.0) ==
        doctest::Approx(std::exp(1.0) * std::erfc(-1.0)).epsilon(1e-13));
}

TEST_CASE("erfc_inv round trips") {
  CHECK(erfc_inv(1.0) == doctest::Approx(0.0));
  CHECK(erfc_inv(0.5) == doctest::Approx(0.47693627620446987).epsilon(1e-12));
  for (double y : {1e-8, 1e-4, 0.01, 0.3, 0.9, 1.1, 1.7, 1.999}) {
    CHECK(std::erfc(erfc_inv(y)) == doctest::Approx(y).epsilon(1e-12));
  }
  CHECK_THROWS_AS(erfc_inv(0.0), std::domain_error);
  CHECK_THROWS_AS(erfc_inv(2.0), std::domain_error);
}
