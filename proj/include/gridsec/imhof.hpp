#pragma once

#include <cstdint>
#include <vector>

namespace gridsec {

struct TailResult {
  double value = 0.0;
  double std_error = 0.0;    // Monte Carlo only
  double achieved_tol = 0.0; // characteristic-function route only
  bool converged = true;
};

/// P[ sum_i w_i U_i^2 >= x ] for U_i iid N(0,1), all w_i > 0, by numerical
/// inversion of the characteristic function (Imhof's real integral):
///   P = 1/2 + (1/pi) * Int_0^inf sin(theta(u)) / (u rho(u)) du,
///   theta(u) = (1/2) sum_i atan(w_i u) - x u / 2,
///   rho(u)   = prod_i (1 + w_i^2 u^2)^{1/4}.
/// The integrand is split at the sign changes of sin(theta); each hump is
/// integrated adaptively and the alternating tail is summed with Wynn's
/// epsilon acceleration. `abs_tol` is the target absolute error on P.
TailResult weighted_chisq_tail_cf(const std::vector<double>& weights, double x,
                                  double abs_tol = 1e-6);

/// Same tail probability by direct sampling; std_error is the binomial SE.
TailResult weighted_chisq_tail_mc(const std::vector<double>& weights, double x,
                                  int trials, std::uint64_t seed);

}  // namespace gridsec
