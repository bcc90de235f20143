#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gridsec/estimation.hpp"
#include "gridsec/prior.hpp"
#include "gridsec/stealth.hpp"

namespace gridsec {

/// Attack built from estimated statistics: Sigma_AA = H S_XX H^T
/// (lambda = 1 semantics).
StealthAttack learned_attack(const MeasurementModel& model,
                             const SampleCovariance& s_xx);

struct ErgodicMcResult {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

/// Monte Carlo estimate of the ergodic attack cost
///   E_{S_XX}[ (tr(Syy^-1 Saa~) - log|Saa~ + sigma2 I| + log|Syy|) / 2 ]
/// over independent sample covariances at training size k.
ErgodicMcResult ergodic_cost_mc(const MeasurementModel& model, int k, int n_trials,
                                std::uint64_t seed);

/// Non-asymptotic expectations of the extreme eigenvalues of
/// W_l ~ (1/(k-1)) Wishart_l(k-1, I):
///   (1 - sqrt(l/(k-1)))^2  <=  E[lambda_min]
///   E[lambda_max]  <=  (1 + sqrt(l/(k-1)))^2 + 1/(k-1).
struct WishartEigBounds {
  double lower_min = 0.0;
  double upper_max = 0.0;
};

WishartEigBounds wishart_extreme_bounds(int l, int k);

/// KKT solution of  min sum_i log(b_i + 1/x_i)  s.t. sum_i x_i = p and the
/// box from wishart_extreme_bounds(p, k), by bisection on the shared
/// multiplier. Throws when the box cannot meet the sum constraint.
Eigen::VectorXd waterfill_logdet(const Eigen::VectorXd& b, int p, int k);

/// E[log|Z^T Z / (k-1)|] for Z a (k-1) x p standard normal matrix:
/// sum_{i=0}^{p-1} psi(k-1-i) - p log(k-1).
double wishart_logdet_mean(int p, int k);

struct ErgodicBoundReport {
  int p = 0;
  int k = 0;
  double digamma_sum = 0.0;        // sum_i psi(k-1-i)
  double eigen_terms = 0.0;        // sum_i log(lambda_i/sigma2 + 1/x_i*)
  Eigen::VectorXd waterfill;       // x*
  double bound_value = 0.0;        // nats
  double mc_value = 0.0;           // filled by ergodic_report, else NaN
  double mc_std_error = 0.0;
};

/// Upper bound on the ergodic attack cost at training size k. Requires
/// k - 1 >= p = rank(H Sigma_XX H^T).
ErgodicBoundReport ergodic_upper_bound(const MeasurementModel& model, int k);

/// Bound plus its Monte Carlo counterpart in one report.
ErgodicBoundReport ergodic_report(const MeasurementModel& model, int k, int n_trials,
                                  std::uint64_t seed);

}  // namespace gridsec
