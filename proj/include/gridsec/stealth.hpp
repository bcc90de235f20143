#pragma once

#include <Eigen/Dense>

#include "gridsec/estimation.hpp"

namespace gridsec {

/// Zero-mean Gaussian attack A ~ N(0, sigma_aa) with its weight lambda.
struct StealthAttack {
  double lambda_w = 1.0;
  Eigen::MatrixXd sigma_aa;
};

/// Decomposition of the stealth objective at a given attack covariance.
struct StealthCost {
  double mi = 0.0;        // I(X; Y_A), nats
  double kl = 0.0;        // D(P_{Y_A} || P_Y), nats
  double weighted = 0.0;  // mi + lambda * kl
  /// The optimizer-form objective
  ///   -(lambda-1) log|Syy + Saa| - log|Saa + sigma2 I| + lambda tr(Syy^-1 Saa),
  /// which equals 2 * weighted - lambda * log|Syy|.
  double objective_form = 0.0;
  double objective_constant = 0.0;  // lambda * log|Syy| (Saa-independent)
};

/// Optimal generalized stealth attack: Sigma_AA = (1/lambda) H Sigma_XX H^T.
/// lambda < 1 is rejected (outside the theorem's scope).
StealthAttack optimal_attack(const MeasurementModel& model, double lambda);

/// KL divergence between N(0, Syy + Saa) and N(0, Syy), nats.
double kl_divergence(const MeasurementModel& model, const Eigen::MatrixXd& sigma_aa);

/// Mutual information I(X; Y_A) through the joint-covariance route:
/// (1/2)(log|Syy + Saa| - log|sigma2 I + Saa|).
double mutual_information(const MeasurementModel& model,
                          const Eigen::MatrixXd& sigma_aa);

/// Closed-form MI of the optimal attack,
/// (1/2) log|H Sxx H^T (sigma2 I + H Sxx H^T / lambda)^{-1} + I|.
double mutual_information_corollary(const MeasurementModel& model, double lambda);

/// MI of the unattacked system, I(X; Y).
double mutual_information_no_attack(const MeasurementModel& model);

StealthCost weighted_cost(const MeasurementModel& model,
                          const Eigen::MatrixXd& sigma_aa, double lambda);

/// lambda*(t): unique positive root of
///   2 lambda log tau - tr(Delta^2)/(2 lambda) - 2 sqrt(tr(Delta^2) t)
///   - 2 ||Delta||_inf t = 0.
/// For lambda >= max(lambda*(t), 1) the detection probability satisfies
/// P_D(lambda) <= exp(-t). Requires tau > 1, t > 0.
double detection_bound_lambda(const MeasurementModel& model, double tau, double t);

/// Inverse view: the largest exponent t(lambda) certified for a given
/// lambda >= 1 by the same inequality, so P_D(lambda) <= exp(-t(lambda)).
/// Returns 0 (vacuous bound e^0 = 1) when no positive t is certified.
double detection_bound_exponent(const MeasurementModel& model, double tau,
                                double lambda);

}  // namespace gridsec
