#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/estimation.hpp"
#include "gridsec/imhof.hpp"

namespace gridsec {

/// Likelihood-ratio outcome. `ratio` may over/underflow for extreme
/// instances; `log_ratio` is always finite and decisions are made on it.
struct LrtResult {
  double ratio = 0.0;
  double log_ratio = 0.0;
  bool attack_detected = false;
};

/// Diagonal of the weight matrix in the weighted chi-square form of the
/// stealth-attack detection probability: weights_i = mu_i / (mu_i + sigma2)
/// with mu_i the nonzero eigenvalues of H Sigma_XX H^T descending (the
/// eigenvalue of Sigma_YY^{-1} on the same eigenvector). All weights lie in
/// (0, 1), sorted descending.
struct WeightedChiSquare {
  std::vector<double> weights;
  int p() const { return static_cast<int>(weights.size()); }
};

enum class TailMethod { CfInversion, MonteCarlo };

struct DetectionOptions {
  double cf_tol = 1e-6;
  int mc_trials = 100000;
  std::uint64_t seed = 0;
};

/// LRT for a known deterministic attack vector:
///   L(y, a) = exp(a^T Syy^-1 a / 2 - a^T Syy^-1 y),
/// H0 accepted iff L > tau (ties go to H1).
LrtResult lrt_deterministic(const MeasurementModel& model, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& a, double tau);

/// Closed-form probability that the LRT misses attack a:
///   P_ND = erfc( (q/2 + log tau) / sqrt(2 q) ) / 2,  q = a^T Syy^-1 a.
/// The null attack is a domain error (the formula is singular at a = 0).
double prob_not_detected(const MeasurementModel& model, const Eigen::VectorXd& a,
                         double tau);

/// LRT between the no-attack and Gaussian-attack measurement distributions:
///   L(y) = f_{N(0, Syy + Saa)}(y) / f_{N(0, Syy)}(y),
/// H1 accepted iff L >= tau.
LrtResult lrt_stealth(const MeasurementModel& model, const Eigen::MatrixXd& sigma_aa,
                      const Eigen::VectorXd& y, double tau);

WeightedChiSquare stealth_weights(const MeasurementModel& model, double lambda);

/// Detection probability of the optimal stealth attack with weight lambda:
///   P_D = P[ (U^p)^T Delta U^p >= lambda (2 log tau + log|I + Delta/lambda|) ].
TailResult prob_detection_stealth(const MeasurementModel& model, double lambda,
                                  double tau, TailMethod method,
                                  const DetectionOptions& opts = {});

/// Threshold of the weighted chi-square tail above (exposed for tests).
double stealth_tail_threshold(const WeightedChiSquare& wcs, double lambda, double tau);

}  // namespace gridsec
