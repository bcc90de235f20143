#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/grid.hpp"

namespace gridsec {

/// Zero-mean Gaussian state prior with Toeplitz covariance
/// (sigma_xx)_{ij} = rho^{|i-j|}.
struct StatePrior {
  int n = 0;
  double rho = 0.0;
  Eigen::MatrixXd sigma_xx;
};

struct NoiseModel {
  double sigma2 = 0.0;  // > 0
};

/// Training-data covariance estimate, 1/(k-1) * sum x x^T (no mean
/// subtraction: the state process is known to be zero-mean, which keeps
/// (k-1) S_XX exactly Wishart W_n(k-1, Sigma_XX)).
struct SampleCovariance {
  Eigen::MatrixXd s_xx;
  int k = 0;

  /// True when k-1 < n, in which case s_xx is singular by construction.
  bool rank_deficient() const { return k - 1 < s_xx.rows(); }
};

StatePrior toeplitz_prior(int n, double rho);

/// Noise variance from the system SNR definition
/// snr_db = 10 log10( tr(H Sigma_XX H^T) / (m sigma^2) ).
NoiseModel sigma2_from_snr(const Jacobian& h, const StatePrior& prior, double snr_db);

/// Inverse of sigma2_from_snr; exact round trip.
double snr_from_sigma2(const Jacobian& h, const StatePrior& prior, double sigma2);

/// k iid draws from N(0, sigma_xx) via a symmetric eigendecomposition
/// factorization (works for PSD-but-singular covariances).
std::vector<Eigen::VectorXd> sample_states(const StatePrior& prior, int count,
                                           std::uint64_t seed);

/// Same draws, one column per sample.
Eigen::MatrixXd sample_state_matrix(const Eigen::MatrixXd& covariance, int count,
                                    std::uint64_t seed);

SampleCovariance sample_covariance(const std::vector<Eigen::VectorXd>& samples);
SampleCovariance sample_covariance(const Eigen::MatrixXd& samples_as_columns);

}  // namespace gridsec
