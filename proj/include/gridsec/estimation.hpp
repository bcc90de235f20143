#pragma once

#include <Eigen/Dense>

#include "gridsec/grid.hpp"
#include "gridsec/linalg.hpp"
#include "gridsec/prior.hpp"

namespace gridsec {

/// Linearized measurement model Y = H X + Z with Gaussian prior and noise,
/// plus the caches every attack/detection computation needs:
///   sigma_yy = H Sigma_XX H^T + sigma2 I
///   mmse_m   = Sigma_XX H^T sigma_yy^{-1}     (the MMSE estimator matrix)
/// Immutable after build_model; safe to share across threads.
struct MeasurementModel {
  Eigen::MatrixXd h;         // m x n
  Eigen::MatrixXd sigma_xx;  // n x n
  double sigma2 = 0.0;
  Eigen::MatrixXd sigma_yy;      // m x m
  Eigen::MatrixXd sigma_yy_inv;  // explicit inverse, kept for quadratic forms
  Eigen::MatrixXd mmse_m;        // n x m

  // Spectral caches. h_sig_ht = H Sigma_XX H^T shares eigenvectors with
  // sigma_yy (its eigenvalues are shifted by sigma2).
  SymEig h_sig_ht_eig;
  Eigen::MatrixXd sigma_yy_sqrt;      // symmetric PSD square root
  Eigen::MatrixXd sigma_yy_inv_sqrt;  // its inverse

  double condition_number = 0.0;  // of sigma_yy
  bool ill_conditioned = false;   // condition_number > 1e12

  Eigen::Index m() const { return h.rows(); }
  Eigen::Index n() const { return h.cols(); }
  int rank_h_sig_ht() const;  // p = rank(H Sigma_XX H^T), rel. tol 1e-10

  /// Quadratic form a^T sigma_yy^{-1} a.
  double whitened_quadratic(const Eigen::VectorXd& a) const;
};

MeasurementModel build_model(const Jacobian& h, const StatePrior& prior,
                             const NoiseModel& noise);

/// Model straight from matrices (used by tests and bindings).
MeasurementModel build_model(const Eigen::MatrixXd& h, const Eigen::MatrixXd& sigma_xx,
                             double sigma2);

/// MMSE estimate M y.
Eigen::VectorXd estimate(const MeasurementModel& model, const Eigen::VectorXd& y);

/// Bayesian injection vector c = M a: the exact shift a deterministic attack
/// a induces on the MMSE estimate, estimate(y + a) = estimate(y) + c.
Eigen::VectorXd injection_vector(const MeasurementModel& model,
                                 const Eigen::VectorXd& a);

/// ||M a||^2 via the quadratic form a^T Syy^-1 H Sxx^2 H^T Syy^-1 a.
double excess_distortion(const MeasurementModel& model, const Eigen::VectorXd& a);

}  // namespace gridsec
