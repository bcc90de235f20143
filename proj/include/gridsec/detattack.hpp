#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/estimation.hpp"
#include "gridsec/linalg.hpp"

namespace gridsec {

/// Deterministic injection vector with its energy a^T a. When an energy
/// budget is attached the constructions post-check a^T a <= E and flag the
/// violation instead of projecting.
struct AttackVector {
  Eigen::VectorXd a;
  double energy() const { return a.squaredNorm(); }
};

/// G = Syy^{-1/2} H Sxx^2 H^T Syy^{-1/2}, the matrix whose top eigenpair
/// drives every centralized closed-form construction.
struct GMatrix {
  Eigen::MatrixXd g;
  Eigen::VectorXd eigvals;  // descending
  Eigen::MatrixXd eigvecs;
  int rank = 0;  // numerical, rel. tol 1e-10
};

GMatrix build_g_matrix(const MeasurementModel& model);

/// Closed-form attack pair +-a with its verified metrics.
struct DetAttackResult {
  AttackVector plus;
  AttackVector minus;
  double p_nd = 0.0;
  double distortion = 0.0;
  int branch = 0;       // Theorem-2 selector (1 or 2), 0 elsewhere
  int k_star = 0;       // 1-based eigen index used, 0 when not applicable
  bool multiplicity_flag = false;  // selected eigenvalue is not simple
  bool budget_violated = false;
};

/// Minimum-detection directions for tau > 1: the 2m vectors
/// +- sqrt(2 log tau * lambda_yy_k) u_yy_k, every one attaining the global
/// maximum of P_ND. Throws std::domain_error for tau <= 1, where the null
/// attack is optimal.
std::vector<AttackVector> min_detection_directions(const MeasurementModel& model,
                                                   double tau);

/// tau <= 1 regime: maximize P_ND subject to excess distortion >= d0.
/// a = +- sqrt(d0 / lambda_g1) Syy^{1/2} u_g1. The construction itself does
/// not depend on tau; tau only enters the reported P_ND.
DetAttackResult min_detect_attack_small_tau(const MeasurementModel& model, double d0,
                                            double tau,
                                            std::optional<double> energy_budget = {});

/// tau > 1 regime, two-branch selection over the feasible eigen indices
/// k with d0 / lambda_gk > 2 log tau.
DetAttackResult min_detect_attack_large_tau(const MeasurementModel& model, double d0,
                                            double tau,
                                            std::optional<double> energy_budget = {});

/// Maximize excess distortion subject to P_ND >= l0_prime in [0, 1/2]:
/// a = +- (sqrt(2) L0 + sqrt(2 L0^2 - 2 log tau)) Syy^{1/2} u_g1 with
/// L0 = erfc^{-1}(2 l0_prime). Throws std::domain_error when
/// L0^2 < log tau (no solution exists).
DetAttackResult max_distortion_attack(const MeasurementModel& model, double l0_prime,
                                      double tau,
                                      std::optional<double> energy_budget = {});

/// First-order certificate for the minimum-detection problem at a:
/// residual of (Syy^-1 - gamma Syy^-1 H Sxx^2 H^T Syy^-1) a = 0 with the
/// least-squares multiplier, plus the distortion-constraint residual.
struct KktCertificate {
  double stationarity_residual = 0.0;  // ||2 (v1 - gamma v2)||
  double constraint_residual = 0.0;    // |distortion - d0|
  double gamma = 0.0;
};

KktCertificate kkt_certificate(const MeasurementModel& model, const Eigen::VectorXd& a,
                               double d0);

}  // namespace gridsec
