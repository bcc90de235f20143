#include "gridsec/detattack.hpp"

#include <cmath>
#include <stdexcept>

#include "gridsec/detection.hpp"
#include "gridsec/mathutil.hpp"

namespace gridsec {

GMatrix build_g_matrix(const MeasurementModel& model) {
  GMatrix gm;
  const Eigen::MatrixXd t =
      model.sigma_yy_inv_sqrt * model.h * model.sigma_xx * model.sigma_xx *
      model.h.transpose() * model.sigma_yy_inv_sqrt;
  gm.g = 0.5 * (t + t.transpose());  // symmetrize roundoff
  SymEig eig = sym_eig_descending(gm.g);
  gm.eigvals = eig.values;
  gm.eigvecs = eig.vectors;
  gm.rank = sym_rank(gm.eigvals, 1e-10);
  return gm;
}

namespace {

bool eigenvalue_tied(const Eigen::VectorXd& vals, int idx) {
  const double scale = std::max(std::abs(vals(0)), 1e-300);
  const double v = vals(idx);
  if (idx > 0 && std::abs(vals(idx - 1) - v) <= 1e-10 * scale) return true;
  if (idx + 1 < vals.size() && std::abs(vals(idx + 1) - v) <= 1e-10 * scale) {
    return true;
  }
  return false;
}

DetAttackResult finish(const MeasurementModel& model, Eigen::VectorXd a, double tau,
                       const std::optional<double>& energy_budget) {
  DetAttackResult r;
  r.plus.a = std::move(a);
  r.minus.a = -r.plus.a;
  r.distortion = excess_distortion(model, r.plus.a);
  if (r.plus.a.isZero(0.0)) {
    // Only the tau = 1 degenerate case produces the null vector; P_ND there
    // is the a -> 0 limit erfc(0)/2.
    r.p_nd = 0.5;
  } else {
    r.p_nd = prob_not_detected(model, r.plus.a, tau);
  }
  if (energy_budget) {
    r.budget_violated = r.plus.energy() > *energy_budget;
  }
  return r;
}

}  // namespace

std::vector<AttackVector> min_detection_directions(const MeasurementModel& model,
                                                   double tau) {
  if (!(tau > 1.0)) {
    throw std::domain_error(
        "min_detection_directions: for tau <= 1 the null attack is optimal");
  }
  const double target = 2.0 * std::log(tau);
  std::vector<AttackVector> out;
  out.reserve(2 * model.m());
  for (Eigen::Index k = 0; k < model.m(); ++k) {
    const double lam = std::max(model.h_sig_ht_eig.values(k), 0.0) + model.sigma2;
    const Eigen::VectorXd a =
        std::sqrt(lam * target) * model.h_sig_ht_eig.vectors.col(k);
    out.push_back(AttackVector{a});
    out.push_back(AttackVector{-a});
  }
  return out;
}

DetAttackResult min_detect_attack_small_tau(const MeasurementModel& model, double d0,
                                            double tau,
                                            std::optional<double> energy_budget) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("min_detect_attack_small_tau: requires tau <= 1");
  }
  if (!(d0 > 0.0)) {
    throw std::invalid_argument("min_detect_attack_small_tau: d0 must be positive");
  }
  const GMatrix gm = build_g_matrix(model);
  if (gm.rank == 0) {
    throw std::domain_error("min_detect_attack_small_tau: G has rank zero (H = 0)");
  }
  const double lam1 = gm.eigvals(0);
  Eigen::VectorXd a =
      std::sqrt(d0 / lam1) * (model.sigma_yy_sqrt * gm.eigvecs.col(0));
  DetAttackResult r = finish(model, std::move(a), tau, energy_budget);
  r.k_star = 1;
  r.multiplicity_flag = eigenvalue_tied(gm.eigvals, 0);
  return r;
}

DetAttackResult min_detect_attack_large_tau(const MeasurementModel& model, double d0,
                                            double tau,
                                            std::optional<double> energy_budget) {
  if (!(tau > 1.0)) {
    throw std::invalid_argument("min_detect_attack_large_tau: requires tau > 1");
  }
  if (!(d0 > 0.0)) {
    throw std::invalid_argument("min_detect_attack_large_tau: d0 must be positive");
  }
  const GMatrix gm = build_g_matrix(model);
  if (gm.rank == 0) {
    throw std::domain_error("min_detect_attack_large_tau: G has rank zero (H = 0)");
  }
  const double two_log_tau = 2.0 * std::log(tau);
  const double lam_rank = gm.eigvals(gm.rank - 1);

  DetAttackResult r;
  if (d0 / (two_log_tau * lam_rank) >= 1.0) {
    // Branch 1: pick the feasible index minimizing d0 / lambda_gk. The ratio
    // is non-decreasing in k, so this is the smallest feasible k.
    int k_star = 0;
    for (int k = 0; k < gm.rank; ++k) {
      if (d0 / gm.eigvals(k) > two_log_tau) {
        k_star = k + 1;
        break;
      }
    }
    if (k_star == 0) {
      throw std::domain_error(
          "min_detect_attack_large_tau: branch-1 feasible set is empty "
          "(d0 / lambda_gk <= 2 log tau for every k <= rank G; d0 = " +
          std::to_string(d0) + ", 2 log tau = " + std::to_string(two_log_tau) + ")");
    }
    const double lam = gm.eigvals(k_star - 1);
    Eigen::VectorXd a =
        std::sqrt(d0 / lam) * (model.sigma_yy_sqrt * gm.eigvecs.col(k_star - 1));
    r = finish(model, std::move(a), tau, energy_budget);
    r.branch = 1;
    r.k_star = k_star;
    r.multiplicity_flag = eigenvalue_tied(gm.eigvals, k_star - 1);
  } else {
    Eigen::VectorXd a =
        std::sqrt(two_log_tau) * (model.sigma_yy_sqrt * gm.eigvecs.col(0));
    r = finish(model, std::move(a), tau, energy_budget);
    r.branch = 2;
    r.k_star = 1;
    r.multiplicity_flag = eigenvalue_tied(gm.eigvals, 0);
  }
  return r;
}

DetAttackResult max_distortion_attack(const MeasurementModel& model, double l0_prime,
                                      double tau,
                                      std::optional<double> energy_budget) {
  if (!(l0_prime > 0.0 && l0_prime <= 0.5)) {
    throw std::invalid_argument("max_distortion_attack: l0_prime must lie in (0, 1/2]");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("max_distortion_attack: tau must be positive");
  }
  const double l0 = erfc_inv(2.0 * l0_prime);
  const double log_tau = std::log(tau);
  if (l0 * l0 < log_tau) {
    throw std::domain_error("max_distortion_attack: no solution exists (L0^2 < log tau)");
  }
  const GMatrix gm = build_g_matrix(model);
  if (gm.rank == 0) {
    throw std::domain_error("max_distortion_attack: G has rank zero (H = 0)");
  }
  const double magnitude =
      std::sqrt(2.0) * l0 + std::sqrt(std::max(2.0 * l0 * l0 - 2.0 * log_tau, 0.0));
  Eigen::VectorXd a = magnitude * (model.sigma_yy_sqrt * gm.eigvecs.col(0));
  DetAttackResult r = finish(model, std::move(a), tau, energy_budget);
  r.k_star = 1;
  r.multiplicity_flag = eigenvalue_tied(gm.eigvals, 0);
  return r;
}

KktCertificate kkt_certificate(const MeasurementModel& model, const Eigen::VectorXd& a,
                               double d0) {
  const Eigen::VectorXd v1 = model.sigma_yy_inv * a;
  const Eigen::VectorXd ht_v1 = model.h.transpose() * v1;
  const Eigen::VectorXd v2 =
      model.sigma_yy_inv *
      (model.h * (model.sigma_xx * (model.sigma_xx * ht_v1)));
  KktCertificate cert;
  const double denom = v2.squaredNorm();
  cert.gamma = denom > 0.0 ? v1.dot(v2) / denom : 0.0;
  cert.stationarity_residual = 2.0 * (v1 - cert.gamma * v2).norm();
  cert.constraint_residual = std::abs(excess_distortion(model, a) - d0);
  return cert;
}

}  // namespace gridsec
