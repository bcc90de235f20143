#include "gridsec/stealth.hpp"

#include <cmath>
#include <stdexcept>

#include "gridsec/detection.hpp"
#include "gridsec/linalg.hpp"

namespace gridsec {

namespace {

// log|Saa + sigma2 I| without touching the (rank-deficient) Saa spectrum
// directly; the sigma2 shift keeps the factorization positive definite.
double logdet_shifted(const MeasurementModel& model, const Eigen::MatrixXd& sigma_aa) {
  const Eigen::Index m = model.m();
  return logdet_spd(sigma_aa + model.sigma2 * Eigen::MatrixXd::Identity(m, m));
}

}  // namespace

StealthAttack optimal_attack(const MeasurementModel& model, double lambda) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("optimal_attack: lambda must be >= 1");
  }
  StealthAttack attack;
  attack.lambda_w = lambda;
  attack.sigma_aa =
      (model.h * model.sigma_xx * model.h.transpose()) / lambda;
  return attack;
}

double kl_divergence(const MeasurementModel& model, const Eigen::MatrixXd& sigma_aa) {
  if (sigma_aa.rows() != model.m() || sigma_aa.cols() != model.m()) {
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  }
  const Eigen::Index m = model.m();
  const Eigen::MatrixXd sigma_ya = model.sigma_yy + sigma_aa;
  const double logdet_yy = logdet_spd(model.sigma_yy);
  const double logdet_ya = logdet_spd(sigma_ya);
  const double trace = (model.sigma_yy_inv * sigma_ya).trace();
  return 0.5 * (logdet_yy - logdet_ya - static_cast<double>(m) + trace);
}

double mutual_information(const MeasurementModel& model,
                          const Eigen::MatrixXd& sigma_aa) {
  if (sigma_aa.rows() != model.m() || sigma_aa.cols() != model.m()) {
    throw std::invalid_argument("mutual_information: dimension mismatch");
  }
  // |joint| = |Sxx| |Sya - H Sxx H^T| = |Sxx| |sigma2 I + Saa|, so the MI
  // reduces to a difference of two well-conditioned log-determinants.
  const Eigen::MatrixXd sigma_ya = model.sigma_yy + sigma_aa;
  return 0.5 * (logdet_spd(sigma_ya) - logdet_shifted(model, sigma_aa));
}

double mutual_information_corollary(const MeasurementModel& model, double lambda) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("mutual_information_corollary: lambda must be >= 1");
  }
  const Eigen::Index m = model.m();
  const Eigen::MatrixXd h_sig_ht = model.h * model.sigma_xx * model.h.transpose();
  const Eigen::MatrixXd inner =
      model.sigma2 * Eigen::MatrixXd::Identity(m, m) + h_sig_ht / lambda;
  const Eigen::MatrixXd arg = h_sig_ht * inner.inverse() +
                              Eigen::MatrixXd::Identity(m, m);
  // arg is similar to a symmetric PD matrix; LU gives a safe log|det|.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(arg);
  double logdet = 0.0;
  double sign = lu.permutationP().determinant();
  const auto& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = u(i, i);
    sign *= (d < 0.0) ? -1.0 : 1.0;
    logdet += std::log(std::abs(d));
  }
  if (sign <= 0.0) {
    throw std::runtime_error("mutual_information_corollary: non-positive determinant");
  }
  return 0.5 * logdet;
}

double mutual_information_no_attack(const MeasurementModel& model) {
  return mutual_information(model,
                            Eigen::MatrixXd::Zero(model.m(), model.m()));
}

StealthCost weighted_cost(const MeasurementModel& model,
                          const Eigen::MatrixXd& sigma_aa, double lambda) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("weighted_cost: lambda must be >= 1");
  }
  StealthCost cost;
  cost.mi = mutual_information(model, sigma_aa);
  cost.kl = kl_divergence(model, sigma_aa);
  cost.weighted = cost.mi + lambda * cost.kl;
  const double logdet_yy = logdet_spd(model.sigma_yy);
  cost.objective_constant = lambda * logdet_yy;
  cost.objective_form = 2.0 * cost.weighted - cost.objective_constant;
  return cost;
}

namespace {

struct BoundTerms {
  double tr_delta2 = 0.0;
  double max_delta = 0.0;
};

BoundTerms bound_terms(const MeasurementModel& model) {
  // Delta's diagonal is the stealth weight profile (lambda-independent).
  const WeightedChiSquare wcs = stealth_weights(model, 1.0);
  BoundTerms t;
  for (double w : wcs.weights) {
    t.tr_delta2 += w * w;
    t.max_delta = std::max(t.max_delta, w);
  }
  return t;
}

}  // namespace

double detection_bound_lambda(const MeasurementModel& model, double tau, double t) {
  if (!(tau > 1.0)) {
    throw std::invalid_argument("detection_bound_lambda: requires tau > 1");
  }
  if (!(t > 0.0)) {
    throw std::invalid_argument("detection_bound_lambda: requires t > 0");
  }
  const BoundTerms bt = bound_terms(model);
  const double log_tau = std::log(tau);
  auto residual = [&](double lam) {
    return 2.0 * lam * log_tau - bt.tr_delta2 / (2.0 * lam) -
           2.0 * std::sqrt(bt.tr_delta2 * t) - 2.0 * bt.max_delta * t;
  };
  // The left side is monotone increasing on lambda > 0; bracket and bisect.
  double lo = 1e-6;
  while (residual(lo) > 0.0) lo *= 0.5;
  double hi = 1.0;
  while (residual(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

double detection_bound_exponent(const MeasurementModel& model, double tau,
                                double lambda) {
  if (!(tau > 1.0)) {
    throw std::invalid_argument("detection_bound_exponent: requires tau > 1");
  }
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("detection_bound_exponent: requires lambda >= 1");
  }
  const BoundTerms bt = bound_terms(model);
  const double c = 2.0 * lambda * std::log(tau) - bt.tr_delta2 / (2.0 * lambda);
  if (c <= 0.0) return 0.0;
  if (bt.max_delta == 0.0) {
    // No attack signal; any exponent is certified, cap at the c-term.
    const double u = bt.tr_delta2 > 0.0 ? c / (2.0 * std::sqrt(bt.tr_delta2)) : 700.0;
    return u * u;
  }
  // Solve 2 ||Delta||_inf u^2 + 2 sqrt(tr(Delta^2)) u = c for u = sqrt(t).
  const double s = std::sqrt(bt.tr_delta2);
  const double u =
      (-s + std::sqrt(s * s + 2.0 * bt.max_delta * c)) / (2.0 * bt.max_delta);
  return u * u;
}

}  // namespace gridsec
