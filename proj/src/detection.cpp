#include "gridsec/detection.hpp"

#include <cmath>
#include <stdexcept>

#include "gridsec/linalg.hpp"

namespace gridsec {

LrtResult lrt_deterministic(const MeasurementModel& model, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& a, double tau) {
  if (y.size() != model.m() || a.size() != model.m()) {
    throw std::invalid_argument("lrt_deterministic: length mismatch");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("lrt_deterministic: tau must be positive");
  }
  const Eigen::VectorXd w = model.sigma_yy_inv * a;
  LrtResult r;
  r.log_ratio = 0.5 * a.dot(w) - w.dot(y);
  r.ratio = std::exp(r.log_ratio);
  r.attack_detected = !(r.log_ratio > std::log(tau));  // H0 iff L > tau
  return r;
}

double prob_not_detected(const MeasurementModel& model, const Eigen::VectorXd& a,
                         double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("prob_not_detected: tau must be positive");
  }
  const double q = model.whitened_quadratic(a);
  if (a.isZero(0.0) || q <= 0.0) {
    throw std::domain_error(
        "prob_not_detected: undefined for the null attack (a = 0)");
  }
  return 0.5 * std::erfc((0.5 * q + std::log(tau)) / std::sqrt(2.0 * q));
}

LrtResult lrt_stealth(const MeasurementModel& model, const Eigen::MatrixXd& sigma_aa,
                      const Eigen::VectorXd& y, double tau) {
  if (sigma_aa.rows() != model.m() || sigma_aa.cols() != model.m() ||
      y.size() != model.m()) {
    throw std::invalid_argument("lrt_stealth: dimension mismatch");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("lrt_stealth: tau must be positive");
  }
  const Eigen::MatrixXd sigma_ya = model.sigma_yy + sigma_aa;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma_ya);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    throw std::invalid_argument("lrt_stealth: Sigma_AA is not PSD");
  }
  const double logdet_ya = ldlt.vectorD().array().log().sum();
  const double logdet_yy = logdet_spd(model.sigma_yy);
  LrtResult r;
  r.log_ratio = 0.5 * (y.dot(model.sigma_yy_inv * y) - y.dot(ldlt.solve(y))) -
                0.5 * (logdet_ya - logdet_yy);
  r.ratio = std::exp(r.log_ratio);
  r.attack_detected = r.log_ratio >= std::log(tau);  // H1 iff L >= tau
  return r;
}

WeightedChiSquare stealth_weights(const MeasurementModel& model, double lambda) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("stealth_weights: lambda must be >= 1");
  }
  WeightedChiSquare wcs;
  const int p = model.rank_h_sig_ht();
  wcs.weights.reserve(p);
  for (int i = 0; i < p; ++i) {
    const double mu = model.h_sig_ht_eig.values(i);
    wcs.weights.push_back(mu / (mu + model.sigma2));
  }
  return wcs;
}

double stealth_tail_threshold(const WeightedChiSquare& wcs, double lambda,
                              double tau) {
  double logdet = 0.0;
  for (double w : wcs.weights) logdet += std::log1p(w / lambda);
  return lambda * (2.0 * std::log(tau) + logdet);
}

TailResult prob_detection_stealth(const MeasurementModel& model, double lambda,
                                  double tau, TailMethod method,
                                  const DetectionOptions& opts) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("prob_detection_stealth: tau must be positive");
  }
  const WeightedChiSquare wcs = stealth_weights(model, lambda);
  const double threshold = stealth_tail_threshold(wcs, lambda, tau);
  switch (method) {
    case TailMethod::CfInversion:
      return weighted_chisq_tail_cf(wcs.weights, threshold, opts.cf_tol);
    case TailMethod::MonteCarlo:
      return weighted_chisq_tail_mc(wcs.weights, threshold, opts.mc_trials, opts.seed);
  }
  throw std::logic_error("prob_detection_stealth: unknown method");
}

}  // namespace gridsec
