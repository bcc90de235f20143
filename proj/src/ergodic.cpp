#include "gridsec/ergodic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridsec/linalg.hpp"
#include "gridsec/mathutil.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

StealthAttack learned_attack(const MeasurementModel& model,
                             const SampleCovariance& s_xx) {
  if (s_xx.s_xx.rows() != model.n() || s_xx.s_xx.cols() != model.n()) {
    throw std::invalid_argument("learned_attack: S_XX dimension mismatch");
  }
  StealthAttack attack;
  attack.lambda_w = 1.0;
  attack.sigma_aa = model.h * s_xx.s_xx * model.h.transpose();
  return attack;
}

namespace {

// log|H S H^T + sigma2 I_m| reduced to an n x n determinant:
// sigma^{2(m-n)} |sigma2 I_n + S H^T H|.
double logdet_learned_shifted(const MeasurementModel& model, const Eigen::MatrixXd& s,
                              const Eigen::MatrixXd& hth) {
  const Eigen::Index n = model.n();
  const Eigen::MatrixXd inner =
      model.sigma2 * Eigen::MatrixXd::Identity(n, n) + s * hth;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(inner);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  }
  return logdet +
         (static_cast<double>(model.m()) - static_cast<double>(n)) *
             std::log(model.sigma2);
}

}  // namespace

ErgodicMcResult ergodic_cost_mc(const MeasurementModel& model, int k, int n_trials,
                                std::uint64_t seed) {
  if (k < 2) {
    throw std::invalid_argument("ergodic_cost_mc: k must be >= 2");
  }
  if (n_trials < 2) {
    throw std::invalid_argument("ergodic_cost_mc: need at least 2 trials");
  }
  const double logdet_yy = logdet_spd(model.sigma_yy);
  const Eigen::MatrixXd k1 =
      model.h.transpose() * model.sigma_yy_inv * model.h;  // trace kernel
  const Eigen::MatrixXd hth = model.h.transpose() * model.h;

  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < n_trials; ++t) {
    const Eigen::MatrixXd x =
        sample_state_matrix(model.sigma_xx, k, derive_seed(seed, t));
    const Eigen::MatrixXd s = x * x.transpose() / double(k - 1);
    const double cost = 0.5 * ((k1 * s).trace() -
                               logdet_learned_shifted(model, s, hth) + logdet_yy);
    sum += cost;
    sum_sq += cost * cost;
  }
  ErgodicMcResult r;
  r.trials = n_trials;
  r.mean = sum / n_trials;
  const double var = (sum_sq - sum * sum / n_trials) / (n_trials - 1);
  r.std_error = std::sqrt(std::max(var, 0.0) / n_trials);
  return r;
}

WishartEigBounds wishart_extreme_bounds(int l, int k) {
  if (l < 1 || k - 1 < 1) {
    throw std::invalid_argument("wishart_extreme_bounds: need l >= 1 and k - 1 >= 1");
  }
  const double ratio = std::sqrt(static_cast<double>(l) / (k - 1));
  WishartEigBounds b;
  b.lower_min = (1.0 - ratio) * (1.0 - ratio);
  b.upper_max = (1.0 + ratio) * (1.0 + ratio) + 1.0 / (k - 1);
  return b;
}

Eigen::VectorXd waterfill_logdet(const Eigen::VectorXd& b, int p, int k) {
  if (b.size() != p || p < 1) {
    throw std::invalid_argument("waterfill_logdet: b must have length p >= 1");
  }
  if ((b.array() <= 0.0).any()) {
    throw std::invalid_argument("waterfill_logdet: b entries must be positive");
  }
  const WishartEigBounds box = wishart_extreme_bounds(p, k);
  const double lo = box.lower_min, hi = box.upper_max;
  if (lo > 1.0 || hi < 1.0) {
    throw std::domain_error("waterfill_logdet: box cannot meet the sum constraint");
  }
  auto coords = [&](double nu) {
    Eigen::VectorXd x(p);
    for (int i = 0; i < p; ++i) {
      const double unclamped =
          (-1.0 + std::sqrt(1.0 + 4.0 * b(i) / nu)) / (2.0 * b(i));
      x(i) = std::clamp(unclamped, lo, hi);
    }
    return x;
  };
  // sum(x(nu)) is decreasing in nu; bracket nu around sum = p.
  double nu_lo = 1.0, nu_hi = 1.0;
  while (coords(nu_lo).sum() < p) nu_lo *= 0.5;
  while (coords(nu_hi).sum() > p) nu_hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (nu_lo + nu_hi);
    if (coords(mid).sum() > p) {
      nu_lo = mid;
    } else {
      nu_hi = mid;
    }
    if (nu_hi - nu_lo < 1e-15 * nu_hi) break;
  }
  Eigen::VectorXd x = coords(0.5 * (nu_lo + nu_hi));
  // Distribute the residual over unclamped coordinates to hit the sum
  // constraint exactly.
  const double residual = static_cast<double>(p) - x.sum();
  if (std::abs(residual) > 0.0) {
    int free_count = 0;
    for (int i = 0; i < p; ++i) {
      if (x(i) > lo + 1e-12 && x(i) < hi - 1e-12) ++free_count;
    }
    if (free_count > 0) {
      const double shift = residual / free_count;
      for (int i = 0; i < p; ++i) {
        if (x(i) > lo + 1e-12 && x(i) < hi - 1e-12) x(i) += shift;
      }
    }
  }
  return x;
}

double wishart_logdet_mean(int p, int k) {
  if (p < 1 || k - 1 < p) {
    throw std::invalid_argument("wishart_logdet_mean: need k - 1 >= p >= 1");
  }
  double sum = 0.0;
  for (int i = 0; i < p; ++i) sum += digamma(static_cast<double>(k - 1 - i));
  return sum - p * std::log(static_cast<double>(k - 1));
}

ErgodicBoundReport ergodic_upper_bound(const MeasurementModel& model, int k) {
  const int p = model.rank_h_sig_ht();
  if (k - 1 < p) {
    throw std::domain_error("ergodic_upper_bound: requires k - 1 >= rank(H Sxx H^T)");
  }
  ErgodicBoundReport report;
  report.p = p;
  report.k = k;
  Eigen::VectorXd b(p);
  for (int i = 0; i < p; ++i) {
    b(i) = model.h_sig_ht_eig.values(i) / model.sigma2;
  }
  report.waterfill = waterfill_logdet(b, p, k);
  report.digamma_sum = 0.0;
  for (int i = 0; i < p; ++i) {
    report.digamma_sum += digamma(static_cast<double>(k - 1 - i));
  }
  report.eigen_terms = 0.0;
  for (int i = 0; i < p; ++i) {
    report.eigen_terms += std::log(b(i) + 1.0 / report.waterfill(i));
  }
  const Eigen::MatrixXd sigma_aa_star =
      model.h * model.sigma_xx * model.h.transpose();
  const double trace = (model.sigma_yy_inv * sigma_aa_star).trace();
  const double logdet_yy = logdet_spd(model.sigma_yy);
  report.bound_value =
      0.5 * (trace + logdet_yy -
             2.0 * static_cast<double>(model.m()) * std::log(std::sqrt(model.sigma2)) -
             report.digamma_sum + p * std::log(static_cast<double>(k - 1)) -
             report.eigen_terms);
  report.mc_value = std::numeric_limits<double>::quiet_NaN();
  report.mc_std_error = std::numeric_limits<double>::quiet_NaN();
  return report;
}

ErgodicBoundReport ergodic_report(const MeasurementModel& model, int k, int n_trials,
                                  std::uint64_t seed) {
  ErgodicBoundReport report = ergodic_upper_bound(model, k);
  const ErgodicMcResult mc = ergodic_cost_mc(model, k, n_trials, seed);
  report.mc_value = mc.mean;
  report.mc_std_error = mc.std_error;
  return report;
}

}  // namespace gridsec
