#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridsec/detection.hpp"
#include "gridsec/grid.hpp"
#include "gridsec/imhof.hpp"
#include "gridsec/linalg.hpp"
#include "gridsec/prior.hpp"
#include "gridsec/rng.hpp"
#include "gridsec/stealth.hpp"

using namespace gridsec;

namespace {

std::string cases_dir() { return GRIDSEC_CASES_DIR; }

MeasurementModel two_bus_model(double sigma2 = 1.0) {
  const Jacobian jac = build_jacobian(
      parse_case("case twobus\nbus 0\nbus 1\nbranch 0 1 1.0\nslack 0\n"));
  return build_model(jac, toeplitz_prior(1, 0.0), NoiseModel{sigma2});
}

MeasurementModel ieee14_model(double rho = 0.1, double snr_db = 10.0) {
  const Jacobian jac = build_jacobian(load_case_file(cases_dir() + "/ieee14.case"));
  const StatePrior prior = toeplitz_prior(13, rho);
  return build_model(jac, prior, sigma2_from_snr(jac, prior, snr_db));
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
  const Eigen::Index m = x.size();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd d = x - mean;
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * (m * std::log(2.0 * M_PI) + logdet + d.dot(ldlt.solve(d)));
}

}  // namespace

TEST_CASE("weighted chi-square tail: exact closed forms") {
  // p = 1: P[w U^2 >= x] = erfc(sqrt(x / (2w))).
  for (double x : {0.05, 0.5, 1.974, 5.0, 12.0}) {
    const TailResult r = weighted_chisq_tail_cf({0.8}, x, 1e-8);
    CHECK(r.converged);
    const double exact = std::erfc(std::sqrt(x / 1.6));
    CHECK(std::abs(r.value - exact) < 1e-7);
  }
  // p = 2 equal weights: w chi^2_2 is exponential, tail exp(-x / (2w)).
  for (double x : {0.2, 1.0, 4.0, 9.0}) {
    const TailResult r = weighted_chisq_tail_cf({0.7, 0.7}, x, 1e-7);
    CHECK(r.converged);
    CHECK(std::abs(r.value - std::exp(-x / 1.4)) < 1e-6);
  }
  // p = 4 equal weights: tail of chi^2_4 at z = x/w is exp(-z/2)(1 + z/2).
  for (double x : {0.5, 2.0, 6.0}) {
    const TailResult r = weighted_chisq_tail_cf({0.5, 0.5, 0.5, 0.5}, x, 1e-7);
    const double z = x / 0.5;
    CHECK(std::abs(r.value - std::exp(-0.5 * z) * (1.0 + 0.5 * z)) < 1e-6);
  }
}

TEST_CASE("weighted chi-square tail: edge cases") {
  CHECK(weighted_chisq_tail_cf({0.3, 0.2}, -1.0).value == 1.0);
  CHECK(weighted_chisq_tail_cf({0.3, 0.2}, 0.0).value == 1.0);
  CHECK(weighted_chisq_tail_cf({}, 1.0).value == 0.0);
  CHECK(weighted_chisq_tail_cf({}, -1.0).value == 1.0);
  CHECK_THROWS_AS(weighted_chisq_tail_cf({0.5, -0.1}, 1.0), std::invalid_argument);
  // Deep tail stays accurate in absolute terms.
  const TailResult deep = weighted_chisq_tail_cf({0.9, 0.4, 0.2}, 40.0, 1e-10);
  CHECK(deep.value < 1e-6);
  CHECK(deep.value > 0.0);
}

TEST_CASE("cf inversion against Monte Carlo on random weight profiles") {
  Rng rng(2024);
  for (int profile = 0; profile < 20; ++profile) {
    const int p = 1 + static_cast<int>(rng.uniform() * 12);
    std::vector<double> w(p);
    double sum = 0.0;
    for (double& wi : w) {
      wi = 0.05 + 0.95 * rng.uniform();
      sum += wi;
    }
    const double x = (0.4 + 1.6 * rng.uniform()) * sum;
    const TailResult cf = weighted_chisq_tail_cf(w, x, 1e-8);
    const TailResult mc = weighted_chisq_tail_mc(w, x, 200000, 55 + profile);
    CHECK(cf.converged);
    CHECK(std::abs(cf.value - mc.value) < 3.0 * mc.std_error + 1e-7);
  }
}

TEST_CASE("deterministic LRT basics") {
  const MeasurementModel model = two_bus_model();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd a(4);
  a << 1, 0.5, -0.3, 0.2;

  const LrtResult null_attack = lrt_deterministic(model, zero, zero, 0.5);
  CHECK(null_attack.ratio == doctest::Approx(1.0));
  CHECK_FALSE(null_attack.attack_detected);  // H0 accepted: 1 > 0.5
  CHECK(lrt_deterministic(model, zero, zero, 2.0).attack_detected);

  // y = a/2 makes the exponent cancel.
  const LrtResult centred = lrt_deterministic(model, a / 2, a, 1.3);
  CHECK(centred.ratio == doctest::Approx(1.0).epsilon(1e-12));

  // Tie L = tau goes to H1.
  CHECK(lrt_deterministic(model, a / 2, a, 1.0).attack_detected);
}

TEST_CASE("deterministic LRT equals the density ratio") {
  const MeasurementModel model = ieee14_model();
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd y = rng.normal_vector(model.m());
    const Eigen::VectorXd a = rng.normal_vector(model.m());
    const LrtResult r = lrt_deterministic(model, y, a, 2.0);
    const double oracle = mvn_logpdf(y, Eigen::VectorXd::Zero(model.m()),
                                     model.sigma_yy) -
                          mvn_logpdf(y, a, model.sigma_yy);
    CHECK(r.log_ratio == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("prob_not_detected closed form") {
  const MeasurementModel model = two_bus_model();
  // Scale a so that a^T Syy^-1 a = 2 log tau with tau = e: P_ND = erfc(1)/2.
  Eigen::VectorXd dir(4);
  dir << 1, 0, 0, 0;
  const double q0 = model.whitened_quadratic(dir);
  const Eigen::VectorXd a = dir * std::sqrt(2.0 / q0);
  CHECK(model.whitened_quadratic(a) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(prob_not_detected(model, a, std::exp(1.0)) ==
        doctest::Approx(0.5 * std::erfc(1.0)).epsilon(1e-12));

  // tau = 1, shrinking attack: P_ND -> 1/2.
  CHECK(prob_not_detected(model, dir * 1e-8, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-6));

  CHECK_THROWS_AS(prob_not_detected(model, Eigen::VectorXd::Zero(4), 2.0),
                  std::domain_error);
}

TEST_CASE("prob_not_detected against measurement-space Monte Carlo") {
  const MeasurementModel model = two_bus_model();
  Eigen::VectorXd a(4);
  a << 1, 0, 0, 0;
  const double tau = 2.0;
  const double closed = prob_not_detected(model, a, tau);

  // Simulate Y_a = H X + Z + a and count L(y, a) > tau.
  const int draws = 1000000;
  const double q = model.whitened_quadratic(a);
  const Eigen::VectorXd v = model.sigma_yy_inv * a;
  Rng rng(99);
  int hits = 0;
  const int chunk = 100000;
  for (int start = 0; start < draws; start += chunk) {
    const Eigen::MatrixXd x = rng.normal_matrix(1, chunk);
    const Eigen::MatrixXd z = rng.normal_matrix(4, chunk) * std::sqrt(model.sigma2);
    Eigen::MatrixXd y = model.h * x + z;
    y.colwise() += a;
    const Eigen::VectorXd log_l =
        Eigen::VectorXd::Constant(chunk, 0.5 * q) -
        (v.transpose() * y).transpose();
    for (int i = 0; i < chunk; ++i) {
      if (log_l(i) > std::log(tau)) ++hits;
    }
  }
  const double freq = static_cast<double>(hits) / draws;
  const double se = std::sqrt(closed * (1.0 - closed) / draws);
  CHECK(std::abs(freq - closed) < 3.0 * se);
}

TEST_CASE("P_ND shape in the whitened energy x") {
  auto p_nd = [](double x, double tau) {
    return 0.5 * std::erfc((0.5 * x + std::log(tau)) / std::sqrt(2.0 * x));
  };
  // tau <= 1: monotonically decreasing in x.
  for (double tau : {0.3, 1.0}) {
    double prev = p_nd(1e-4, tau);
    for (double x = 0.05; x <= 12.0; x += 0.05) {
      const double cur = p_nd(x, tau);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  // tau > 1: maximum exactly at x = 2 log tau.
  for (double tau : {1.5, 2.0, 5.0}) {
    const double x_star = 2.0 * std::log(tau);
    const double peak = p_nd(x_star, tau);
    CHECK(p_nd(x_star * (1.0 - 1e-3), tau) < peak);
    CHECK(p_nd(x_star * (1.0 + 1e-3), tau) < peak);
  }
}

TEST_CASE("stealth LRT basics and density-quotient oracle") {
  const MeasurementModel model = two_bus_model();
  const Eigen::MatrixXd zero_cov = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd y(4);
  y << 0.3, -0.1, 0.8, 0.2;
  CHECK(lrt_stealth(model, zero_cov, y, 2.0).ratio == doctest::Approx(1.0));

  const StealthAttack attack = optimal_attack(model, 1.0);
  // At y = 0 the ratio is the square-rooted determinant quotient, <= 1.
  const LrtResult at_zero =
      lrt_stealth(model, attack.sigma_aa, Eigen::VectorXd::Zero(4), 2.0);
  const double expected = std::exp(
      0.5 * (logdet_spd(model.sigma_yy) -
             logdet_spd(model.sigma_yy + attack.sigma_aa)));
  CHECK(at_zero.ratio == doctest::Approx(expected).epsilon(1e-12));
  CHECK(at_zero.ratio <= 1.0);

  Rng rng(5);
  const MeasurementModel big = ieee14_model();
  const StealthAttack big_attack = optimal_attack(big, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd probe = rng.normal_vector(big.m());
    const LrtResult r = lrt_stealth(big, big_attack.sigma_aa, probe, 2.0);
    const double oracle =
        mvn_logpdf(probe, Eigen::VectorXd::Zero(big.m()),
                   big.sigma_yy + big_attack.sigma_aa) -
        mvn_logpdf(probe, Eigen::VectorXd::Zero(big.m()), big.sigma_yy);
    CHECK(r.log_ratio == doctest::Approx(oracle).epsilon(1e-9));
  }

  Eigen::MatrixXd not_psd = Eigen::MatrixXd::Identity(4, 4);
  not_psd(0, 0) = -1.0;
  CHECK_THROWS_AS(lrt_stealth(model, not_psd, y, 2.0), std::invalid_argument);
}

TEST_CASE("stealth weights pairing") {
  const MeasurementModel model = two_bus_model();
  const WeightedChiSquare wcs = stealth_weights(model, 1.0);
  REQUIRE(wcs.p() == 1);
  CHECK(wcs.weights[0] == doctest::Approx(0.8).epsilon(1e-12));  // 4 * (1/5)

  // Independent route: eigendecompositions of the full 4x4 matrices, paired
  // on the shared eigenvector order (descending H Sxx H^T with descending
  // Sigma_YY).
  const Eigen::MatrixXd h_sig_ht =
      model.h * model.sigma_xx * model.h.transpose();
  const SymEig a = sym_eig_descending(h_sig_ht);
  const SymEig b = sym_eig_descending(model.sigma_yy);
  for (int i = 0; i < wcs.p(); ++i) {
    CHECK(wcs.weights[i] == doctest::Approx(a.values(i) / b.values(i)).epsilon(1e-10));
  }

  // H = 0 edge: empty weight profile.
  const MeasurementModel degenerate =
      build_model(Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Identity(2, 2), 0.5);
  CHECK(stealth_weights(degenerate, 1.0).p() == 0);
  CHECK_THROWS_AS(stealth_weights(model, 0.5), std::invalid_argument);
}

TEST_CASE("stealth weights lie in (0, 1] on ieee14 across priors") {
  for (double rho : {0.0, 0.1, 0.9}) {
    for (double snr : {10.0, 20.0}) {
      const MeasurementModel model = ieee14_model(rho, snr);
      const WeightedChiSquare wcs = stealth_weights(model, 1.0);
      CHECK(wcs.p() == 13);
      double prev = 1.0 + 1e-15;
      for (double w : wcs.weights) {
        CHECK(w > 0.0);
        CHECK(w <= 1.0);
        CHECK(w <= prev);  // sorted descending
        prev = w;
      }
    }
  }
}

TEST_CASE("prob_detection_stealth: trivial and single-weight instances") {
  const MeasurementModel model = two_bus_model();
  // Threshold below zero: the tail probability is 1.
  const TailResult sure = prob_detection_stealth(model, 1.0, 0.05,
                                                 TailMethod::CfInversion);
  CHECK(sure.value == 1.0);

  // Single weight 0.8, tau = 2, lambda = 1: 0.8 chi2_1 tail at
  // 2 log 2 + log 1.8, cross-checked by two independent methods.
  const double x = 2.0 * std::log(2.0) + std::log(1.8);
  const WeightedChiSquare wcs = stealth_weights(model, 1.0);
  CHECK(stealth_tail_threshold(wcs, 1.0, 2.0) == doctest::Approx(x).epsilon(1e-14));
  DetectionOptions opts;
  opts.cf_tol = 1e-9;
  const TailResult cf =
      prob_detection_stealth(model, 1.0, 2.0, TailMethod::CfInversion, opts);
  const double exact = std::erfc(std::sqrt(x / 1.6));
  CHECK(std::abs(cf.value - exact) < 1e-7);
  opts.mc_trials = 10000000;
  opts.seed = 31;
  const TailResult mc =
      prob_detection_stealth(model, 1.0, 2.0, TailMethod::MonteCarlo, opts);
  CHECK(std::abs(mc.value - cf.value) < 3.0 * mc.std_error);
}

TEST_CASE("stealth detection probability equals measurement-space frequency") {
  const MeasurementModel model = ieee14_model();
  const double lambda = 2.0, tau = 2.0;
  DetectionOptions opts;
  opts.cf_tol = 1e-8;
  const double predicted =
      prob_detection_stealth(model, lambda, tau, TailMethod::CfInversion, opts).value;

  // End-to-end oracle: simulate Y_A = H X + Z + A and run the stealth LRT.
  const StealthAttack attack = optimal_attack(model, lambda);
  const Eigen::MatrixXd sigma_ya = model.sigma_yy + attack.sigma_aa;
  const Eigen::MatrixXd ya_inv = Eigen::LDLT<Eigen::MatrixXd>(sigma_ya).solve(
      Eigen::MatrixXd::Identity(model.m(), model.m()));
  const double log_offset =
      0.5 * (logdet_spd(sigma_ya) - logdet_spd(model.sigma_yy));
  const Eigen::MatrixXd attack_root = sym_sqrt(attack.sigma_aa);

  const int draws = 100000;
  const int chunk = 20000;
  Rng rng(77);
  int hits = 0;
  for (int start = 0; start < draws; start += chunk) {
    const Eigen::MatrixXd x = rng.normal_matrix(model.n(), chunk);
    const Eigen::MatrixXd z =
        rng.normal_matrix(model.m(), chunk) * std::sqrt(model.sigma2);
    const Eigen::MatrixXd a = attack_root * rng.normal_matrix(model.m(), chunk);
    const Eigen::MatrixXd y = model.h * x + z + a;
    const Eigen::MatrixXd w1 = model.sigma_yy_inv * y;
    const Eigen::MatrixXd w2 = ya_inv * y;
    for (int i = 0; i < chunk; ++i) {
      const double quad = y.col(i).dot(w1.col(i)) - y.col(i).dot(w2.col(i));
      const double log_l = 0.5 * quad - log_offset;
      if (log_l >= std::log(tau)) ++hits;
    }
  }
  const double freq = static_cast<double>(hits) / draws;
  const double se = std::sqrt(predicted * (1.0 - predicted) / draws);
  CHECK(std::abs(freq - predicted) < 3.0 * se);
}

TEST_CASE("stealth detection probability is non-increasing in lambda") {
  const MeasurementModel model = ieee14_model();
  DetectionOptions opts;
  opts.cf_tol = 1e-8;
  double prev = 1.1;
  for (int e = 0; e <= 10; ++e) {
    const double lambda = std::pow(2.0, e);
    const double pd =
        prob_detection_stealth(model, lambda, 2.0, TailMethod::CfInversion, opts)
            .value;
    CHECK(pd <= prev + 1e-7);
    prev = pd;
  }
}
