#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridsec/estimation.hpp"
#include "gridsec/rng.hpp"

using namespace gridsec;

namespace {

std::string cases_dir() { return GRIDSEC_CASES_DIR; }

MeasurementModel two_bus_model(double sigma2 = 1.0) {
  const Jacobian jac = build_jacobian(
      parse_case("case twobus\nbus 0\nbus 1\nbranch 0 1 1.0\nslack 0\n"));
  return build_model(jac, toeplitz_prior(1, 0.0), NoiseModel{sigma2});
}

MeasurementModel random_model(int m, int n, std::uint64_t seed, double sigma2 = 0.5) {
  Rng rng(seed);
  const Eigen::MatrixXd h = rng.normal_matrix(m, n);
  Eigen::MatrixXd base = rng.normal_matrix(n, n);
  const Eigen::MatrixXd sxx =
      base * base.transpose() + Eigen::MatrixXd::Identity(n, n) * 0.2;
  return build_model(h, sxx, sigma2);
}

}  // namespace

TEST_CASE("two-bus MMSE matrix is the Sherman-Morrison value") {
  const MeasurementModel model = two_bus_model();
  Eigen::VectorXd expected(4);
  expected << -0.2, 0.2, -0.2, 0.2;  // (-1,1,-1,1)/5
  CHECK((model.mmse_m.transpose() - expected).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd y(4);
  y << -1, 1, -1, 1;
  CHECK(estimate(model, y)(0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(estimate(model, Eigen::VectorXd::Zero(4)).isZero(0.0));

  Eigen::VectorXd a(4);
  a << 5, 0, 0, 0;
  CHECK(injection_vector(model, a)(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(excess_distortion(model, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(excess_distortion(model, Eigen::VectorXd::Zero(4)) == 0.0);
}

TEST_CASE("estimator vanishes as noise dominates") {
  const MeasurementModel model = two_bus_model(1e12);
  CHECK(model.mmse_m.cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("cache residual on ieee14") {
  const Jacobian jac = build_jacobian(load_case_file(cases_dir() + "/ieee14.case"));
  const StatePrior prior = toeplitz_prior(13, 0.1);
  const NoiseModel noise = sigma2_from_snr(jac, prior, 10.0);
  const MeasurementModel model = build_model(jac, prior, noise);
  // M Sigma_YY = Sigma_XX H^T
  const Eigen::MatrixXd residual =
      model.mmse_m * model.sigma_yy - prior.sigma_xx * jac.matrix.transpose();
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(model.ill_conditioned);
}

TEST_CASE("estimate matches an independent solve route") {
  const MeasurementModel model = random_model(8, 3, 5);
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd y = rng.normal_vector(8);
    // Oracle: Sxx * H^T * (Syy \ y) through a fresh LDLT solve.
    const Eigen::VectorXd oracle =
        model.sigma_xx *
        (model.h.transpose() * Eigen::LDLT<Eigen::MatrixXd>(model.sigma_yy).solve(y));
    CHECK((estimate(model, y) - oracle).norm() < 1e-10);
  }
}

TEST_CASE("attack shifts the estimate linearly") {
  const MeasurementModel model = random_model(10, 4, 9);
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd y = rng.normal_vector(10);
    const Eigen::VectorXd a = rng.normal_vector(10);
    const Eigen::VectorXd c = injection_vector(model, a);
    CHECK((estimate(model, y + a) - estimate(model, y) - c).norm() < 1e-10);
  }
}

TEST_CASE("excess distortion equals the injection norm on both routes") {
  const MeasurementModel model = random_model(12, 5, 31);
  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd a = rng.normal_vector(12) * (0.1 + 5.0 * rng.uniform());
    const double via_quadratic = excess_distortion(model, a);
    const double via_norm = injection_vector(model, a).squaredNorm();
    CHECK(via_quadratic ==
          doctest::Approx(via_norm).epsilon(1e-9));
  }
}

TEST_CASE("noise floor bounds the measurement covariance spectrum") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const MeasurementModel model = random_model(7, 3, seed, 0.3);
    const SymEig eig = sym_eig_descending(model.sigma_yy);
    CHECK(eig.values(6) >= 0.3 - 1e-9);
  }
}

TEST_CASE("MMSE beats random linear estimators under common random numbers") {
  for (std::uint64_t seed : {11ull, 12ull}) {
    const MeasurementModel model = random_model(5, 2, seed, 0.4);
    const int draws = 100000;
    Rng rng(seed * 1000);
    const Eigen::MatrixXd x = sample_state_matrix(model.sigma_xx, draws, rng.raw());
    const Eigen::MatrixXd z =
        std::sqrt(model.sigma2) * Rng(rng.raw()).normal_matrix(5, draws);
    const Eigen::MatrixXd y = model.h * x + z;
    const double err_mmse = (x - model.mmse_m * y).squaredNorm() / draws;
    Rng lrng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::MatrixXd l =
          model.mmse_m + 0.05 * lrng.normal_matrix(2, 5);
      const double err_l = (x - l * y).squaredNorm() / draws;
      CHECK(err_mmse <= err_l);
    }
  }
}

TEST_CASE("dimension validation") {
  const MeasurementModel model = two_bus_model();
  CHECK_THROWS_AS(estimate(model, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(injection_vector(model, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_model(Eigen::MatrixXd::Zero(4, 2),
                              Eigen::MatrixXd::Identity(3, 3), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_model(Eigen::MatrixXd::Zero(4, 2),
                              Eigen::MatrixXd::Identity(2, 2), 0.0),
                  std::invalid_argument);
}
