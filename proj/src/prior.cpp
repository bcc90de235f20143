#include "gridsec/prior.hpp"

#include <cmath>
#include <stdexcept>

#include "gridsec/linalg.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

StatePrior toeplitz_prior(int n, double rho) {
  if (n < 1) {
    throw std::invalid_argument("toeplitz_prior: n must be >= 1");
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("toeplitz_prior: rho must lie in [0, 1)");
  }
  StatePrior prior;
  prior.n = n;
  prior.rho = rho;
  prior.sigma_xx.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      prior.sigma_xx(i, j) = std::pow(rho, std::abs(i - j));
    }
  }
  return prior;
}

NoiseModel sigma2_from_snr(const Jacobian& h, const StatePrior& prior, double snr_db) {
  if (h.n() != prior.sigma_xx.rows()) {
    throw std::invalid_argument("sigma2_from_snr: dimension mismatch");
  }
  const double trace = (h.matrix * prior.sigma_xx * h.matrix.transpose()).trace();
  const double m = static_cast<double>(h.m());
  return NoiseModel{trace / (m * std::pow(10.0, snr_db / 10.0))};
}

double snr_from_sigma2(const Jacobian& h, const StatePrior& prior, double sigma2) {
  const double trace = (h.matrix * prior.sigma_xx * h.matrix.transpose()).trace();
  return 10.0 * std::log10(trace / (static_cast<double>(h.m()) * sigma2));
}

Eigen::MatrixXd sample_state_matrix(const Eigen::MatrixXd& covariance, int count,
                                    std::uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("sample_state_matrix: count must be >= 1");
  }
  const Eigen::MatrixXd root = sym_sqrt(covariance);  // throws if not PSD
  Rng rng(seed);
  return root * rng.normal_matrix(covariance.rows(), count);
}

std::vector<Eigen::VectorXd> sample_states(const StatePrior& prior, int count,
                                           std::uint64_t seed) {
  const Eigen::MatrixXd draws = sample_state_matrix(prior.sigma_xx, count, seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(draws.col(i));
  return out;
}

SampleCovariance sample_covariance(const Eigen::MatrixXd& samples_as_columns) {
  const int k = static_cast<int>(samples_as_columns.cols());
  if (k < 2) {
    throw std::invalid_argument("sample_covariance: need at least 2 samples");
  }
  SampleCovariance sc;
  sc.k = k;
  sc.s_xx = samples_as_columns * samples_as_columns.transpose() / double(k - 1);
  return sc;
}

SampleCovariance sample_covariance(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("sample_covariance: need at least 2 samples");
  }
  Eigen::MatrixXd m(samples[0].size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) m.col(i) = samples[i];
  return sample_covariance(m);
}

}  // namespace gridsec
