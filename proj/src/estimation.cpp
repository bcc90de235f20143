#include "gridsec/estimation.hpp"

#include <stdexcept>

namespace gridsec {

int MeasurementModel::rank_h_sig_ht() const {
  return sym_rank(h_sig_ht_eig.values, 1e-10);
}

double MeasurementModel::whitened_quadratic(const Eigen::VectorXd& a) const {
  if (a.size() != m()) {
    throw std::invalid_argument("whitened_quadratic: vector length != m");
  }
  return a.dot(sigma_yy_inv * a);
}

MeasurementModel build_model(const Eigen::MatrixXd& h, const Eigen::MatrixXd& sigma_xx,
                             double sigma2) {
  if (h.cols() != sigma_xx.rows() || sigma_xx.rows() != sigma_xx.cols()) {
    throw std::invalid_argument("build_model: H and Sigma_XX dimensions mismatch");
  }
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("build_model: sigma2 must be positive");
  }
  MeasurementModel model;
  model.h = h;
  model.sigma_xx = sigma_xx;
  model.sigma2 = sigma2;

  const Eigen::Index m = h.rows();
  const Eigen::MatrixXd h_sig_ht = h * sigma_xx * h.transpose();
  model.sigma_yy = h_sig_ht + sigma2 * Eigen::MatrixXd::Identity(m, m);

  model.h_sig_ht_eig = sym_eig_descending(h_sig_ht);
  // sigma_yy shares eigenvectors with h_sig_ht; eigenvalues shift by sigma2.
  const Eigen::VectorXd yy_vals =
      model.h_sig_ht_eig.values.cwiseMax(0.0).array() + sigma2;
  const Eigen::MatrixXd& v = model.h_sig_ht_eig.vectors;
  model.sigma_yy_inv = v * yy_vals.cwiseInverse().asDiagonal() * v.transpose();
  model.sigma_yy_sqrt = v * yy_vals.cwiseSqrt().asDiagonal() * v.transpose();
  model.sigma_yy_inv_sqrt =
      v * yy_vals.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  model.condition_number = yy_vals(0) / yy_vals(m - 1);
  model.ill_conditioned = model.condition_number > 1e12;

  model.mmse_m = sigma_xx * h.transpose() * model.sigma_yy_inv;
  return model;
}

MeasurementModel build_model(const Jacobian& h, const StatePrior& prior,
                             const NoiseModel& noise) {
  return build_model(h.matrix, prior.sigma_xx, noise.sigma2);
}

Eigen::VectorXd estimate(const MeasurementModel& model, const Eigen::VectorXd& y) {
  if (y.size() != model.m()) {
    throw std::invalid_argument("estimate: measurement length != m");
  }
  return model.mmse_m * y;
}

Eigen::VectorXd injection_vector(const MeasurementModel& model,
                                 const Eigen::VectorXd& a) {
  if (a.size() != model.m()) {
    throw std::invalid_argument("injection_vector: attack length != m");
  }
  return model.mmse_m * a;
}

double excess_distortion(const MeasurementModel& model, const Eigen::VectorXd& a) {
  if (a.size() != model.m()) {
    throw std::invalid_argument("excess_distortion: attack length != m");
  }
  const Eigen::VectorXd w = model.sigma_yy_inv * a;
  const Eigen::VectorXd ht_w = model.h.transpose() * w;
  return ht_w.dot(model.sigma_xx * model.sigma_xx * ht_w);
}

}  // namespace gridsec
