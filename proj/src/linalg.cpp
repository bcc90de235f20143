#include "gridsec/linalg.hpp"

#include <stdexcept>

namespace gridsec {

SymEig sym_eig_descending(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig_descending: eigensolver failed");
  }
  // Eigen returns ascending order; reverse.
  const Eigen::Index n = a.rows();
  SymEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  // Sign convention: first component with magnitude above 1e-12 positive.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = out.vectors(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) out.vectors.col(j) = -out.vectors.col(j);
        break;
      }
    }
  }
  return out;
}

double logdet_spd(const Eigen::MatrixXd& a) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("logdet_spd: factorization failed");
  }
  const Eigen::VectorXd d = ldlt.vectorD();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      throw std::runtime_error("logdet_spd: matrix is not positive definite");
    }
    sum += std::log(d(i));
  }
  return sum;
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a, double clip_tol) {
  SymEig eig = sym_eig_descending(a);
  const double scale = eig.values.size() ? std::abs(eig.values(0)) : 0.0;
  Eigen::VectorXd roots(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    double v = eig.values(i);
    if (v < -clip_tol * std::max(scale, 1.0)) {
      throw std::runtime_error("sym_sqrt: matrix is not positive semidefinite");
    }
    roots(i) = std::sqrt(std::max(v, 0.0));
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

int sym_rank(const Eigen::VectorXd& eigenvalues_descending, double rel_tol) {
  if (eigenvalues_descending.size() == 0) return 0;
  const double scale = eigenvalues_descending.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < eigenvalues_descending.size(); ++i) {
    if (eigenvalues_descending(i) > rel_tol * scale) ++r;
  }
  return r;
}

}  // namespace gridsec
