#pragma once

#include <Eigen/Dense>

namespace gridsec {

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// descending and eigenvector signs fixed (first nonzero component
/// positive) for reproducibility.
struct SymEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
};

SymEig sym_eig_descending(const Eigen::MatrixXd& a);

/// log det of a symmetric positive definite matrix via LDLT.
double logdet_spd(const Eigen::MatrixXd& a);

/// Symmetric PSD square root via eigendecomposition (negative eigenvalues
/// below `clip_tol` relative to the largest are clipped to zero).
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a, double clip_tol = 1e-12);

/// Numerical rank: count of eigenvalues above rel_tol * max |eigenvalue|.
int sym_rank(const Eigen::VectorXd& eigenvalues_descending, double rel_tol = 1e-10);

}  // namespace gridsec
