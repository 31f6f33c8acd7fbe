#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace pim::linalg {

/// Householder reduction of a dense symmetric matrix to tridiagonal form,
/// C = Q T Q^T. Only the lower triangle of the input is read.
class HouseholderTridiagonal {
 public:
  explicit HouseholderTridiagonal(Eigen::MatrixXd matrix);

  const Eigen::VectorXd& diagonal() const noexcept { return diag_; }
  const Eigen::VectorXd& off_diagonal() const noexcept { return off_; }

  /// Z <- Q Z (maps tridiagonal eigenvectors back to the original basis).
  void apply_q(Eigen::MatrixXd& z) const;

 private:
  Eigen::VectorXd diag_;
  Eigen::VectorXd off_;
  // Reflector k acts on rows k+1..n-1: H_k = I - beta_k v_k v_k^T.
  std::vector<Eigen::VectorXd> reflectors_;
  std::vector<double> betas_;
};

/// All eigenvalues of the symmetric tridiagonal matrix (diag, off), ascending,
/// by implicit-shift QL. Throws NumericalError after 50 n total sweeps.
Eigen::VectorXd tridiagonal_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& off);

/// Orthonormal eigenvectors for the given (ascending) eigenvalues by inverse
/// iteration, with Gram-Schmidt inside clusters of close eigenvalues.
Eigen::MatrixXd tridiagonal_eigenvectors(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                         std::span<const double> eigenvalues);

struct SymmetricEigen {
  Eigen::VectorXd values;   // all eigenvalues, ascending
  Eigen::MatrixXd vectors;  // columns for the requested indices
};

/// Dense symmetric eigen-decomposition returning all eigenvalues and the
/// eigenvectors of `wanted` (indices into the ascending order).
SymmetricEigen symmetric_eigen(Eigen::MatrixXd matrix, std::span<const Eigen::Index> wanted);

}  // namespace pim::linalg
