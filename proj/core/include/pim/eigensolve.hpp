#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pim/error.hpp"
#include "pim/ground_truth.hpp"

namespace pim {

/// Smallest Neumann eigenpairs of A v = mu B v (mu = -lambda >= 0 ascending).
/// Columns of `vectors` are B-orthonormal; each column's entry of largest
/// magnitude is positive.
struct Spectrum {
  Eigen::VectorXd mu;
  Eigen::MatrixXd vectors;
  /// ||A v - mu B v||_2 per mode.
  Eigen::VectorXd residual_norms;
  std::vector<bool> converged;
  /// "dense" or "lanczos".
  std::string method;
  /// "mass-cholesky" when B = L L^T was used, "reciprocal" when the solver
  /// worked on B x = theta (A + shift B) x.
  std::string formulation;
  double shift = 0.0;
  /// Directions with theta <= 0 in the reciprocal formulation (B indefinite).
  Eigen::Index discarded = 0;

  Eigen::Index size() const noexcept { return mu.size(); }
};

struct DenseEigOptions {
  /// Shift for the reciprocal formulation; <= 0 picks 1e-3 tr(A)/tr(B).
  double shift = 0.0;
  bool deflate_constant = false;
  Eigen::Index dense_cap = 4000;
};

Spectrum dense_generalized_eigs(const Eigen::SparseMatrix<double>& A,
                                const Eigen::SparseMatrix<double>& B, Eigen::Index m,
                                const DenseEigOptions& options = {});
Spectrum dense_generalized_eigs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::Index m,
                                const DenseEigOptions& options = {});

struct LanczosOptions {
  /// Cap on the Krylov basis size; <= 0 picks min(n, max(20 m, 200)).
  Eigen::Index max_iter = 0;
  /// Relative residual target ||Av - mu Bv|| <= tol (||A||_F + mu ||B||_F).
  double tol = 1e-10;
  /// Shift-invert shift sigma in (A + sigma B); <= 0 picks 1e-3 tr(A)/tr(B).
  double shift = 0.0;
  bool deflate_constant = false;
  std::uint64_t seed = 1;
};

/// Thrown when the Krylov basis cap is reached; carries the best Ritz pairs
/// with `converged` flags.
class LanczosNotConverged : public NumericalError {
 public:
  LanczosNotConverged(const std::string& what, Spectrum partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Spectrum& partial() const noexcept { return partial_; }

 private:
  Spectrum partial_;
};

Spectrum lanczos_generalized_eigs(const Eigen::SparseMatrix<double>& A,
                                  const Eigen::SparseMatrix<double>& B, Eigen::Index m,
                                  const LanczosOptions& options = {});

/// ||A v_i - mu_i B v_i||_2 <= tol (||A||_F + mu_i ||B||_F) for every mode.
bool residuals_within(const Spectrum& spectrum, const Eigen::SparseMatrix<double>& A,
                      const Eigen::SparseMatrix<double>& B, double tol);

struct ModeComparison {
  std::size_t mode;
  std::size_t cluster;
  double computed;
  double exact;
  double abs_error;
  /// abs_error / exact, or abs_error for the zero mode.
  double rel_error;
};

/// Pairs computed and analytic eigenvalues mode by mode; inside a degenerate
/// analytic cluster the computed block is sorted before pairing.
std::vector<ModeComparison> eigenvalue_table(const Spectrum& spectrum, const GroundTruth& truth,
                                             std::size_t count);

}  // namespace pim
