#pragma once

#include <memory>
#include <span>

#include <Eigen/Core>

#include "pim/assembly.hpp"
#include "pim/kernels.hpp"
#include "pim/neighbor_index.hpp"
#include "pim/pointcloud.hpp"

namespace pim {

enum class PoissonMethod { Cholesky, ConjugateGradient };

struct PoissonOptions {
  PoissonMethod method = PoissonMethod::Cholesky;
  /// Relative residual ||A u - b|| <= tol ||b||.
  double tol = 1e-8;
  Eigen::Index max_iter = 0;  // CG only; <= 0 picks 10 n
};

struct PoissonSolution {
  /// Solution with sum_i u_i V_i = 0.
  Eigen::VectorXd u;
  /// Right-hand samples after removal of their V-weighted mean.
  Eigen::VectorXd rhs_f;
  double t = 0.0;
  double residual = 0.0;
  Eigen::Index iterations = 0;
};

/// Solves the discrete Neumann problem
///
///   -(1/t) sum_j R_t(p_i,p_j) (u_i - u_j) V_j = sum_j Rbar_t(p_i,p_j) f_j V_j,
///
/// i.e. A u = -B f in the symmetrised pencil, with sum_i u_i V_i = 0. The
/// V-weighted mean of f and the constant component of B f are projected out
/// first so the singular system is consistent.
PoissonSolution poisson_solve(const PimPencil& pencil, std::span<const double> f,
                              const PoissonOptions& options = {});

/// Kernel sums of a weighted cloud at arbitrary ambient points: the
/// normaliser w_{t,h}(x), the smoothed interpolant and the eigenvector
/// extension. Holds its own neighbour index at radius 2 sqrt(t).
class KernelField {
 public:
  KernelField(std::shared_ptr<const PointCloud> cloud, Kernel kernel, double t);

  double t() const noexcept { return t_; }

  /// w_{t,h}(x) = sum_j R_t(x, p_j) V_j. Throws ValidationError when no
  /// sample lies within 2 sqrt(t) of x.
  double w(std::span<const double> x) const;

  /// sum_j R_t(x,p_j) u_j V_j / w(x).
  double smooth(std::span<const double> u, std::span<const double> x) const;

  /// [sum_j R_t u_j V_j + mu t sum_j Rbar_t u_j V_j] / w(x) for an eigenpair
  /// (mu, u) of A u = mu B u (mu = -lambda).
  double extend(std::span<const double> u, double mu, std::span<const double> x) const;

 private:
  struct Sums {
    double w = 0.0;
    double ru = 0.0;
    double rbaru = 0.0;
  };
  Sums sums(std::span<const double> u, std::span<const double> x) const;

  std::shared_ptr<const PointCloud> cloud_;
  Kernel kernel_;
  double t_;
  double ct_;
  NeighborIndex index_;
};

double w_field(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
               std::span<const double> x);
double smooth_field(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
                    std::span<const double> u, std::span<const double> x);
double extend_eigenvector(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
                          std::span<const double> u, double mu, std::span<const double> x);

}  // namespace pim
