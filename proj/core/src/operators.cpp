#include "pim/operators.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "pim/error.hpp"
#include "pim/io.hpp"

namespace pim {

namespace {

Eigen::VectorXd conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, double tol,
                                   Eigen::Index max_iter, Eigen::Index& iterations) {
  // Plain CG on the semidefinite system; b is orthogonal to the constant
  // null vector, and the iterates are kept there too.
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double target = tol * tol * b.squaredNorm();
  for (iterations = 0; iterations < max_iter && rr > target; ++iterations) {
    const Eigen::VectorXd ap = A * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    r.array() -= r.mean();
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

}  // namespace

PoissonSolution poisson_solve(const PimPencil& pencil, std::span<const double> f,
                              const PoissonOptions& options) {
  const Eigen::Index n = pencil.size();
  if (static_cast<Eigen::Index>(f.size()) != n) {
    throw ValidationError("poisson_solve: f has " + std::to_string(f.size()) +
                          " samples, pencil has " + std::to_string(n) + " points");
  }
  const Eigen::VectorXd& v = pencil.weights;
  PoissonSolution sol;
  sol.t = pencil.t;
  sol.rhs_f = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  sol.rhs_f.array() -= sol.rhs_f.dot(v) / v.sum();

  Eigen::VectorXd b = -(pencil.B * sol.rhs_f);
  b.array() -= b.mean();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    sol.u = Eigen::VectorXd::Zero(n);
    return sol;
  }

  if (options.method == PoissonMethod::Cholesky) {
    // Pin u_0 = 0: the reduced matrix is positive definite for a connected pencil.
    const SparseMatrix reduced = pencil.A.bottomRightCorner(n - 1, n - 1);
    Eigen::SimplicialLLT<SparseMatrix> llt(reduced);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("poisson_solve: stiffness matrix is singular beyond the constant "
                           "null space (disconnected at this bandwidth?)");
    }
    sol.u.resize(n);
    sol.u[0] = 0.0;
    sol.u.tail(n - 1) = llt.solve(b.tail(n - 1));
    // Iterative refinement against the full matrix.
    for (int step = 0; step < 4; ++step) {
      const Eigen::VectorXd r = b - pencil.A * sol.u;
      if (r.norm() <= 0.1 * options.tol * bnorm) break;
      sol.u.tail(n - 1) += llt.solve(r.tail(n - 1));
      ++sol.iterations;
    }
  } else {
    const Eigen::Index max_iter = options.max_iter > 0 ? options.max_iter : 10 * n;
    sol.u = conjugate_gradient(pencil.A, b, options.tol, max_iter, sol.iterations);
  }
  // Measured before the mean shift, which only adds round-off of A 1 = 0.
  sol.residual = (pencil.A * sol.u - b).norm() / bnorm;
  sol.u.array() -= sol.u.dot(v) / v.sum();
  if (!(sol.residual <= options.tol)) {
    throw NumericalError("poisson_solve: tolerance not reached",
                         "relative residual " + format_double(sol.residual) + " > tol " +
                             format_double(options.tol));
  }
  return sol;
}

KernelField::KernelField(std::shared_ptr<const PointCloud> cloud, Kernel kernel, double t)
    : cloud_(std::move(cloud)),
      kernel_(std::move(kernel)),
      t_(t),
      ct_(normalization_constant(t, cloud_ ? cloud_->intrinsic_dim() : 1)),
      index_(cloud_ ? cloud_->points() : PointMatrix(), 2.0 * std::sqrt(t)) {
  if (!cloud_) throw ValidationError("KernelField: null cloud");
}

KernelField::Sums KernelField::sums(std::span<const double> u, std::span<const double> x) const {
  if (!u.empty() && static_cast<Eigen::Index>(u.size()) != cloud_->size()) {
    throw ValidationError("sample vector length does not match the cloud");
  }
  std::vector<Eigen::Index> idx;
  std::vector<double> sq;
  index_.query(x, 2.0 * std::sqrt(t_), idx, sq);
  Sums s;
  const auto& v = cloud_->weights();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Index j = idx[k];
    const double r = sq[k] / (4.0 * t_);
    const double rt = ct_ * kernel_.R(r) * v[j];
    s.w += rt;
    if (!u.empty()) {
      s.ru += rt * u[j];
      s.rbaru += ct_ * kernel_.Rbar(r) * u[j] * v[j];
    }
  }
  if (!(s.w > 0.0)) {
    throw ValidationError("query point outside kernel support: no sample within 2 sqrt(t)");
  }
  return s;
}

double KernelField::w(std::span<const double> x) const { return sums({}, x).w; }

double KernelField::smooth(std::span<const double> u, std::span<const double> x) const {
  if (u.empty()) throw ValidationError("sample vector length does not match the cloud");
  const Sums s = sums(u, x);
  return s.ru / s.w;
}

double KernelField::extend(std::span<const double> u, double mu, std::span<const double> x) const {
  if (u.empty()) throw ValidationError("sample vector length does not match the cloud");
  const Sums s = sums(u, x);
  return (s.ru + mu * t_ * s.rbaru) / s.w;
}

double w_field(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
               std::span<const double> x) {
  return KernelField(std::move(cloud), kernel, t).w(x);
}

double smooth_field(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
                    std::span<const double> u, std::span<const double> x) {
  return KernelField(std::move(cloud), kernel, t).smooth(u, x);
}

double extend_eigenvector(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
                          std::span<const double> u, double mu, std::span<const double> x) {
  return KernelField(std::move(cloud), kernel, t).extend(u, mu, x);
}

}  // namespace pim
