#include "pim/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "pim/symmetric_eigen.hpp"

namespace pim {

namespace {

constexpr const char* kNotPdMessage =
    "mass matrix not positive definite: Cholesky failed for B and for A + shift*B; "
    "rerun with --jitter <eps> to add eps*trace(B)/n to the mass diagonal";

double default_shift(double trace_a, double trace_b) {
  if (trace_a > 0.0 && trace_b > 0.0) return 1e-3 * trace_a / trace_b;
  return 1.0;
}

// Normalises columns of `x` to v^T B v = 1, computes Rayleigh quotients,
// sorts ascending, fixes signs and fills residuals.
template <typename ApplyA, typename ApplyB>
Spectrum finalize(Eigen::MatrixXd x, ApplyA&& apply_a, ApplyB&& apply_b, double norm_a,
                  double norm_b, double tol) {
  const Eigen::Index m = x.cols();
  Eigen::VectorXd mu(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd bx = apply_b(x.col(k));
    const double bnorm = x.col(k).dot(bx);
    if (!(bnorm > 0.0)) throw NumericalError("eigenvector has nonpositive B-norm");
    x.col(k) /= std::sqrt(bnorm);
    mu[k] = x.col(k).dot(apply_a(x.col(k)));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return mu[a] < mu[b]; });

  Spectrum s;
  s.mu.resize(m);
  s.vectors.resize(x.rows(), m);
  s.residual_norms.resize(m);
  s.converged.assign(static_cast<std::size_t>(m), false);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd v = x.col(order[k]);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    s.mu[k] = mu[order[k]];
    s.residual_norms[k] = (apply_a(v) - s.mu[k] * apply_b(v)).norm();
    s.converged[k] =
        s.residual_norms[k] <= tol * (norm_a + std::abs(s.mu[k]) * norm_b);
    s.vectors.col(k) = v;
  }
  return s;
}

void require_square_pair(Eigen::Index ar, Eigen::Index ac, Eigen::Index br, Eigen::Index bc,
                         Eigen::Index m) {
  if (ar != ac || br != bc || ar != br) {
    throw ValidationError("A and B must be square matrices of the same size");
  }
  if (m < 1 || m > ar) {
    throw ValidationError("requested mode count " + std::to_string(m) + " outside [1, " +
                          std::to_string(ar) + "]");
  }
}

}  // namespace

Spectrum dense_generalized_eigs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::Index m,
                                const DenseEigOptions& options) {
  require_square_pair(A.rows(), A.cols(), B.rows(), B.cols(), m);
  const Eigen::Index n = A.rows();
  if (n > options.dense_cap) {
    throw ValidationError("dense eigensolver capped at n = " + std::to_string(options.dense_cap) +
                          "; use the Lanczos path");
  }
  const double norm_a = A.norm();
  const double norm_b = B.norm();
  if ((A - A.transpose()).norm() > 1e-12 * std::max(norm_a, 1.0) ||
      (B - B.transpose()).norm() > 1e-12 * std::max(norm_b, 1.0)) {
    throw ValidationError("dense_generalized_eigs: A and B must be symmetric");
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const bool deflate = options.deflate_constant;
  const Eigen::Index wanted = deflate ? m - 1 : m;

  Spectrum result;
  Eigen::MatrixXd x;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() == Eigen::Success) {
    result.formulation = "mass-cholesky";
    const auto L = llt.matrixL();
    Eigen::MatrixXd c = L.solve(A);
    c = L.solve(c.transpose().eval());
    c = 0.5 * (c + c.transpose()).eval();
    if (deflate) {
      // L^T 1 is an exact eigenvector (A 1 = 0); move it above the wanted range.
      Eigen::VectorXd q = llt.matrixU() * ones;
      q.normalize();
      const double park = c.norm() + 1.0;
      c += (park - q.dot(c * q)) * q * q.transpose();
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(wanted));
    std::iota(idx.begin(), idx.end(), 0);
    auto eig = linalg::symmetric_eigen(std::move(c), idx);
    x = llt.matrixU().solve(eig.vectors);
  } else {
    result.formulation = "reciprocal";
    result.shift = options.shift > 0.0 ? options.shift : default_shift(A.trace(), B.trace());
    Eigen::LLT<Eigen::MatrixXd> mllt(A + result.shift * B);
    if (mllt.info() != Eigen::Success) throw NumericalError(kNotPdMessage);
    const auto L = mllt.matrixL();
    Eigen::MatrixXd c = L.solve(B);
    c = L.solve(c.transpose().eval());
    c = 0.5 * (c + c.transpose()).eval();
    if (deflate) {
      Eigen::VectorXd q = mllt.matrixU() * ones;
      q.normalize();
      const double park = -(c.norm() + 1.0);
      c += (park - q.dot(c * q)) * q * q.transpose();
    }
    // theta = 1/(mu + shift): the wanted modes are the largest positive theta.
    linalg::HouseholderTridiagonal tri(std::move(c));
    const Eigen::VectorXd theta = linalg::tridiagonal_eigenvalues(tri.diagonal(), tri.off_diagonal());
    const Eigen::Index positive = (theta.array() > 0.0).count();
    result.discarded = n - positive - (deflate ? 1 : 0);
    if (positive < wanted) {
      throw NumericalError("only " + std::to_string(positive) +
                           " physical modes in the reciprocal pencil; requested " +
                           std::to_string(wanted));
    }
    std::vector<double> shifts;
    for (Eigen::Index k = n - wanted; k < n; ++k) shifts.push_back(theta[k]);
    Eigen::MatrixXd z = linalg::tridiagonal_eigenvectors(tri.diagonal(), tri.off_diagonal(), shifts);
    tri.apply_q(z);
    x = mllt.matrixU().solve(z);
  }

  if (deflate) {
    Eigen::MatrixXd with_constant(n, m);
    with_constant.col(0) = ones;
    with_constant.rightCols(wanted) = x;
    x = std::move(with_constant);
  }

  Spectrum s = finalize(
      std::move(x), [&](const auto& v) -> Eigen::VectorXd { return A * v; },
      [&](const auto& v) -> Eigen::VectorXd { return B * v; }, norm_a, norm_b, 1e-8);
  s.method = "dense";
  s.formulation = result.formulation;
  s.shift = result.shift;
  s.discarded = result.discarded;
  return s;
}

Spectrum dense_generalized_eigs(const Eigen::SparseMatrix<double>& A,
                                const Eigen::SparseMatrix<double>& B, Eigen::Index m,
                                const DenseEigOptions& options) {
  if (A.rows() > options.dense_cap) {
    throw ValidationError("dense eigensolver capped at n = " + std::to_string(options.dense_cap) +
                          "; use the Lanczos path");
  }
  return dense_generalized_eigs(Eigen::MatrixXd(A), Eigen::MatrixXd(B), m, options);
}

Spectrum lanczos_generalized_eigs(const Eigen::SparseMatrix<double>& A,
                                  const Eigen::SparseMatrix<double>& B, Eigen::Index m,
                                  const LanczosOptions& options) {
  require_square_pair(A.rows(), A.cols(), B.rows(), B.cols(), m);
  const Eigen::Index n = A.rows();
  if (!(options.tol > 0.0)) throw ValidationError("Lanczos tolerance must be positive");

  double trace_a = 0.0;
  double trace_b = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    trace_a += A.coeff(i, i);
    trace_b += B.coeff(i, i);
  }
  const double shift = options.shift > 0.0 ? options.shift : default_shift(trace_a, trace_b);
  const Eigen::SparseMatrix<double> M = A + shift * B;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    throw NumericalError(kNotPdMessage);
  }
  const double norm_a = A.norm();
  const double norm_b = B.norm();

  const bool deflate = options.deflate_constant;
  const Eigen::Index wanted = deflate ? m - 1 : m;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd m_ones = M * ones;
  const double ones_m_ones = ones.dot(m_ones);

  auto apply_a = [&](const auto& v) -> Eigen::VectorXd { return A * v; };
  auto apply_b = [&](const auto& v) -> Eigen::VectorXd { return B * v; };

  auto assemble = [&](Eigen::MatrixXd ritz) {
    if (deflate) {
      Eigen::MatrixXd with_constant(n, m);
      with_constant.col(0) = ones;
      with_constant.rightCols(wanted) = ritz;
      ritz = std::move(with_constant);
    }
    Spectrum s = finalize(std::move(ritz), apply_a, apply_b, norm_a, norm_b, options.tol);
    s.method = "lanczos";
    s.formulation = "reciprocal";
    s.shift = shift;
    return s;
  };
  if (wanted == 0) return assemble(Eigen::MatrixXd(n, 0));

  const Eigen::Index kmax =
      std::min(n, options.max_iter > 0 ? options.max_iter : std::max<Eigen::Index>(20 * m, 200));
  Eigen::MatrixXd Q(n, kmax);
  Eigen::MatrixXd MQ(n, kmax);
  std::vector<double> alpha;
  std::vector<double> beta;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;

  auto m_orthogonalize = [&](Eigen::VectorXd& w, Eigen::Index basis) {
    for (int pass = 0; pass < 2; ++pass) {
      if (basis > 0) {
        const Eigen::VectorXd c = MQ.leftCols(basis).transpose() * w;
        w.noalias() -= Q.leftCols(basis) * c;
      }
      if (deflate) w -= (m_ones.dot(w) / ones_m_ones) * ones;
    }
  };
  auto fresh_vector = [&](Eigen::Index basis) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = normal(rng);
    m_orthogonalize(w, basis);
    return w;
  };

  Eigen::VectorXd q = fresh_vector(0);
  Eigen::VectorXd mq = M * q;
  double qnorm = std::sqrt(q.dot(mq));
  Q.col(0) = q / qnorm;
  MQ.col(0) = mq / qnorm;

  const Eigen::Index usable = deflate ? n - 1 : n;
  Spectrum best;
  for (Eigen::Index j = 0; j < kmax; ++j) {
    const Eigen::VectorXd bq = B * Q.col(j);
    Eigen::VectorXd w = ldlt.solve(bq);
    const double a = Q.col(j).dot(bq);
    alpha.push_back(a);
    w -= a * Q.col(j);
    if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
    m_orthogonalize(w, j + 1);
    Eigen::VectorXd mw = M * w;
    const double b = std::sqrt(std::max(0.0, w.dot(mw)));

    const Eigen::Index k = j + 1;
    const double scale = std::abs(*std::max_element(alpha.begin(), alpha.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y);
    }));
    const bool breakdown = b <= 1e-12 * std::max(scale, 1e-300);
    const bool exhausted = k == kmax || k == usable;
    if (k >= wanted && (k % 5 == 0 || breakdown || exhausted)) {
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
      Eigen::VectorXd off = Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1);
      const Eigen::VectorXd theta = linalg::tridiagonal_eigenvalues(diag, off);
      const Eigen::Index positive = (theta.array() > 0.0).count();
      if (positive >= wanted) {
        std::vector<double> shifts;
        for (Eigen::Index r = k - wanted; r < k; ++r) shifts.push_back(theta[r]);
        const Eigen::MatrixXd s = linalg::tridiagonal_eigenvectors(diag, off, shifts);
        best = assemble(Q.leftCols(k) * s);
        if (std::all_of(best.converged.begin(), best.converged.end(), [](bool c) { return c; })) {
          return best;
        }
      }
    }
    if (exhausted) break;
    if (breakdown) {
      // Invariant subspace found: continue from a fresh M-orthogonal direction.
      w = fresh_vector(k);
      mw = M * w;
      const double wn = std::sqrt(w.dot(mw));
      beta.push_back(0.0);
      Q.col(k) = w / wn;
      MQ.col(k) = mw / wn;
    } else {
      beta.push_back(b);
      Q.col(k) = w / b;
      MQ.col(k) = mw / b;
    }
  }
  if (best.size() == 0) {
    throw NumericalError("Lanczos produced no positive Ritz values for the requested modes");
  }
  throw LanczosNotConverged("Lanczos did not converge within " + std::to_string(kmax) +
                                " iterations; unconverged Ritz pairs are flagged",
                            best);
}

bool residuals_within(const Spectrum& spectrum, const Eigen::SparseMatrix<double>& A,
                      const Eigen::SparseMatrix<double>& B, double tol) {
  const double norm_a = A.norm();
  const double norm_b = B.norm();
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
    const Eigen::VectorXd v = spectrum.vectors.col(k);
    const double r = (A * v - spectrum.mu[k] * (B * v)).norm();
    if (r > tol * (norm_a + std::abs(spectrum.mu[k]) * norm_b)) return false;
  }
  return true;
}

std::vector<ModeComparison> eigenvalue_table(const Spectrum& spectrum, const GroundTruth& truth,
                                             std::size_t count) {
  if (count > truth.mode_count()) {
    throw ValidationError("ground truth has only " + std::to_string(truth.mode_count()) +
                          " modes; requested " + std::to_string(count));
  }
  if (static_cast<Eigen::Index>(count) > spectrum.size()) {
    throw ValidationError("spectrum has only " + std::to_string(spectrum.size()) +
                          " computed modes; requested " + std::to_string(count) + " comparisons");
  }
  std::vector<ModeComparison> rows;
  rows.reserve(count);
  for (std::size_t c = 0; c < truth.clusters().size(); ++c) {
    const EigenCluster& cl = truth.clusters()[c];
    if (cl.first >= count) break;
    const std::size_t end = std::min(count, cl.first + cl.multiplicity);
    std::vector<double> block(spectrum.mu.data() + cl.first, spectrum.mu.data() + end);
    std::sort(block.begin(), block.end());
    for (std::size_t i = cl.first; i < end; ++i) {
      const double computed = block[i - cl.first];
      const double abs_error = std::abs(computed - cl.mu);
      rows.push_back({i, c, computed, cl.mu, abs_error, cl.mu > 0.0 ? abs_error / cl.mu : abs_error});
    }
  }
  return rows;
}

}  // namespace pim
