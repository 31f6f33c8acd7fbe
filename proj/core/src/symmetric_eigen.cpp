#include "pim/symmetric_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pim/error.hpp"

namespace pim::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// LU factorisation with partial pivoting of T - shift I (LAPACK dgttrf layout).
struct TridiagonalLU {
  Eigen::VectorXd dl, d, du, du2;
  std::vector<bool> swapped;

  TridiagonalLU(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double shift,
                double tiny) {
    const Eigen::Index n = diag.size();
    d = diag.array() - shift;
    dl = off;
    du = off;
    du2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
    swapped.assign(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)), false);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = true;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(d[i]) < tiny) d[i] = std::copysign(tiny, d[i] == 0.0 ? 1.0 : d[i]);
    }
  }

  void solve(Eigen::VectorXd& b) const {
    const Eigen::Index n = d.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (Eigen::Index i = n - 3; i >= 0; --i) {
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
  }
};

}  // namespace

HouseholderTridiagonal::HouseholderTridiagonal(Eigen::MatrixXd c) {
  const Eigen::Index n = c.rows();
  if (c.cols() != n) throw ValidationError("tridiagonalization needs a square matrix");
  diag_.resize(n);
  off_.resize(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    Eigen::VectorXd v = c.col(k).tail(m);
    diag_[k] = c(k, k);
    const double xnorm = v.norm();
    const double tail = v.tail(m - 1).norm();
    if (tail == 0.0) {
      off_[k] = v[0];
      reflectors_.emplace_back();
      betas_.push_back(0.0);
      continue;
    }
    const double alpha = v[0] > 0.0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double beta = 2.0 / v.squaredNorm();
    off_[k] = alpha;

    auto s = c.bottomRightCorner(m, m);
    Eigen::VectorXd p = beta * (s.selfadjointView<Eigen::Lower>() * v);
    const double kfac = 0.5 * beta * p.dot(v);
    p -= kfac * v;
    s.selfadjointView<Eigen::Lower>().rankUpdate(v, p, -1.0);

    reflectors_.push_back(std::move(v));
    betas_.push_back(beta);
  }
  if (n >= 2) {
    diag_[n - 2] = c(n - 2, n - 2);
    off_[n - 2] = c(n - 1, n - 2);
  }
  if (n >= 1) diag_[n - 1] = c(n - 1, n - 1);
}

void HouseholderTridiagonal::apply_q(Eigen::MatrixXd& z) const {
  const Eigen::Index n = diag_.size();
  for (Eigen::Index k = static_cast<Eigen::Index>(reflectors_.size()) - 1; k >= 0; --k) {
    if (betas_[k] == 0.0) continue;
    const Eigen::VectorXd& v = reflectors_[k];
    auto block = z.bottomRows(n - k - 1);
    const Eigen::RowVectorXd proj = betas_[k] * (v.transpose() * block);
    block.noalias() -= v * proj;
  }
}

Eigen::VectorXd tridiagonal_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  const int n = static_cast<int>(diag.size());
  Eigen::VectorXd d = diag;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) e[i] = off[i];

  long sweeps = 0;
  const long max_sweeps = 50L * std::max(n, 1);
  for (int l = 0; l < n; ++l) {
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m == l) break;
      if (++sweeps > max_sweeps) {
        throw NumericalError("implicit QL iteration did not converge",
                             "converged " + std::to_string(l) + " of " + std::to_string(n) +
                                 " eigenvalues after " + std::to_string(max_sweeps) + " sweeps");
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      int i;
      bool underflow = false;
      for (i = m - 1; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
  std::sort(d.data(), d.data() + n);
  return d;
}

Eigen::MatrixXd tridiagonal_eigenvectors(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                         std::span<const double> eigenvalues) {
  const Eigen::Index n = diag.size();
  const auto count = static_cast<Eigen::Index>(eigenvalues.size());
  Eigen::MatrixXd z(n, count);
  if (n == 0) return z;

  double tnorm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = std::abs(diag[i]);
    if (i > 0) row += std::abs(off[i - 1]);
    if (i + 1 < n) row += std::abs(off[i]);
    tnorm = std::max(tnorm, row);
  }
  if (tnorm == 0.0) tnorm = 1.0;
  const double cluster_gap = 1e-3 * tnorm;
  const double min_sep = 10.0 * kEps * tnorm;
  const double tiny = kEps * tnorm;

  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Eigen::Index cluster_start = 0;
  double previous_shift = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    double shift = eigenvalues[j];
    if (j > 0 && shift - eigenvalues[j - 1] > cluster_gap) cluster_start = j;
    // Separate coincident shifts so inverse iteration sees distinct poles.
    if (j > cluster_start && shift - previous_shift < min_sep) shift = previous_shift + min_sep;
    previous_shift = shift;

    const TridiagonalLU lu(diag, off, shift, tiny);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = unit(rng);
    x.normalize();
    for (int it = 0; it < 5; ++it) {
      lu.solve(x);
      for (Eigen::Index k = cluster_start; k < j; ++k) x -= z.col(k).dot(x) * z.col(k);
      const double norm = x.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw NumericalError("inverse iteration failed for eigenvalue " + std::to_string(j));
      }
      x /= norm;
    }
    z.col(j) = x;
  }
  return z;
}

SymmetricEigen symmetric_eigen(Eigen::MatrixXd matrix, std::span<const Eigen::Index> wanted) {
  const HouseholderTridiagonal tri(std::move(matrix));
  SymmetricEigen out;
  out.values = tridiagonal_eigenvalues(tri.diagonal(), tri.off_diagonal());
  std::vector<double> selected;
  selected.reserve(wanted.size());
  for (Eigen::Index idx : wanted) {
    if (idx < 0 || idx >= out.values.size()) throw ValidationError("eigenvector index out of range");
    selected.push_back(out.values[idx]);
  }
  // Inverse iteration needs the shifts ascending for its cluster logic.
  std::vector<std::size_t> order(selected.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return selected[a] < selected[b]; });
  std::vector<double> sorted;
  for (auto k : order) sorted.push_back(selected[k]);
  Eigen::MatrixXd z = tridiagonal_eigenvectors(tri.diagonal(), tri.off_diagonal(), sorted);
  tri.apply_q(z);
  out.vectors.resize(z.rows(), z.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.vectors.col(static_cast<Eigen::Index>(order[k])) = z.col(static_cast<Eigen::Index>(k));
  }
  return out;
}

}  // namespace pim::linalg
