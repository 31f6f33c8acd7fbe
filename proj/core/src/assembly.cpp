#include "pim/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "pim/error.hpp"
#include "pim/neighbor_index.hpp"

namespace pim {

namespace {

struct RowEntries {
  std::vector<Eigen::Index> cols;
  std::vector<double> a;
  std::vector<double> b;
  bool isolated = true;
};

void fill_rows(const PointCloud& cloud, const NeighborIndex& index, const Kernel& kernel, double t,
               const Eigen::VectorXd& v, Eigen::Index begin, Eigen::Index end,
               std::vector<RowEntries>& rows) {
  const double ct = normalization_constant(t, cloud.intrinsic_dim());
  const double radius = 2.0 * std::sqrt(t);
  std::vector<Eigen::Index> nbrs;
  std::vector<double> sq;
  for (Eigen::Index i = begin; i < end; ++i) {
    index.query(cloud.point(i), radius, nbrs, sq);
    RowEntries& row = rows[static_cast<std::size_t>(i)];
    row.cols.reserve(nbrs.size());
    row.a.reserve(nbrs.size());
    row.b.reserve(nbrs.size());
    double diag = 0.0;
    std::size_t diag_slot = 0;
    // nbrs is ascending, which fixes the accumulation order of the diagonal.
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const Eigen::Index j = nbrs[k];
      const double r = sq[k] / (4.0 * t);
      // Symmetric operand order.
      const double vv = i < j ? v[i] * v[j] : v[j] * v[i];
      const double rbar = ct * kernel.Rbar(r) * vv;
      if (j == i) {
        diag_slot = row.cols.size();
        row.cols.push_back(j);
        row.a.push_back(0.0);
        row.b.push_back(rbar);
        continue;
      }
      const double a = -(ct / t) * kernel.R(r) * vv;
      if (a == 0.0 && rbar == 0.0) continue;
      if (a != 0.0) row.isolated = false;
      row.cols.push_back(j);
      row.a.push_back(a);
      row.b.push_back(rbar);
      diag -= a;
    }
    row.a[diag_slot] = diag;
  }
}

}  // namespace

PimPencil assemble_pencil(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
                          const AssemblyOptions& options) {
  if (!cloud) throw ValidationError("assemble_pencil: null cloud");
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("bandwidth t must be positive");
  const Eigen::Index n = cloud->size();

  PimPencil pencil;
  pencil.t = t;
  pencil.kernel = kernel.family();
  pencil.intrinsic_dim = cloud->intrinsic_dim();
  pencil.graph_mode = options.graph_mode;
  pencil.weights = options.graph_mode ? Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))
                                      : cloud->weights();
  pencil.cloud = cloud;

  const NeighborIndex index(cloud->points(), 2.0 * std::sqrt(t));
  std::vector<RowEntries> rows(static_cast<std::size_t>(n));

  const int threads = std::clamp(options.threads, 1, static_cast<int>(std::max<Eigen::Index>(1, n)));
  if (threads == 1) {
    fill_rows(*cloud, index, kernel, t, pencil.weights, 0, n, rows);
  } else {
    std::vector<std::jthread> workers;
    const Eigen::Index chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const Eigen::Index begin = w * chunk;
      const Eigen::Index end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        fill_rows(*cloud, index, kernel, t, pencil.weights, begin, end, rows);
      });
    }
  }

  // The pattern is symmetric, so column i of each matrix is row i.
  Eigen::VectorXi nnz(n);
  std::size_t isolated = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    nnz[i] = static_cast<int>(rows[i].cols.size());
    if (rows[i].isolated) ++isolated;
  }
  pencil.A.resize(n, n);
  pencil.B.resize(n, n);
  pencil.A.reserve(nnz);
  pencil.B.reserve(nnz);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowEntries& row = rows[i];
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
      pencil.A.insert(row.cols[k], i) = row.a[k];
      pencil.B.insert(row.cols[k], i) = row.b[k];
    }
  }
  pencil.A.makeCompressed();
  pencil.B.makeCompressed();

  if (isolated > 0) {
    pencil.warnings.push_back("disconnected at this bandwidth: " + std::to_string(isolated) +
                              " point(s) have no neighbour within 2 sqrt(t)");
  }
  if (options.jitter != 0.0) apply_mass_jitter(pencil, options.jitter);
  return pencil;
}

void apply_mass_jitter(PimPencil& pencil, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("jitter must be nonnegative");
  if (eps == 0.0) return;
  const Eigen::Index n = pencil.B.rows();
  double trace = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) trace += pencil.B.coeff(i, i);
  const double shift = eps * trace / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) pencil.B.coeffRef(i, i) += shift;
}

Eigen::VectorXd apply_discrete_laplacian(const PimPencil& pencil, std::span<const double> u) {
  if (static_cast<Eigen::Index>(u.size()) != pencil.size()) {
    throw ValidationError("apply_discrete_laplacian: vector length " + std::to_string(u.size()) +
                          " does not match pencil size " + std::to_string(pencil.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), pencil.size());
  Eigen::VectorXd out = pencil.A * uv;
  return out.cwiseQuotient(pencil.weights);
}

ShiftDiagnostics spectral_shift_check(const PimPencil& pencil, const Kernel& kernel) {
  // Off-diagonal A_ij = -(1/t) R_t(p_i,p_j) V_i V_j, so
  // w_i = t A_ii / V_i + C_t R(0) V_i (the j = i term).
  const Eigen::Index n = pencil.size();
  const double ct = normalization_constant(pencil.t, pencil.intrinsic_dim);
  ShiftDiagnostics diag;
  diag.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double vi = pencil.weights[i];
    diag.w[i] = pencil.t * pencil.A.coeff(i, i) / vi + ct * kernel.R(0.0) * vi;
  }
  diag.w_min = diag.w.minCoeff();
  diag.w_max = diag.w.maxCoeff();
  std::vector<double> sorted(diag.w.data(), diag.w.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  diag.w_median = sorted[static_cast<std::size_t>(n / 2)];
  for (Eigen::Index i = 0; i < n; ++i) {
    if (diag.w[i] < 0.1 * diag.w_median) diag.flagged.push_back(i);
  }
  return diag;
}

}  // namespace pim
