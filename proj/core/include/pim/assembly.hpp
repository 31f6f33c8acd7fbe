#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pim/kernels.hpp"
#include "pim/pointcloud.hpp"

namespace pim {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetrised point-integral pencil at bandwidth t:
///
///   A_ij = -(C_t/t) R(|p_i-p_j|^2/4t) V_i V_j  (i != j),  A_ii = -sum_{j!=i} A_ij
///   B_ij =  C_t Rbar(|p_i-p_j|^2/4t) V_i V_j   (diagonal included)
///
/// Row i of the discrete Laplacian and of the mass side are both scaled by V_i,
/// so A u = mu B u has the same eigenpairs as the unsymmetrised problem.
struct PimPencil {
  SparseMatrix A;
  SparseMatrix B;
  double t = 0.0;
  KernelFamily kernel = KernelFamily::Wendland;
  int intrinsic_dim = 1;
  bool graph_mode = false;
  /// Weights actually used (1/n everywhere in graph mode).
  Eigen::VectorXd weights;
  /// Source cloud; null for pencils read back from disk without their cloud.
  std::shared_ptr<const PointCloud> cloud;
  std::vector<std::string> warnings;

  Eigen::Index size() const noexcept { return A.rows(); }
};

struct AssemblyOptions {
  bool graph_mode = false;
  /// Adds jitter * trace(B) / n to the diagonal of B.
  double jitter = 0.0;
  int threads = 1;
};

PimPencil assemble_pencil(std::shared_ptr<const PointCloud> cloud, const Kernel& kernel, double t,
                          const AssemblyOptions& options = {});

/// B += eps * trace(B) / n * I.
void apply_mass_jitter(PimPencil& pencil, double eps);

/// Unsymmetrised action L_{t,h} u = diag(1/V) A u.
Eigen::VectorXd apply_discrete_laplacian(const PimPencil& pencil, std::span<const double> u);

struct ShiftDiagnostics {
  double w_min = 0.0;
  double w_max = 0.0;
  double w_median = 0.0;
  /// w_{t,h}(p_i) = sum_j R_t(p_i, p_j) V_j for every sample.
  Eigen::VectorXd w;
  /// Points whose w falls below 10% of the median.
  std::vector<Eigen::Index> flagged;
};

ShiftDiagnostics spectral_shift_check(const PimPencil& pencil, const Kernel& kernel);

}  // namespace pim
