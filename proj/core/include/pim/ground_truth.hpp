#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pim/pointcloud.hpp"

namespace pim {

/// One analytic Neumann eigenfunction, identified by its quantum numbers.
struct AnalyticMode {
  double mu;
  std::string label;
  // Interpretation depends on the manifold: (m) interval/circle, (m, p)
  // rectangle/flat torus, (l, m) sphere/hemisphere. `parity` selects cos (0)
  // or sin (1) factors where applicable.
  int a = 0;
  int b = 0;
  int parity_a = 0;
  int parity_b = 0;
};

/// A degenerate group of analytic eigenvalues: modes [first, first + multiplicity).
struct EigenCluster {
  double mu;
  std::size_t first;
  std::size_t multiplicity;
};

/// Closed-form Neumann spectrum (mu = -lambda >= 0, ascending, repeated by
/// multiplicity) and eigenfunctions of a built-in manifold.
class GroundTruth {
 public:
  GroundTruth(Manifold manifold, ManifoldParams params, std::vector<AnalyticMode> modes);

  Manifold manifold() const noexcept { return manifold_; }
  const ManifoldParams& params() const noexcept { return params_; }
  double volume() const noexcept { return volume_; }

  std::size_t mode_count() const noexcept { return modes_.size(); }
  const std::vector<AnalyticMode>& modes() const noexcept { return modes_; }
  const std::vector<EigenCluster>& clusters() const noexcept { return clusters_; }
  std::vector<double> eigenvalues() const;

  /// Index into clusters() of the cluster containing `mode`.
  std::size_t cluster_of(std::size_t mode) const;

  /// Analytic eigenfunction `mode` evaluated at an ambient point.
  double eigenfunction(std::size_t mode, std::span<const double> x) const;

 private:
  Manifold manifold_;
  ManifoldParams params_;
  double volume_;
  std::vector<AnalyticMode> modes_;
  std::vector<EigenCluster> clusters_;
};

/// At least `min_modes` analytic modes, extended so the last cluster is
/// complete. Throws ValidationError for manifolds without a closed form
/// (the embedded torus).
GroundTruth ground_truth(Manifold manifold, const ManifoldParams& params, std::size_t min_modes);

}  // namespace pim
