#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pim/pointcloud.hpp"

namespace pim {

/// Uniform-grid spatial hash for fixed-radius queries in any ambient
/// dimension. Cell size equals the construction radius, so a query at that
/// radius inspects the 3^d surrounding cells.
class NeighborIndex {
 public:
  NeighborIndex(const PointMatrix& points, double radius);

  double radius() const noexcept { return cell_size_; }
  Eigen::Index size() const noexcept { return points_.rows(); }

  /// Indices j with |x - p_j| <= radius, ascending.
  std::vector<Eigen::Index> query(std::span<const double> x, double radius) const;
  std::vector<Eigen::Index> query(std::span<const double> x) const { return query(x, cell_size_); }

  /// Same as query() but also returns squared distances, aligned with the indices.
  void query(std::span<const double> x, double radius, std::vector<Eigen::Index>& indices,
             std::vector<double>& sq_dists) const;

  /// Distance from point i to its nearest other point (0 for duplicates).
  double nearest_other_distance(Eigen::Index i) const;

 private:
  using CellKey = std::vector<std::int64_t>;
  struct KeyHash {
    std::size_t operator()(const CellKey& key) const noexcept;
  };

  CellKey cell_of(std::span<const double> x) const;

  PointMatrix points_;
  double cell_size_;
  std::vector<double> origin_;
  std::unordered_map<CellKey, std::vector<Eigen::Index>, KeyHash> cells_;
};

}  // namespace pim
