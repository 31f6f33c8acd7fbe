#include "pim/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pim/error.hpp"

namespace pim {

std::size_t NeighborIndex::KeyHash::operator()(const CellKey& key) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto c : key) {
    h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

NeighborIndex::NeighborIndex(const PointMatrix& points, double radius)
    : points_(points), cell_size_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("neighbor index radius must be positive and finite");
  }
  const auto d = points_.cols();
  origin_.assign(static_cast<std::size_t>(d), 0.0);
  if (points_.rows() > 0) {
    for (Eigen::Index c = 0; c < d; ++c) origin_[c] = points_.col(c).minCoeff();
  }
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    cells_[cell_of({points_.row(i).data(), static_cast<std::size_t>(d)})].push_back(i);
  }
}

NeighborIndex::CellKey NeighborIndex::cell_of(std::span<const double> x) const {
  CellKey key(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    key[c] = static_cast<std::int64_t>(std::floor((x[c] - origin_[c]) / cell_size_));
  }
  return key;
}

void NeighborIndex::query(std::span<const double> x, double radius,
                          std::vector<Eigen::Index>& indices, std::vector<double>& sq_dists) const {
  indices.clear();
  sq_dists.clear();
  const auto d = static_cast<std::size_t>(points_.cols());
  if (x.size() != d) throw ValidationError("query point dimension mismatch");
  if (!(radius >= 0.0)) throw ValidationError("query radius must be nonnegative");

  const CellKey center = cell_of(x);
  const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_size_));
  const double r2 = radius * radius;

  std::vector<std::pair<Eigen::Index, double>> found;
  auto scan = [&](const std::vector<Eigen::Index>& members) {
    for (Eigen::Index j : members) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x[c] - points_(j, static_cast<Eigen::Index>(c));
        s += diff * diff;
      }
      if (s <= r2) found.emplace_back(j, s);
    }
  };

  double block = 1.0;
  for (std::size_t c = 0; c < d; ++c) block *= static_cast<double>(2 * reach + 1);

  if (block > static_cast<double>(cells_.size())) {
    // Fewer occupied cells than cells in the search block: visit them directly.
    for (const auto& [cell, members] : cells_) {
      bool inside = true;
      for (std::size_t c = 0; c < d && inside; ++c) {
        inside = std::abs(cell[c] - center[c]) <= reach;
      }
      if (inside) scan(members);
    }
  } else {
    // Odometer over the (2 reach + 1)^d block of cells around the query cell.
    CellKey offset(d, -reach);
    CellKey key(d);
    while (true) {
      for (std::size_t c = 0; c < d; ++c) key[c] = center[c] + offset[c];
      if (auto it = cells_.find(key); it != cells_.end()) scan(it->second);
      std::size_t c = 0;
      while (c < d && offset[c] == reach) offset[c++] = -reach;
      if (c == d) break;
      ++offset[c];
    }
  }
  std::sort(found.begin(), found.end());
  indices.reserve(found.size());
  sq_dists.reserve(found.size());
  for (const auto& [j, s] : found) {
    indices.push_back(j);
    sq_dists.push_back(s);
  }
}

std::vector<Eigen::Index> NeighborIndex::query(std::span<const double> x, double radius) const {
  std::vector<Eigen::Index> indices;
  std::vector<double> sq;
  query(x, radius, indices, sq);
  return indices;
}

double NeighborIndex::nearest_other_distance(Eigen::Index i) const {
  const auto d = static_cast<std::size_t>(points_.cols());
  std::span<const double> x(points_.row(i).data(), d);
  std::vector<Eigen::Index> idx;
  std::vector<double> sq;
  double radius = cell_size_;
  // Every point lies within the bounding-box diagonal, so doubling terminates.
  double diag = 0.0;
  for (Eigen::Index c = 0; c < points_.cols(); ++c) {
    const double span = points_.col(c).maxCoeff() - points_.col(c).minCoeff();
    diag += span * span;
  }
  diag = std::sqrt(diag);
  while (true) {
    query(x, radius, idx, sq);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] != i) best = std::min(best, sq[k]);
    }
    if (std::isfinite(best)) return std::sqrt(best);
    if (radius > diag) return 0.0;
    radius *= 2.0;
  }
}

}  // namespace pim
