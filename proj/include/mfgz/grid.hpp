#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfgz {

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 3;

  double spacing() const noexcept { return (hi - lo) / static_cast<double>(points - 1); }
  double coord(std::size_t k) const noexcept {
    return k + 1 == points ? hi : lo + static_cast<double>(k) * spacing();
  }
};

/// Tensor grid, nodes numbered lexicographically with the last axis fastest.
class SpatialGrid {
 public:
  explicit SpatialGrid(std::vector<GridAxis> axes);

  std::size_t axis_count() const noexcept { return axes_.size(); }
  const GridAxis& axis(std::size_t a) const { return axes_[a]; }
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }
  std::size_t node_count() const noexcept { return nodes_; }
  std::size_t stride(std::size_t a) const { return strides_[a]; }

  void multi_index(std::size_t node, std::span<std::size_t> out) const;
  std::size_t node_index(std::span<const std::size_t> multi) const;
  void node_coords(std::size_t node, std::span<double> out) const;

  /// Multilinear interpolation of nodal values. Points may sit outside the box
  /// by a relative 1e-9 of the axis width (treated as on the face); anything
  /// further out throws GridExcursion carrying the distance.
  double interpolate(std::span<const double> values, std::span<const double> point) const;

  bool same_axes(const SpatialGrid& other) const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t nodes_ = 1;
};

}  // namespace mfgz
