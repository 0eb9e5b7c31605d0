#include "mfgz/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfgz/errors.hpp"

namespace mfgz {

SpatialGrid::SpatialGrid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidArgument("grid needs at least one axis");
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const GridAxis& ax = axes_[a];
    if (ax.points < 3) throw InvalidArgument("grid axes need at least 3 points");
    if (!(ax.lo < ax.hi) || !std::isfinite(ax.lo) || !std::isfinite(ax.hi))
      throw InvalidArgument("grid axis needs finite lo < hi");
    strides_[a] = nodes_;
    if (nodes_ > std::numeric_limits<std::size_t>::max() / ax.points) throw SizeLimitExceeded("grid too large");
    nodes_ *= ax.points;
  }
}

void SpatialGrid::multi_index(std::size_t node, std::span<std::size_t> out) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    out[a] = node / strides_[a];
    node -= out[a] * strides_[a];
  }
}

std::size_t SpatialGrid::node_index(std::span<const std::size_t> multi) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) idx += multi[a] * strides_[a];
  return idx;
}

void SpatialGrid::node_coords(std::size_t node, std::span<double> out) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const std::size_t k = node / strides_[a];
    node -= k * strides_[a];
    out[a] = axes_[a].coord(k);
  }
}

double SpatialGrid::interpolate(std::span<const double> values, std::span<const double> point) const {
  const std::size_t d = axes_.size();
  if (point.size() != d) throw InvalidArgument("interpolate: point dimension mismatch");
  if (values.size() != nodes_) throw InvalidArgument("interpolate: value array size mismatch");
  // per axis: base cell index and fractional offset
  std::size_t base[16];
  double frac[16];
  if (d > 16) throw InvalidArgument("interpolate: too many axes");
  for (std::size_t a = 0; a < d; ++a) {
    const GridAxis& ax = axes_[a];
    const double tol = 1e-9 * (ax.hi - ax.lo);
    double q = point[a];
    if (!std::isfinite(q)) throw NumericFailure("interpolate: non-finite point");
    if (q < ax.lo - tol || q > ax.hi + tol) {
      const double out = q < ax.lo ? ax.lo - q : q - ax.hi;
      throw GridExcursion("configuration left the grid on axis " + std::to_string(a + 1) + " by " +
                              std::to_string(out),
                          out);
    }
    q = std::clamp(q, ax.lo, ax.hi);
    const double s = (q - ax.lo) / ax.spacing();
    std::size_t k = static_cast<std::size_t>(std::floor(s));
    if (k >= ax.points - 1) k = ax.points - 2;
    base[a] = k;
    frac[a] = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
  }
  double total = 0.0;
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const bool up = (c >> (d - 1 - a)) & 1U;
      w *= up ? frac[a] : 1.0 - frac[a];
      idx += (base[a] + (up ? 1 : 0)) * strides_[a];
    }
    if (w != 0.0) total += w * values[idx];
  }
  return total;
}

bool SpatialGrid::same_axes(const SpatialGrid& other) const {
  if (other.axes_.size() != axes_.size()) return false;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const GridAxis& x = axes_[a];
    const GridAxis& y = other.axes_[a];
    if (x.lo != y.lo || x.hi != y.hi || x.points != y.points) return false;
  }
  return true;
}

}  // namespace mfgz
