#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graph_calculus/error.hpp"

namespace gcalc {

/// N points in R^n, stored row-major. Always valid once constructed:
/// n >= 1, N >= 2 and every coordinate finite.
class PointCloud {
 public:
  PointCloud(std::size_t ambient_dim, std::vector<double> coords)
      : ambient_dim_(ambient_dim), coords_(std::move(coords)) {
    if (ambient_dim_ == 0) throw Error("point cloud: ambient dimension must be >= 1");
    if (coords_.size() % ambient_dim_ != 0)
      throw Error("point cloud: coordinate count " + std::to_string(coords_.size()) +
                  " is not a multiple of the ambient dimension " + std::to_string(ambient_dim_));
    if (size() < 2) throw Error("point cloud: need at least 2 points, got " + std::to_string(size()));
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (!std::isfinite(coords_[i]))
        throw Error("point cloud: non-finite coordinate in point " + std::to_string(i / ambient_dim_));
    }
  }

  static PointCloud from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw Error("point cloud: no points");
    const std::size_t n = rows.front().size();
    std::vector<double> coords;
    coords.reserve(rows.size() * n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != n)
        throw Error("point cloud: point " + std::to_string(i) + " has dimension " + std::to_string(rows[i].size()) +
                    ", expected " + std::to_string(n));
      coords.insert(coords.end(), rows[i].begin(), rows[i].end());
    }
    return PointCloud(n, std::move(coords));
  }

  std::size_t size() const noexcept { return coords_.size() / ambient_dim_; }
  std::size_t ambient_dim() const noexcept { return ambient_dim_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * ambient_dim_, ambient_dim_};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t ambient_dim_;
  std::vector<double> coords_;
};

/// Ambient (chordal) squared distance, summed in coordinate order.
/// (a_i - b_i)^2 == (b_i - a_i)^2 exactly, so the result is symmetric bitwise.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace gcalc
