#pragma once

// Gaussian-kernel weight graph on a point cloud: W(u,v) = exp(-|u-v|^2 / 2eps)
// and the vertex degrees d(u) = sum_v W(u,v). Self-loops are part of the
// graph (W(u,u) = 1), and the edge set is every ordered pair whose weight
// survives the optional truncation threshold.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graph_calculus/error.hpp"
#include "graph_calculus/parallel.hpp"
#include "graph_calculus/point_cloud.hpp"

namespace gcalc {

struct KernelConfig {
  double epsilon = 1.0;
  /// Weights strictly below tau are dropped. tau = 0 keeps the complete graph.
  double truncation_tau = 0.0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw Error("kernel: epsilon must be positive and finite, got " + std::to_string(epsilon));
    if (!(truncation_tau >= 0.0 && truncation_tau < 1.0))
      throw Error("kernel: truncation tau must lie in [0, 1), got " + std::to_string(truncation_tau));
  }

  bool dense() const noexcept { return truncation_tau == 0.0; }

  /// Squared distance beyond which exp(-r2/2eps) < tau. Only used to skip
  /// evaluating exp; the exact test is always `w >= tau`.
  double cutoff_squared() const noexcept {
    if (dense()) return std::numeric_limits<double>::infinity();
    return -2.0 * epsilon * std::log(truncation_tau) * (1.0 + 1e-9);
  }
};

/// Kernel weight for a squared distance, or exactly 0 when truncated.
inline double kernel_weight(double squared_dist, const KernelConfig& kernel, double cutoff_sq) noexcept {
  if (squared_dist > cutoff_sq) return 0.0;
  const double w = std::exp(-squared_dist / (2.0 * kernel.epsilon));
  return w >= kernel.truncation_tau ? w : 0.0;
}

/// Row-compressed sparsity pattern of a symmetric graph. Columns are sorted
/// within each row, the diagonal is always present, and transpose[k] is the
/// position of (v,u) when position k holds (u,v). Weight matrices and edge
/// fields built on the same graph share one pattern.
struct EdgePattern {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t n = 0;
  bool complete = false;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> cols;
  std::vector<std::size_t> transpose;

  std::size_t nnz() const noexcept { return cols.size(); }

  std::size_t find(std::size_t u, std::size_t v) const noexcept {
    if (u >= n || v >= n) return npos;
    if (complete) return u * n + v;
    const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[u]);
    const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[u + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(v));
    if (it == last || *it != v) return npos;
    return static_cast<std::size_t>(it - cols.begin());
  }

  bool same_structure(const EdgePattern& other) const noexcept {
    return n == other.n && row_ptr == other.row_ptr && cols == other.cols;
  }

  static std::shared_ptr<const EdgePattern> make_complete(std::size_t n) {
    auto p = std::make_shared<EdgePattern>();
    p->n = n;
    p->complete = true;
    p->row_ptr.resize(n + 1);
    p->cols.resize(n * n);
    p->transpose.resize(n * n);
    for (std::size_t u = 0; u <= n; ++u) p->row_ptr[u] = u * n;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        p->cols[u * n + v] = static_cast<std::uint32_t>(v);
        p->transpose[u * n + v] = v * n + u;
      }
    }
    return p;
  }
};

class WeightMatrix {
 public:
  WeightMatrix(std::shared_ptr<const EdgePattern> pattern, std::vector<double> values, KernelConfig kernel)
      : pattern_(std::move(pattern)), values_(std::move(values)), kernel_(kernel) {
    if (!pattern_ || values_.size() != pattern_->nnz())
      throw Error("weight matrix: value count does not match the sparsity pattern");
  }

  std::size_t size() const noexcept { return pattern_->n; }
  std::size_t nnz() const noexcept { return values_.size(); }
  double epsilon() const noexcept { return kernel_.epsilon; }
  const KernelConfig& kernel() const noexcept { return kernel_; }
  bool is_dense() const noexcept { return pattern_->complete; }

  const EdgePattern& pattern() const noexcept { return *pattern_; }
  const std::shared_ptr<const EdgePattern>& shared_pattern() const noexcept { return pattern_; }
  std::span<const double> values() const noexcept { return values_; }

  /// W(u,v), or 0 for a pair outside the pattern.
  double operator()(std::size_t u, std::size_t v) const noexcept {
    const std::size_t k = pattern_->find(u, v);
    return k == EdgePattern::npos ? 0.0 : values_[k];
  }

  /// Overwrites one stored entry without touching its mirror. Only for
  /// fault-injection tests of the invariant checks.
  void corrupt_entry_for_testing(std::size_t u, std::size_t v, double value) {
    const std::size_t k = pattern_->find(u, v);
    if (k == EdgePattern::npos) throw Error("weight matrix: entry outside the pattern");
    values_[k] = value;
  }

 private:
  std::shared_ptr<const EdgePattern> pattern_;
  std::vector<double> values_;
  KernelConfig kernel_;
};

/// Builds W from the cloud. Each unordered pair is evaluated once and written
/// to both (u,v) and (v,u), so W is symmetric bit-for-bit. The result does
/// not depend on `threads`.
inline WeightMatrix build_weights(const PointCloud& cloud, const KernelConfig& kernel, unsigned threads = 1) {
  kernel.validate();
  const std::size_t n = cloud.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw Error("weight matrix: too many points");
  const double cutoff_sq = kernel.cutoff_squared();

  if (kernel.dense()) {
    auto pattern = EdgePattern::make_complete(n);
    std::vector<double> values(n * n);
    parallel_for(n, threads, [&](std::size_t u) {
      const auto pu = cloud.point(u);
      values[u * n + u] = kernel_weight(0.0, kernel, cutoff_sq);
      for (std::size_t v = u + 1; v < n; ++v) {
        const double w = kernel_weight(squared_distance(pu, cloud.point(v)), kernel, cutoff_sq);
        values[u * n + v] = w;
        values[v * n + u] = w;
      }
    });
    return WeightMatrix(std::move(pattern), std::move(values), kernel);
  }

  // Sparse: collect the strict upper triangle per row, then mirror it.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> upper(n);
  parallel_for(n, threads, [&](std::size_t u) {
    const auto pu = cloud.point(u);
    auto& row = upper[u];
    for (std::size_t v = u + 1; v < n; ++v) {
      const double w = kernel_weight(squared_distance(pu, cloud.point(v)), kernel, cutoff_sq);
      if (w > 0.0) row.emplace_back(static_cast<std::uint32_t>(v), w);
    }
  });

  std::vector<std::size_t> lower_count(n, 0);
  for (const auto& row : upper)
    for (const auto& [v, w] : row) ++lower_count[v];

  auto pattern = std::make_shared<EdgePattern>();
  pattern->n = n;
  pattern->row_ptr.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u)
    pattern->row_ptr[u + 1] = pattern->row_ptr[u] + lower_count[u] + 1 + upper[u].size();
  const std::size_t nnz = pattern->row_ptr[n];
  pattern->cols.resize(nnz);
  pattern->transpose.resize(nnz);
  std::vector<double> values(nnz);

  // Rows are visited in increasing u, so the lower entries of every row
  // arrive already sorted by column.
  std::vector<std::size_t> lower_cursor(pattern->row_ptr.begin(), pattern->row_ptr.end() - 1);
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t diag = pattern->row_ptr[u] + lower_count[u];
    pattern->cols[diag] = static_cast<std::uint32_t>(u);
    pattern->transpose[diag] = diag;
    values[diag] = kernel_weight(0.0, kernel, cutoff_sq);
    std::size_t k = diag + 1;
    for (const auto& [v, w] : upper[u]) {
      const std::size_t mirror = lower_cursor[v]++;
      pattern->cols[k] = v;
      pattern->cols[mirror] = static_cast<std::uint32_t>(u);
      pattern->transpose[k] = mirror;
      pattern->transpose[mirror] = k;
      values[k] = w;
      values[mirror] = w;
      ++k;
    }
    upper[u].clear();
    upper[u].shrink_to_fit();
  }
  return WeightMatrix(std::move(pattern), std::move(values), kernel);
}

/// Vertex degrees d(u) = sum_v W(u,v).
class DegreeVector {
 public:
  explicit DegreeVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t u) const noexcept { return values_[u]; }
  std::span<const double> values() const noexcept { return values_; }

  void require_positive() const {
    for (std::size_t u = 0; u < values_.size(); ++u) {
      if (!(values_[u] > 0.0))
        throw Error("degree of vertex " + std::to_string(u) + " is not positive (" + std::to_string(values_[u]) + ")");
    }
  }

 private:
  std::vector<double> values_;
};

/// Row sums of W, accumulated left to right in column order.
inline DegreeVector degrees(const WeightMatrix& w, unsigned threads = 1) {
  const auto& p = w.pattern();
  const auto vals = w.values();
  std::vector<double> d(p.n, 0.0);
  parallel_for(p.n, threads, [&](std::size_t u) {
    double sum = 0.0;
    for (std::size_t k = p.row_ptr[u]; k < p.row_ptr[u + 1]; ++k) sum += vals[k];
    d[u] = sum;
  });
  return DegreeVector(std::move(d));
}

/// Degrees computed straight from the cloud without storing W: O(N) memory,
/// each unordered pair evaluated once. Every d(u) receives its terms in
/// increasing column order, so the result equals degrees(build_weights(...))
/// bit-for-bit.
inline DegreeVector streaming_degrees(const PointCloud& cloud, const KernelConfig& kernel) {
  kernel.validate();
  const std::size_t n = cloud.size();
  const std::size_t dim = cloud.ambient_dim();
  const double cutoff_sq = kernel.cutoff_squared();
  const double* xs = cloud.coords().data();
  std::vector<double> d(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    const std::span<const double> pu(xs + u * dim, dim);
    double du = d[u] + kernel_weight(0.0, kernel, cutoff_sq);
    for (std::size_t v = u + 1; v < n; ++v) {
      const double r2 = squared_distance(pu, std::span<const double>(xs + v * dim, dim));
      if (r2 > cutoff_sq) continue;
      const double w = kernel_weight(r2, kernel, cutoff_sq);
      du += w;
      d[v] += w;
    }
    d[u] = du;
  }
  return DegreeVector(std::move(d));
}

}  // namespace gcalc
