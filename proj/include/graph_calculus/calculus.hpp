#pragma once

// Discrete calculus on a weighted graph: edge derivative / gradient,
// divergence (its negative adjoint), the normalized graph Laplacian and the
// vertex / edge inner products.
//
// Conventions:
//  - The edge set is every ordered pair stored in the weight pattern,
//    self-loops included, so each unordered edge is counted twice in edge sums.
//  - laplacian_apply / laplacian_matrix use Delta = D^{-1/2} W D^{-1/2} - Id,
//    which is negative semidefinite. The positive semidefinite
//    L = Id - D^{-1/2} W D^{-1/2} is available as normalized_laplacian_*.
//  - The gradient of a constant is NOT zero unless all degrees are equal:
//    grad c (u,v) = c (sqrt(w/2d(v)) - sqrt(w/2d(u))).

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "graph_calculus/error.hpp"
#include "graph_calculus/parallel.hpp"
#include "graph_calculus/weights.hpp"

namespace gcalc {

/// f : V -> R, one finite value per vertex.
class VertexFunction {
 public:
  VertexFunction() = default;
  explicit VertexFunction(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]))
        throw Error("vertex function: non-finite value at vertex " + std::to_string(i));
    }
  }
  static VertexFunction zeros(std::size_t n) { return VertexFunction(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t u) const noexcept { return values_[u]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// F : E -> R on the ordered edges of a weight pattern. F(u,v) and F(v,u) are
/// independent values; only gradients are antisymmetric.
class EdgeField {
 public:
  EdgeField(std::shared_ptr<const EdgePattern> pattern, std::vector<double> values)
      : pattern_(std::move(pattern)), values_(std::move(values)) {
    if (!pattern_ || values_.size() != pattern_->nnz())
      throw Error("edge field: value count does not match the edge pattern");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) throw Error("edge field: non-finite value at entry " + std::to_string(k));
    }
  }

  static EdgeField zeros(std::shared_ptr<const EdgePattern> pattern) {
    const std::size_t nnz = pattern->nnz();
    return EdgeField(std::move(pattern), std::vector<double>(nnz, 0.0));
  }

  /// Maps a row-major N x N matrix onto the pattern. Nonzero entries on
  /// pairs outside the pattern (truncated edges) are rejected.
  static EdgeField from_dense(std::shared_ptr<const EdgePattern> pattern, std::span<const double> dense) {
    const std::size_t n = pattern->n;
    if (dense.size() != n * n)
      throw Error("edge field: expected " + std::to_string(n) + "x" + std::to_string(n) + " matrix, got " +
                  std::to_string(dense.size()) + " values");
    std::vector<double> values(pattern->nnz(), 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        const double x = dense[u * n + v];
        const std::size_t k = pattern->find(u, v);
        if (k == EdgePattern::npos) {
          if (x != 0.0)
            throw Error("edge field: nonzero value on (" + std::to_string(u) + "," + std::to_string(v) +
                        ") which is not an edge of the graph");
          continue;
        }
        values[k] = x;
      }
    }
    return EdgeField(std::move(pattern), std::move(values));
  }

  std::size_t size() const noexcept { return pattern_->n; }
  const EdgePattern& pattern() const noexcept { return *pattern_; }
  const std::shared_ptr<const EdgePattern>& shared_pattern() const noexcept { return pattern_; }
  std::span<const double> values() const noexcept { return values_; }

  double operator()(std::size_t u, std::size_t v) const noexcept {
    const std::size_t k = pattern_->find(u, v);
    return k == EdgePattern::npos ? 0.0 : values_[k];
  }

  std::vector<double> to_dense() const {
    const std::size_t n = pattern_->n;
    std::vector<double> dense(n * n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t k = pattern_->row_ptr[u]; k < pattern_->row_ptr[u + 1]; ++k)
        dense[u * n + pattern_->cols[k]] = values_[k];
    return dense;
  }

 private:
  std::shared_ptr<const EdgePattern> pattern_;
  std::vector<double> values_;
};

namespace detail {

inline void require_graph(const WeightMatrix& w, const DegreeVector& d) {
  if (d.size() != w.size())
    throw Error("degree vector has " + std::to_string(d.size()) + " entries, graph has " + std::to_string(w.size()));
}

inline void require_vertex(const VertexFunction& f, std::size_t n, const char* what) {
  if (f.size() != n)
    throw Error(std::string(what) + ": function has " + std::to_string(f.size()) + " values, graph has " +
                std::to_string(n) + " vertices");
}

inline void require_pattern(const EdgeField& f, const WeightMatrix& w, const char* what) {
  if (f.shared_pattern() != w.shared_pattern() && !f.pattern().same_structure(w.pattern()))
    throw Error(std::string(what) + ": edge field is not defined on this graph");
}

}  // namespace detail

/// grad f (u,v) = sqrt(w(u,v) / 2d(v)) f(v) - sqrt(w(u,v) / 2d(u)) f(u).
/// Antisymmetric bit-for-bit, zero on self-loops.
inline EdgeField gradient(const VertexFunction& f, const WeightMatrix& w, const DegreeVector& d, unsigned threads = 1) {
  detail::require_graph(w, d);
  detail::require_vertex(f, w.size(), "gradient");
  d.require_positive();
  const auto& p = w.pattern();
  const auto wv = w.values();
  std::vector<double> g(p.nnz());
  parallel_for(p.n, threads, [&](std::size_t u) {
    for (std::size_t k = p.row_ptr[u]; k < p.row_ptr[u + 1]; ++k) {
      const std::size_t v = p.cols[k];
      g[k] = std::sqrt(wv[k] / (2.0 * d[v])) * f[v] - std::sqrt(wv[k] / (2.0 * d[u])) * f[u];
    }
  });
  return EdgeField(w.shared_pattern(), std::move(g));
}

/// |grad f(u)| = sqrt(sum_v G(u,v)^2).
inline double gradient_norm_at(const EdgeField& g, std::size_t u) {
  if (u >= g.size()) throw Error("gradient_norm_at: vertex " + std::to_string(u) + " out of range");
  const auto& p = g.pattern();
  const auto vals = g.values();
  double sum = 0.0;
  for (std::size_t k = p.row_ptr[u]; k < p.row_ptr[u + 1]; ++k) sum += vals[k] * vals[k];
  return std::sqrt(sum);
}

/// div F (u) = sum_v sqrt(w(u,v) / 2d(u)) (F(u,v) - F(v,u)).
inline VertexFunction divergence(const EdgeField& f, const WeightMatrix& w, const DegreeVector& d,
                                 unsigned threads = 1) {
  detail::require_graph(w, d);
  detail::require_pattern(f, w, "divergence");
  d.require_positive();
  const auto& p = w.pattern();
  const auto wv = w.values();
  const auto fv = f.values();
  std::vector<double> out(p.n);
  parallel_for(p.n, threads, [&](std::size_t u) {
    double sum = 0.0;
    for (std::size_t k = p.row_ptr[u]; k < p.row_ptr[u + 1]; ++k)
      sum += std::sqrt(wv[k] / (2.0 * d[u])) * (fv[k] - fv[p.transpose[k]]);
    out[u] = sum;
  });
  return VertexFunction(std::move(out));
}

/// Delta f (u) = sum_v w(u,v) / sqrt(d(u) d(v)) f(v) - f(u), evaluated from
/// the closed form (the self-loop term included), not as div(grad f).
inline VertexFunction laplacian_apply(const VertexFunction& f, const WeightMatrix& w, const DegreeVector& d,
                                      unsigned threads = 1) {
  detail::require_graph(w, d);
  detail::require_vertex(f, w.size(), "laplacian");
  d.require_positive();
  const auto& p = w.pattern();
  const auto wv = w.values();
  std::vector<double> out(p.n);
  parallel_for(p.n, threads, [&](std::size_t u) {
    double sum = 0.0;
    for (std::size_t k = p.row_ptr[u]; k < p.row_ptr[u + 1]; ++k) {
      const std::size_t v = p.cols[k];
      sum += wv[k] / std::sqrt(d[u] * d[v]) * f[v];
    }
    out[u] = sum - f[u];
  });
  return VertexFunction(std::move(out));
}

/// L f = -Delta f.
inline VertexFunction normalized_laplacian_apply(const VertexFunction& f, const WeightMatrix& w,
                                                 const DegreeVector& d, unsigned threads = 1) {
  const auto lap = laplacian_apply(f, w, d, threads);
  std::vector<double> out(lap.values().begin(), lap.values().end());
  for (double& x : out) x = -x;
  return VertexFunction(std::move(out));
}

/// Dense D^{-1/2} W D^{-1/2} - Id. Exactly symmetric.
inline Eigen::MatrixXd laplacian_matrix(const WeightMatrix& w, const DegreeVector& d) {
  detail::require_graph(w, d);
  d.require_positive();
  const auto& p = w.pattern();
  const auto wv = w.values();
  const auto n = static_cast<Eigen::Index>(p.n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t u = 0; u < p.n; ++u) {
    for (std::size_t k = p.row_ptr[u]; k < p.row_ptr[u + 1]; ++k) {
      const std::size_t v = p.cols[k];
      m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = wv[k] / std::sqrt(d[u] * d[v]);
    }
  }
  m.diagonal().array() -= 1.0;
  return m;
}

/// Id - D^{-1/2} W D^{-1/2}, spectrum in [0, 2].
inline Eigen::MatrixXd normalized_laplacian_matrix(const WeightMatrix& w, const DegreeVector& d) {
  return -laplacian_matrix(w, d);
}

/// <f, g> = sum_u f(u) g(u).
inline double inner_vertex(const VertexFunction& f, const VertexFunction& g) {
  if (f.size() != g.size())
    throw Error("inner_vertex: length mismatch (" + std::to_string(f.size()) + " vs " + std::to_string(g.size()) + ")");
  double sum = 0.0;
  for (std::size_t u = 0; u < f.size(); ++u) sum += f[u] * g[u];
  return sum;
}

/// <F, G> = sum over ordered edges (u,v) and (v,u) separately.
inline double inner_edge(const EdgeField& f, const EdgeField& g) {
  if (f.shared_pattern() != g.shared_pattern() && !f.pattern().same_structure(g.pattern()))
    throw Error("inner_edge: fields live on different graphs");
  const auto a = f.values();
  const auto b = g.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

}  // namespace gcalc
