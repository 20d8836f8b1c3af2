#pragma once

// Exact-algebra identities of the discrete operators, evaluated numerically
// on a given graph. Each check reports its worst residual against a fixed
// tolerance; the verify command and the acceptance suite both run these.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graph_calculus/calculus.hpp"
#include "graph_calculus/rng.hpp"
#include "graph_calculus/weights.hpp"

namespace gcalc {

struct InvariantResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return std::isfinite(residual) && residual <= tolerance; }
};

inline VertexFunction random_vertex_function(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return VertexFunction(std::move(v));
}

/// A general (not antisymmetric) random field on the graph's edges.
inline EdgeField random_edge_field(const std::shared_ptr<const EdgePattern>& pattern, Rng& rng) {
  std::vector<double> v(pattern->nnz());
  for (double& x : v) x = rng.normal();
  return EdgeField(pattern, std::move(v));
}

inline PointCloud random_cube_cloud(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<double> coords(n * dim);
  for (double& x : coords) x = rng.uniform();
  return PointCloud(dim, std::move(coords));
}

/// Antisymmetry, adjointness, div(grad) = Delta as matrices, closed form vs
/// matrix product, null vector sqrt(d), Dirichlet identity and linearity.
inline std::vector<InvariantResult> check_operator_algebra(const WeightMatrix& w, Rng& rng) {
  const DegreeVector d = degrees(w);
  const std::size_t n = w.size();
  const auto& p = w.pattern();
  std::vector<InvariantResult> out;

  const VertexFunction f = random_vertex_function(n, rng);
  const VertexFunction g = random_vertex_function(n, rng);
  const EdgeField grad_f = gradient(f, w, d);

  {
    double worst = 0.0;
    const auto gv = grad_f.values();
    for (std::size_t k = 0; k < gv.size(); ++k) worst = std::max(worst, std::abs(gv[k] + gv[p.transpose[k]]));
    out.push_back({"gradient antisymmetry", worst, 1e-14});
  }

  {
    // <grad f, F>_E = -<f, div F>_V, relative to the sum of absolute terms.
    const EdgeField field = random_edge_field(w.shared_pattern(), rng);
    const VertexFunction div_field = divergence(field, w, d);
    const double lhs = inner_edge(grad_f, field);
    const double rhs = inner_vertex(f, div_field);
    double scale = 0.0;
    for (std::size_t k = 0; k < p.nnz(); ++k) scale += std::abs(grad_f.values()[k] * field.values()[k]);
    for (std::size_t u = 0; u < n; ++u) scale += std::abs(f[u] * div_field[u]);
    out.push_back({"adjointness <grad f,F> = -<f,div F>", scale > 0.0 ? std::abs(lhs + rhs) / scale : std::abs(lhs + rhs),
                   1e-10});
  }

  const Eigen::MatrixXd lap = laplacian_matrix(w, d);
  {
    double worst = 0.0;
    std::vector<double> basis(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      basis[j] = 1.0;
      const VertexFunction col = divergence(gradient(VertexFunction(basis), w, d), w, d);
      basis[j] = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(col[i] - lap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    out.push_back({"div(grad) matrix = D^-1/2 W D^-1/2 - Id", worst, 1e-12});
  }

  {
    const VertexFunction lap_f = laplacian_apply(f, w, d);
    const Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd mf = lap * fv;
    double worst = 0.0, scale = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      worst = std::max(worst, std::abs(lap_f[u] - mf(static_cast<Eigen::Index>(u))));
      scale = std::max(scale, std::abs(mf(static_cast<Eigen::Index>(u))));
    }
    out.push_back({"closed-form Laplacian = matrix product", scale > 0.0 ? worst / scale : worst, 1e-12});
  }

  {
    std::vector<double> sqrt_d(n);
    for (std::size_t u = 0; u < n; ++u) sqrt_d[u] = std::sqrt(d[u]);
    const VertexFunction r = laplacian_apply(VertexFunction(sqrt_d), w, d);
    double worst = 0.0;
    for (std::size_t u = 0; u < n; ++u) worst = std::max(worst, std::abs(r[u]));
    out.push_back({"null vector Delta sqrt(d) = 0", worst, 1e-12});
  }

  {
    const double energy = inner_edge(grad_f, grad_f);
    const double quad = -inner_vertex(f, laplacian_apply(f, w, d));
    const double scale = std::max(std::abs(energy), std::abs(quad));
    out.push_back({"Dirichlet identity |grad f|^2_E = <f, L f>", scale > 0.0 ? std::abs(energy - quad) / scale : 0.0,
                   1e-10});
  }

  {
    const double a = 1.7, b = -0.3;
    std::vector<double> combo(n);
    for (std::size_t u = 0; u < n; ++u) combo[u] = a * f[u] + b * g[u];
    const VertexFunction h(combo);
    const VertexFunction lh = laplacian_apply(h, w, d), lf = laplacian_apply(f, w, d), lg = laplacian_apply(g, w, d);
    const EdgeField gh = gradient(h, w, d), gg = gradient(g, w, d);
    const VertexFunction dh = divergence(gh, w, d), df = divergence(grad_f, w, d), dg = divergence(gg, w, d);
    double worst = 0.0, scale = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      worst = std::max(worst, std::abs(lh[u] - (a * lf[u] + b * lg[u])));
      worst = std::max(worst, std::abs(dh[u] - (a * df[u] + b * dg[u])));
      scale = std::max({scale, std::abs(lh[u]), std::abs(dh[u])});
    }
    for (std::size_t k = 0; k < p.nnz(); ++k) {
      worst = std::max(worst, std::abs(gh.values()[k] - (a * grad_f.values()[k] + b * gg.values()[k])));
      scale = std::max(scale, std::abs(gh.values()[k]));
    }
    out.push_back({"linearity of grad, div, Delta", worst / scale, 1e-12});
  }
  return out;
}

/// Spectrum of L = Id - D^-1/2 W D^-1/2: inside [0, 2], a zero eigenvalue,
/// and its eigenvector parallel to D^{1/2} 1.
inline std::vector<InvariantResult> check_spectrum(const WeightMatrix& w) {
  const DegreeVector d = degrees(w);
  const std::size_t n = w.size();
  const Eigen::MatrixXd l = normalized_laplacian_matrix(w, d);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) return {{"eigen-decomposition converged", 1.0, 0.0}};
  const auto& ev = solver.eigenvalues();  // ascending
  const double lo = ev(0), hi = ev(static_cast<Eigen::Index>(n) - 1);
  const double range_violation = std::max({0.0, -lo, hi - 2.0});

  Eigen::VectorXd sqrt_d(static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < n; ++u) sqrt_d(static_cast<Eigen::Index>(u)) = std::sqrt(d[u]);
  const Eigen::VectorXd v0 = solver.eigenvectors().col(0);
  const double cosine = std::abs(v0.dot(sqrt_d)) / (v0.norm() * sqrt_d.norm());

  return {
      {"spectrum of L within [0, 2]", range_violation, 1e-10},
      {"smallest eigenvalue of L is 0", std::abs(lo), 1e-10},
      {"null eigenvector parallel to D^1/2 1 (1 - cosine)", 1.0 - cosine, 1e-10},
  };
}

struct VerifyOptions {
  std::size_t n = 100;
  std::size_t seeds = 5;
  std::size_t ambient_dim = 3;
  double epsilon = 0.25;
  std::uint64_t master_seed = 0x6a09e667f3bcc908ULL;
  /// Test hook: scale W(0,1) without touching W(1,0).
  bool inject_asymmetry = false;
};

/// Worst residual of every invariant over `seeds` random clouds in the unit cube.
inline std::vector<InvariantResult> run_verify(const VerifyOptions& opt) {
  std::vector<InvariantResult> worst;
  for (std::size_t s = 0; s < opt.seeds; ++s) {
    Rng rng(derive_seed(opt.master_seed, {s}));
    const PointCloud cloud = random_cube_cloud(opt.n, opt.ambient_dim, rng);
    WeightMatrix w = build_weights(cloud, {opt.epsilon, 0.0});
    if (opt.inject_asymmetry) w.corrupt_entry_for_testing(0, 1, 1.5 * w(0, 1) + 0.1);
    auto results = check_operator_algebra(w, rng);
    const auto spectral = check_spectrum(w);
    results.insert(results.end(), spectral.begin(), spectral.end());
    if (worst.empty()) {
      worst = results;
      continue;
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
      const double r = results[i].residual;
      if (!std::isfinite(r) || r > worst[i].residual) worst[i].residual = r;
    }
  }
  return worst;
}

}  // namespace gcalc
