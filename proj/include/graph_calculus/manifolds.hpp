#pragma once

// Closed compact manifolds with uniform samplers and analytic ground truth:
// test functions together with their Laplace-Beltrami images (div grad sign
// convention, so eigenvalues are <= 0), volume and scalar curvature.
//
//   circle  S^1 in R^2                                    m = 1, vol = 2 pi,   S = 0
//   sphere  S^2 in R^3                                    m = 2, vol = 4 pi,   S = 2
//   torus   (cos t, sin t, cos p, sin p) in R^4 (flat)    m = 2, vol = 4 pi^2, S = 0
//
// The registry is closed; adding a manifold or a test function is a code change.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graph_calculus/calculus.hpp"
#include "graph_calculus/error.hpp"
#include "graph_calculus/point_cloud.hpp"
#include "graph_calculus/rng.hpp"

namespace gcalc {

struct TestFunction {
  std::string id;
  std::string formula;  // human-readable f and its Laplace-Beltrami image
  double (*eval)(std::span<const double>);
  double (*laplace_beltrami)(std::span<const double>);
};

class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual std::string_view id() const noexcept = 0;
  virtual std::size_t intrinsic_dim() const noexcept = 0;
  virtual std::size_t ambient_dim() const noexcept = 0;
  virtual double volume() const noexcept = 0;
  virtual double scalar_curvature(std::span<const double> point) const noexcept = 0;

  /// The curvature term of the degree expansion, S(u) / 3.
  double curvature_term(std::span<const double> point) const noexcept { return scalar_curvature(point) / 3.0; }

  /// Draws one point uniformly w.r.t. the Riemannian volume.
  virtual void sample_point(Rng& rng, std::span<double> out) const = 0;

  /// Deterministic near-uniform point set with about `n` points.
  virtual PointCloud grid(std::size_t n) const = 0;

  /// Distance-like measure of how far `point` is from the manifold.
  virtual double residual(std::span<const double> point) const noexcept = 0;

  /// A fixed reference point, used to pin one vertex in Monte Carlo studies.
  virtual std::vector<double> anchor() const = 0;

  const std::vector<TestFunction>& functions() const noexcept { return functions_; }

  const TestFunction& function(std::string_view fn_id) const {
    for (const auto& f : functions_)
      if (f.id == fn_id) return f;
    std::string valid;
    for (const auto& f : functions_) valid += (valid.empty() ? "" : ", ") + f.id;
    throw ConfigError("unknown function '" + std::string(fn_id) + "' for manifold '" + std::string(id()) +
                      "'; valid ids: " + valid);
  }

 protected:
  std::vector<TestFunction> functions_;
};

namespace detail {

inline double norm(std::span<const double> p) noexcept {
  double s = 0.0;
  for (const double x : p) s += x * x;
  return std::sqrt(s);
}

inline double constant_one(std::span<const double>) { return 1.0; }
inline double constant_zero(std::span<const double>) { return 0.0; }

}  // namespace detail

class Circle final : public Manifold {
 public:
  Circle() {
    functions_ = {
        {"sin_theta", "f = sin(t), LB f = -sin(t)", [](std::span<const double> p) { return p[1]; },
         [](std::span<const double> p) { return -p[1]; }},
        {"cos_2theta", "f = cos(2t), LB f = -4 cos(2t)", [](std::span<const double> p) { return p[0] * p[0] - p[1] * p[1]; },
         [](std::span<const double> p) { return -4.0 * (p[0] * p[0] - p[1] * p[1]); }},
        {"sin_3theta", "f = sin(3t), LB f = -9 sin(3t)",
         [](std::span<const double> p) { return 3.0 * p[1] - 4.0 * p[1] * p[1] * p[1]; },
         [](std::span<const double> p) { return -9.0 * (3.0 * p[1] - 4.0 * p[1] * p[1] * p[1]); }},
        {"constant", "f = 1, LB f = 0", detail::constant_one, detail::constant_zero},
    };
  }

  std::string_view id() const noexcept override { return "circle"; }
  std::size_t intrinsic_dim() const noexcept override { return 1; }
  std::size_t ambient_dim() const noexcept override { return 2; }
  double volume() const noexcept override { return 2.0 * std::numbers::pi; }
  // The Riemann tensor of a 1-manifold vanishes.
  double scalar_curvature(std::span<const double>) const noexcept override { return 0.0; }

  void sample_point(Rng& rng, std::span<double> out) const override {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    out[0] = std::cos(t);
    out[1] = std::sin(t);
  }

  PointCloud grid(std::size_t n) const override {
    std::vector<double> coords(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      coords[2 * i] = std::cos(t);
      coords[2 * i + 1] = std::sin(t);
    }
    return PointCloud(2, std::move(coords));
  }

  double residual(std::span<const double> p) const noexcept override { return std::abs(detail::norm(p) - 1.0); }
  std::vector<double> anchor() const override { return {0.0, 1.0}; }
};

class Sphere final : public Manifold {
 public:
  Sphere() {
    functions_ = {
        {"z", "f = z, LB f = -2 z", [](std::span<const double> p) { return p[2]; },
         [](std::span<const double> p) { return -2.0 * p[2]; }},
        {"xy", "f = x y, LB f = -6 x y", [](std::span<const double> p) { return p[0] * p[1]; },
         [](std::span<const double> p) { return -6.0 * p[0] * p[1]; }},
        {"constant", "f = 1, LB f = 0", detail::constant_one, detail::constant_zero},
    };
  }

  std::string_view id() const noexcept override { return "sphere"; }
  std::size_t intrinsic_dim() const noexcept override { return 2; }
  std::size_t ambient_dim() const noexcept override { return 3; }
  double volume() const noexcept override { return 4.0 * std::numbers::pi; }
  double scalar_curvature(std::span<const double>) const noexcept override { return 2.0; }

  // Normalized standard Gaussian vector.
  void sample_point(Rng& rng, std::span<double> out) const override {
    double r = 0.0;
    do {
      out[0] = rng.normal();
      out[1] = rng.normal();
      out[2] = rng.normal();
      r = detail::norm(out);
    } while (r < 1e-12);
    for (double& x : out) x /= r;
  }

  // Fibonacci lattice: equal-area bands in z, golden-angle steps in longitude.
  PointCloud grid(std::size_t n) const override {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<double> coords(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
      const double rho = std::sqrt(1.0 - z * z);
      const double phi = golden * static_cast<double>(i);
      coords[3 * i] = rho * std::cos(phi);
      coords[3 * i + 1] = rho * std::sin(phi);
      coords[3 * i + 2] = z;
    }
    return PointCloud(3, std::move(coords));
  }

  double residual(std::span<const double> p) const noexcept override { return std::abs(detail::norm(p) - 1.0); }
  std::vector<double> anchor() const override { return {0.0, 0.0, 1.0}; }
};

class FlatTorus final : public Manifold {
 public:
  FlatTorus() {
    functions_ = {
        {"sin_theta", "f = sin(t), LB f = -sin(t)", [](std::span<const double> p) { return p[1]; },
         [](std::span<const double> p) { return -p[1]; }},
        {"cos_theta_cos_phi", "f = cos(t) cos(p), LB f = -2 cos(t) cos(p)",
         [](std::span<const double> p) { return p[0] * p[2]; },
         [](std::span<const double> p) { return -2.0 * p[0] * p[2]; }},
        {"sin_2phi", "f = sin(2p), LB f = -4 sin(2p)", [](std::span<const double> p) { return 2.0 * p[3] * p[2]; },
         [](std::span<const double> p) { return -8.0 * p[3] * p[2]; }},
        {"constant", "f = 1, LB f = 0", detail::constant_one, detail::constant_zero},
    };
  }

  std::string_view id() const noexcept override { return "torus"; }
  std::size_t intrinsic_dim() const noexcept override { return 2; }
  std::size_t ambient_dim() const noexcept override { return 4; }
  double volume() const noexcept override { return 4.0 * std::numbers::pi * std::numbers::pi; }
  double scalar_curvature(std::span<const double>) const noexcept override { return 0.0; }

  void sample_point(Rng& rng, std::span<double> out) const override {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    const double p = 2.0 * std::numbers::pi * rng.uniform();
    out[0] = std::cos(t);
    out[1] = std::sin(t);
    out[2] = std::cos(p);
    out[3] = std::sin(p);
  }

  /// k x k parameter grid with k = ceil(sqrt(n)).
  PointCloud grid(std::size_t n) const override {
    std::size_t k = 1;
    while (k * k < n) ++k;
    std::vector<double> coords;
    coords.reserve(4 * k * k);
    for (std::size_t i = 0; i < k; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
      for (std::size_t j = 0; j < k; ++j) {
        const double p = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(k);
        coords.insert(coords.end(), {std::cos(t), std::sin(t), std::cos(p), std::sin(p)});
      }
    }
    return PointCloud(4, std::move(coords));
  }

  double residual(std::span<const double> p) const noexcept override {
    const double a = std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1]) - 1.0);
    const double b = std::abs(std::sqrt(p[2] * p[2] + p[3] * p[3]) - 1.0);
    return a > b ? a : b;
  }
  std::vector<double> anchor() const override { return {0.0, 1.0, 1.0, 0.0}; }
};

inline const std::vector<const Manifold*>& manifold_registry() {
  static const Circle circle;
  static const Sphere sphere;
  static const FlatTorus torus;
  static const std::vector<const Manifold*> all{&circle, &sphere, &torus};
  return all;
}

inline const Manifold& find_manifold(std::string_view id) {
  for (const Manifold* m : manifold_registry())
    if (m->id() == id) return *m;
  std::string valid;
  for (const Manifold* m : manifold_registry()) valid += (valid.empty() ? "" : ", ") + std::string(m->id());
  throw ConfigError("unknown manifold '" + std::string(id) + "'; valid ids: " + valid);
}

/// N i.i.d. uniform points; identical (manifold, N, seed) give identical clouds.
inline PointCloud sample(const Manifold& manifold, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error("sample: need N >= 2, got " + std::to_string(n));
  const std::size_t dim = manifold.ambient_dim();
  std::vector<double> coords(n * dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) manifold.sample_point(rng, std::span<double>(coords.data() + i * dim, dim));
  return PointCloud(dim, std::move(coords));
}

inline PointCloud grid_sample(const Manifold& manifold, std::size_t n) {
  if (n < 2) throw Error("grid_sample: need N >= 2, got " + std::to_string(n));
  return manifold.grid(n);
}

struct FunctionPair {
  VertexFunction f;
  VertexFunction laplace_beltrami;
};

/// Evaluates a registered test function and its Laplace-Beltrami image on every point.
inline FunctionPair eval_pair(const Manifold& manifold, std::string_view fn_id, const PointCloud& cloud) {
  const TestFunction& fn = manifold.function(fn_id);
  if (cloud.ambient_dim() != manifold.ambient_dim())
    throw Error("eval_pair: cloud lives in R^" + std::to_string(cloud.ambient_dim()) + " but " +
                std::string(manifold.id()) + " is embedded in R^" + std::to_string(manifold.ambient_dim()));
  std::vector<double> f(cloud.size()), lb(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    f[i] = fn.eval(cloud.point(i));
    lb[i] = fn.laplace_beltrami(cloud.point(i));
  }
  return {VertexFunction(std::move(f)), VertexFunction(std::move(lb))};
}

}  // namespace gcalc
