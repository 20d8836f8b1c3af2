#pragma once

// Empirical checks of the graph Laplacian -> Laplace-Beltrami limit.
//
// For a manifold M of dimension m sampled with N points and kernel width eps,
// the pointwise estimator
//     Lhat f(u) = (2 / eps) * Delta f(u)
// approaches Delta_M f(u) with an error made of a kernel bias (controlled by
// eps) and a finite-sample term of relative size
//     vol(M) / ((N - 1) (2 pi eps)^{m/2}),
// which is also the weight of the self-loop in d(u). The same normalization
// gives the degree ratio
//     r(u) = d(u) vol(M) / ((N - 1) (2 pi eps)^{m/2})  ~  1 + eps S(u) / 6.
//
// Grid sampling removes the Monte Carlo noise and isolates the bias; random
// sampling with many seeds measures the fluctuation.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "graph_calculus/calculus.hpp"
#include "graph_calculus/error.hpp"
#include "graph_calculus/manifolds.hpp"
#include "graph_calculus/parallel.hpp"
#include "graph_calculus/rng.hpp"
#include "graph_calculus/weights.hpp"

namespace gcalc {

/// Largest cloud for which a dense (complete) weight matrix is built.
inline constexpr std::size_t kMaxDenseVertices = 4096;

enum class Sampling { random, grid };
enum class InteriorStatistic { median, mean, max };
enum class Regime { bias, self_loop_floor, undersampled };

inline std::string_view to_string(Sampling s) noexcept { return s == Sampling::grid ? "grid" : "random"; }

inline std::string_view to_string(InteriorStatistic s) noexcept {
  switch (s) {
    case InteriorStatistic::median: return "median";
    case InteriorStatistic::mean: return "mean";
    case InteriorStatistic::max: return "max";
  }
  return "median";
}

inline std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::bias: return "bias";
    case Regime::self_loop_floor: return "self_loop_floor";
    case Regime::undersampled: return "undersampled";
  }
  return "bias";
}

inline Sampling parse_sampling(std::string_view s) {
  if (s == "random") return Sampling::random;
  if (s == "grid") return Sampling::grid;
  throw ConfigError("unknown sampling '" + std::string(s) + "'; expected random or grid");
}

inline InteriorStatistic parse_statistic(std::string_view s) {
  if (s == "median") return InteriorStatistic::median;
  if (s == "mean") return InteriorStatistic::mean;
  if (s == "max") return InteriorStatistic::max;
  throw ConfigError("unknown interior statistic '" + std::string(s) + "'; expected median, mean or max");
}

/// dense: complete graph (tau = 0). sparse: weights below tau dropped.
struct GraphMode {
  bool sparse = false;
  double tau = 0.0;

  static GraphMode dense() { return {}; }
  static GraphMode sparse_with(double tau) { return {true, tau}; }

  void validate() const {
    if (sparse && !(tau > 0.0 && tau < 1.0))
      throw ConfigError("sparse mode needs 0 < tau < 1, got " + std::to_string(tau));
  }
  KernelConfig kernel(double epsilon) const { return {epsilon, sparse ? tau : 0.0}; }
  std::string name() const { return sparse ? "sparse" : "dense"; }
};

/// Sample used by every experiment. Random clouds pin vertex 0 at the
/// manifold's anchor point so per-vertex statistics at vertex 0 can be
/// compared across seeds; the other N - 1 points are i.i.d. uniform.
inline PointCloud experiment_cloud(const Manifold& manifold, std::size_t n, std::uint64_t seed, Sampling sampling) {
  if (sampling == Sampling::grid) return grid_sample(manifold, n);
  const PointCloud iid = sample(manifold, n, seed);
  std::vector<double> coords = iid.coords();
  const auto anchor = manifold.anchor();
  std::copy(anchor.begin(), anchor.end(), coords.begin());
  return PointCloud(iid.ambient_dim(), std::move(coords));
}

/// Expected number of kernel-weighted neighbours, (N - 1)(2 pi eps)^{m/2} / vol(M).
inline double expected_neighbors(const Manifold& manifold, std::size_t n, double epsilon) {
  const double m = static_cast<double>(manifold.intrinsic_dim());
  return static_cast<double>(n - 1) * std::pow(2.0 * std::numbers::pi * epsilon, m / 2.0) / manifold.volume();
}

struct LemmaCheck {
  std::size_t n_points = 0;
  double epsilon = 0.0;
  std::vector<double> estimator;  // (2/eps) Delta f per vertex
  std::vector<double> truth;      // Delta_M f per vertex
  std::vector<double> error;      // estimator - truth
  double err_abs_median = 0.0;
  double err_abs_mean = 0.0;
  double err_abs_max = 0.0;
  double err_rel_median = 0.0;
  double normalizer = 1.0;  // max |Delta_M f| over the cloud (1 if that is 0)
  double anchor_estimate = 0.0;
  double anchor_truth = 0.0;
  double expected_neighbors = 0.0;
  double self_loop_floor = 0.0;
  Regime regime = Regime::bias;
  std::vector<std::string> warnings;

  double statistic(InteriorStatistic s) const noexcept {
    switch (s) {
      case InteriorStatistic::median: return err_abs_median;
      case InteriorStatistic::mean: return err_abs_mean;
      case InteriorStatistic::max: return err_abs_max;
    }
    return err_abs_median;
  }
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v, double mu) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (const double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Compares (2/eps) Delta f with Delta_M f on an already built graph.
inline LemmaCheck lemma_check_on(const Manifold& manifold, std::string_view fn_id, const PointCloud& cloud,
                                 const WeightMatrix& w, const DegreeVector& d, Sampling sampling,
                                 unsigned threads = 1) {
  const auto [f, truth] = eval_pair(manifold, fn_id, cloud);
  const double eps = w.epsilon();
  const auto lap = laplacian_apply(f, w, d, threads);
  const std::size_t n = cloud.size();

  LemmaCheck out;
  out.n_points = n;
  out.epsilon = eps;
  out.estimator.resize(n);
  out.truth.assign(truth.values().begin(), truth.values().end());
  out.error.resize(n);
  std::vector<double> abs_err(n);
  double max_truth = 0.0, max_f = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    out.estimator[u] = (2.0 / eps) * lap[u];
    out.error[u] = out.estimator[u] - truth[u];
    abs_err[u] = std::abs(out.error[u]);
    max_truth = std::max(max_truth, std::abs(truth[u]));
    max_f = std::max(max_f, std::abs(f[u]));
  }
  out.normalizer = max_truth > 0.0 ? max_truth : 1.0;
  out.err_abs_max = *std::max_element(abs_err.begin(), abs_err.end());
  out.err_abs_mean = detail::mean(abs_err);
  out.err_abs_median = detail::median(abs_err);
  out.err_rel_median = out.err_abs_median / out.normalizer;
  out.anchor_estimate = out.estimator[0];
  out.anchor_truth = truth[0];

  out.expected_neighbors = expected_neighbors(manifold, n, eps);
  out.self_loop_floor = 2.0 * max_f / (out.expected_neighbors * eps);
  if (out.expected_neighbors < 1.0) {
    out.warnings.push_back("kernel sees fewer than one neighbour on average ((N-1)(2 pi eps)^{m/2}/vol = " +
                           std::to_string(out.expected_neighbors) + "); decrease N or increase eps");
  }
  const double m = static_cast<double>(manifold.intrinsic_dim());
  if (sampling == Sampling::grid) {
    const double spacing = std::pow(manifold.volume() / static_cast<double>(n), 1.0 / m);
    out.regime = spacing > std::sqrt(eps) ? Regime::undersampled : Regime::bias;
  } else if (out.expected_neighbors < 1.0) {
    out.regime = Regime::undersampled;
  } else {
    out.regime = out.self_loop_floor > std::sqrt(eps) ? Regime::self_loop_floor : Regime::bias;
  }
  return out;
}

inline void require_dense_limit(std::size_t n, const GraphMode& mode) {
  if (!mode.sparse && n > kMaxDenseVertices)
    throw Error("dense mode is limited to N <= " + std::to_string(kMaxDenseVertices) + " (got " + std::to_string(n) +
                "); use sparse mode with tau > 0");
}

inline LemmaCheck lemma_check(const Manifold& manifold, std::string_view fn_id, std::size_t n, double epsilon,
                              std::uint64_t seed, const GraphMode& mode, Sampling sampling = Sampling::random,
                              unsigned threads = 1) {
  mode.validate();
  manifold.function(fn_id);
  const PointCloud cloud = experiment_cloud(manifold, n, seed, sampling);
  require_dense_limit(cloud.size(), mode);
  const WeightMatrix w = build_weights(cloud, mode.kernel(epsilon), threads);
  const DegreeVector d = degrees(w, threads);
  return lemma_check_on(manifold, fn_id, cloud, w, d, sampling, threads);
}

struct DegreeCheck {
  std::size_t n_points = 0;
  double epsilon = 0.0;
  double ratio_mean = 0.0;      // mean of r(u)
  double ratio_std = 0.0;       // spread of r(u) over vertices
  double predicted_mean = 0.0;  // mean of 1 + eps S(u) / 6
  double residual_mean = 0.0;   // mean of r(u) - (1 + eps S(u) / 6)
  double residual_dev = 0.0;    // standard deviation of that residual
  double self_loop_term = 0.0;  // contribution of W(u,u) = 1 to r(u)
  bool self_loop_dominated = false;
};

inline DegreeCheck degree_stats(const Manifold& manifold, const PointCloud& cloud, const DegreeVector& d,
                                double epsilon) {
  const std::size_t n = cloud.size();
  if (d.size() != n) throw Error("degree_stats: degree vector does not match the cloud");
  const double scale = 1.0 / expected_neighbors(manifold, n, epsilon);
  std::vector<double> ratio(n), residual(n);
  double predicted = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    ratio[u] = d[u] * scale;
    const double p = 1.0 + 0.5 * epsilon * manifold.curvature_term(cloud.point(u));
    residual[u] = ratio[u] - p;
    predicted += p;
  }
  DegreeCheck out;
  out.n_points = n;
  out.epsilon = epsilon;
  out.ratio_mean = detail::mean(ratio);
  out.ratio_std = detail::stddev(ratio, out.ratio_mean);
  out.predicted_mean = predicted / static_cast<double>(n);
  out.residual_mean = detail::mean(residual);
  out.residual_dev = detail::stddev(residual, out.residual_mean);
  out.self_loop_term = scale;
  out.self_loop_dominated = scale > std::abs(out.predicted_mean - 1.0);
  return out;
}

/// Degree asymptotics on a fresh sample. Degrees are streamed from the cloud,
/// so memory stays O(N) even for large N.
inline DegreeCheck degree_check(const Manifold& manifold, std::size_t n, double epsilon, std::uint64_t seed,
                                const GraphMode& mode, Sampling sampling = Sampling::random) {
  mode.validate();
  const PointCloud cloud = experiment_cloud(manifold, n, seed, sampling);
  const DegreeVector d = streaming_degrees(cloud, mode.kernel(epsilon));
  return degree_stats(manifold, cloud, d, epsilon);
}

// ---------------------------------------------------------------------------
// Sweeps

struct ExperimentSpec {
  std::string manifold = "circle";
  std::string function = "sin_theta";
  std::vector<std::size_t> n_list;
  std::vector<double> epsilon_list;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  GraphMode mode;
  Sampling sampling = Sampling::random;
  InteriorStatistic interior_statistic = InteriorStatistic::median;

  void validate() const {
    const Manifold& m = find_manifold(manifold);
    m.function(function);
    if (n_list.empty()) throw ConfigError("N_list must not be empty");
    if (epsilon_list.empty()) throw ConfigError("epsilon_list must not be empty");
    for (const auto n : n_list)
      if (n < 2) throw ConfigError("every N must be >= 2, got " + std::to_string(n));
    for (const double e : epsilon_list)
      if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("every epsilon must be positive, got " + std::to_string(e));
    if (trials < 1) throw ConfigError("trials must be >= 1");
    mode.validate();
  }
};

/// Seed of one sweep cell. Keyed on the cell's values rather than its
/// position, so reordering N_list or epsilon_list leaves each cell unchanged.
inline std::uint64_t cell_seed(std::uint64_t master, std::size_t n, double epsilon, std::size_t trial) noexcept {
  return derive_seed(master, {static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(epsilon),
                              static_cast<std::uint64_t>(trial)});
}

struct ExperimentRow {
  std::string manifold;
  std::string function;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  std::string mode;
  bool ok = false;
  std::string failure;

  std::size_t n_points = 0;
  double err_abs_median = 0.0;
  double err_abs_mean = 0.0;
  double err_abs_max = 0.0;
  double err_rel_median = 0.0;
  double degree_ratio_mean = 0.0;  // mean of r(u) - (1 + eps S / 6)
  double degree_ratio_dev = 0.0;   // its standard deviation
  double anchor_estimate = 0.0;
  double wall_ms = 0.0;
  Regime regime = Regime::bias;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<ExperimentRow> rows;

  std::size_t failures() const noexcept {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
  }
};

inline ExperimentRow run_cell(const ExperimentSpec& spec, std::size_t n, double epsilon, std::size_t trial) {
  ExperimentRow row;
  row.manifold = spec.manifold;
  row.function = spec.function;
  row.n = n;
  row.epsilon = epsilon;
  row.trial = trial;
  row.seed = cell_seed(spec.master_seed, n, epsilon, trial);
  row.mode = spec.mode.name();
  const auto start = std::chrono::steady_clock::now();
  try {
    const Manifold& manifold = find_manifold(spec.manifold);
    const PointCloud cloud = experiment_cloud(manifold, n, row.seed, spec.sampling);
    require_dense_limit(cloud.size(), spec.mode);
    const WeightMatrix w = build_weights(cloud, spec.mode.kernel(epsilon));
    const DegreeVector d = degrees(w);
    const LemmaCheck lemma = lemma_check_on(manifold, spec.function, cloud, w, d, spec.sampling);
    const DegreeCheck deg = degree_stats(manifold, cloud, d, epsilon);
    row.n_points = cloud.size();
    row.err_abs_median = lemma.err_abs_median;
    row.err_abs_mean = lemma.err_abs_mean;
    row.err_abs_max = lemma.err_abs_max;
    row.err_rel_median = lemma.err_rel_median;
    row.degree_ratio_mean = deg.residual_mean;
    row.degree_ratio_dev = deg.residual_dev;
    row.anchor_estimate = lemma.anchor_estimate;
    row.regime = lemma.regime;
    row.warnings = lemma.warnings;
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.failure = e.what();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Runs every (N, eps, trial) cell, `parallelism` cells at a time. Rows come
/// back in spec order (N outer, eps middle, trial inner) whatever the
/// completion order; a failing cell is recorded and the others continue.
inline ExperimentResult sweep(const ExperimentSpec& spec, unsigned parallelism = 1) {
  spec.validate();
  struct Cell {
    std::size_t n;
    double eps;
    std::size_t trial;
  };
  std::vector<Cell> cells;
  for (const auto n : spec.n_list)
    for (const double e : spec.epsilon_list)
      for (std::size_t t = 0; t < spec.trials; ++t) cells.push_back({n, e, t});

  ExperimentResult result{spec, std::vector<ExperimentRow>(cells.size())};
  parallel_for(
      cells.size(), parallelism,
      [&](std::size_t i) { result.rows[i] = run_cell(spec, cells[i].n, cells[i].eps, cells[i].trial); }, 1);
  return result;
}

// ---------------------------------------------------------------------------
// Rate fitting

enum class Axis { n, epsilon };

inline std::string_view to_string(Axis a) noexcept { return a == Axis::n ? "N" : "epsilon"; }

inline Axis parse_axis(std::string_view s) {
  if (s == "N" || s == "n") return Axis::n;
  if (s == "epsilon" || s == "eps") return Axis::epsilon;
  throw ConfigError("unknown axis '" + std::string(s) + "'; expected N or epsilon");
}

/// Power-law fit log(y) = intercept + slope log(x).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  std::string axis;
  std::string response;
};

/// Ordinary least squares on (log x, log y). Needs >= 3 distinct x values
/// and strictly positive x and y.
inline RateFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("fit: x and y lengths differ");
  std::vector<double> distinct(xs.begin(), xs.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw Error("fit: need at least 3 distinct axis values, got " + std::to_string(distinct.size()));
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0)) throw Error("fit: axis values must be positive");
    if (!(ys[i] > 0.0) || !std::isfinite(ys[i]))
      throw Error("fit: responses must be positive and finite, got " + std::to_string(ys[i]));
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = detail::mean(lx), my = detail::mean(ly);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  RateFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

/// Averages y over repeated x values; output sorted by x.
inline std::pair<std::vector<double>, std::vector<double>> mean_by_x(std::span<const double> xs,
                                                                     std::span<const double> ys) {
  std::map<double, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto& [sum, count] = acc[xs[i]];
    sum += ys[i];
    ++count;
  }
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& [x, sc] : acc) {
    out.first.push_back(x);
    out.second.push_back(sc.first / static_cast<double>(sc.second));
  }
  return out;
}

inline double row_value(const ExperimentRow& row, std::string_view column) {
  if (column == "N") return static_cast<double>(row.n);
  if (column == "epsilon") return row.epsilon;
  if (column == "err_abs_median") return row.err_abs_median;
  if (column == "err_abs_mean") return row.err_abs_mean;
  if (column == "err_abs_max") return row.err_abs_max;
  if (column == "err_rel_median") return row.err_rel_median;
  if (column == "degree_ratio_mean") return row.degree_ratio_mean;
  if (column == "degree_ratio_dev") return row.degree_ratio_dev;
  if (column == "anchor_estimate") return row.anchor_estimate;
  if (column == "wall_ms") return row.wall_ms;
  throw ConfigError("unknown result column '" + std::string(column) + "'");
}

/// Fits response against the swept axis. Trials sharing an axis value are
/// averaged first; rows should already be restricted to one curve (a single
/// value of the other axis). Failed cells are ignored.
inline RateFit fit_rate(std::span<const ExperimentRow> rows, Axis axis, std::string_view response) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    xs.push_back(axis == Axis::n ? static_cast<double>(r.n) : r.epsilon);
    ys.push_back(row_value(r, response));
  }
  const auto [mx, my] = mean_by_x(xs, ys);
  RateFit fit = fit_power_law(mx, my);
  fit.axis = std::string(to_string(axis));
  fit.response = std::string(response);
  return fit;
}

/// Across-trial spread of the estimator at the pinned vertex, per (N, eps).
struct AnchorSpread {
  std::size_t n = 0;
  double epsilon = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t trials = 0;
};

inline std::vector<AnchorSpread> anchor_spread(std::span<const ExperimentRow> rows) {
  std::map<std::pair<std::size_t, double>, std::vector<double>> groups;
  std::vector<std::pair<std::size_t, double>> order;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    const auto key = std::make_pair(r.n, r.epsilon);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.anchor_estimate);
  }
  std::vector<AnchorSpread> out;
  for (const auto& key : order) {
    const auto& v = groups[key];
    AnchorSpread s;
    s.n = key.first;
    s.epsilon = key.second;
    s.mean = detail::mean(v);
    s.stddev = detail::stddev(v, s.mean);
    s.trials = v.size();
    out.push_back(s);
  }
  return out;
}

}  // namespace gcalc
