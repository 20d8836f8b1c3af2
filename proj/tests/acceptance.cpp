// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "graph_calculus/graph_calculus.hpp"
#include "oracle_values.hpp"

using namespace gcalc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kDivGradTol = 1e-12;
constexpr double kAntisymmetryTol = 1e-14;
constexpr double kAdjointTol = 1e-10;
constexpr double kNullVectorTol = 1e-12;
constexpr double kSpectrumTol = 1e-10;
constexpr double kCosineTol = 1e-10;
constexpr double kSlopeLo = -0.7, kSlopeHi = -0.3;
constexpr double kPlateauFactor = 2.0;
constexpr double kCorrelationMin = 0.95;
constexpr double kSparseTau = 1e-8;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// The 20 clouds: 20 of the 30 (N, n, eps) combinations, cycling through each list.
std::vector<WeightMatrix> criterion_clouds() {
  const std::size_t ns[] = {2, 3, 10, 100, 300};
  const std::size_t dims[] = {2, 3, 4};
  const double eps[] = {0.1, 1.0};
  std::vector<WeightMatrix> out;
  for (std::size_t i = 0; i < 20; ++i) {
    Rng rng(derive_seed(0xacce55, {i}));
    const auto cloud = random_cube_cloud(ns[i % 5], dims[i % 3], rng);
    out.push_back(build_weights(cloud, {eps[(i / 5) % 2], 0.0}));
  }
  return out;
}

Outcome criterion_operator_algebra() {
  double div_grad = 0, anti = 0, adjoint = 0, null_vec = 0;
  std::size_t k = 0;
  for (const auto& w : criterion_clouds()) {
    Rng rng(derive_seed(0xa1, {k++}));
    for (const auto& r : check_operator_algebra(w, rng)) {
      if (r.name.starts_with("div(grad)")) div_grad = std::max(div_grad, r.residual);
      if (r.name.starts_with("gradient antisymmetry")) anti = std::max(anti, r.residual);
      if (r.name.starts_with("adjointness")) adjoint = std::max(adjoint, r.residual);
      if (r.name.starts_with("null vector")) null_vec = std::max(null_vec, r.residual);
    }
  }
  return {div_grad <= kDivGradTol && anti <= kAntisymmetryTol && adjoint <= kAdjointTol && null_vec <= kNullVectorTol,
          "div_grad=" + fmt(div_grad) + " antisym=" + fmt(anti) + " adjoint_rel=" + fmt(adjoint) +
              " null_vec=" + fmt(null_vec)};
}

Outcome criterion_spectrum() {
  double range = 0, smallest = 0, misalign = 0;
  for (const auto& w : criterion_clouds()) {
    for (const auto& r : check_spectrum(w)) {
      if (r.name.starts_with("spectrum")) range = std::max(range, r.residual);
      if (r.name.starts_with("smallest")) smallest = std::max(smallest, r.residual);
      if (r.name.starts_with("null eigenvector")) misalign = std::max(misalign, r.residual);
    }
  }
  return {range <= kSpectrumTol && smallest <= kSpectrumTol && misalign <= kCosineTol,
          "range_violation=" + fmt(range) + " lambda_min=" + fmt(smallest) + " 1-cos=" + fmt(misalign)};
}

Outcome criterion_bias() {
  const double ladder[] = {0.04, 0.02, 0.01, 0.005};
  std::vector<double> errs;
  for (const double eps : ladder)
    errs.push_back(
        lemma_check(find_manifold("circle"), "sin_theta", 4000, eps, 0, GraphMode::dense(), Sampling::grid).err_abs_max);
  bool monotone = true;
  for (std::size_t i = 1; i < errs.size(); ++i) monotone = monotone && errs[i] < errs[i - 1];
  const double bound = oracle::kCircleBiasConstant * std::sqrt(0.005);
  std::string detail = "err_abs_max=";
  for (std::size_t i = 0; i < errs.size(); ++i) detail += (i ? "," : "") + fmt(errs[i]);
  detail += " bound(0.005)=" + fmt(bound);
  return {monotone && errs.back() < bound, detail};
}

Outcome criterion_stochastic() {
  const auto& circle = find_manifold("circle");
  const double eps = 0.005;
  const std::size_t ns[] = {500, 1000, 2000, 4000, 8000};
  const std::size_t seeds = 50;
  const auto mode = GraphMode::sparse_with(kSparseTau);

  std::vector<double> stds, xs;
  double mean_rel_8000 = 0.0;
  for (const std::size_t n : ns) {
    std::vector<double> anchor(seeds), rel(seeds);
    parallel_for(seeds, workers(), [&](std::size_t s) {
      const auto r = lemma_check(circle, "sin_theta", n, eps, cell_seed(0xc4, n, eps, s), mode);
      anchor[s] = r.anchor_estimate;
      rel[s] = r.err_rel_median;
    }, 1);
    double mu = 0;
    for (const double a : anchor) mu += a / seeds;
    double var = 0;
    for (const double a : anchor) var += (a - mu) * (a - mu) / (seeds - 1);
    stds.push_back(std::sqrt(var));
    xs.push_back(static_cast<double>(n));
    if (n == 8000)
      for (const double r : rel) mean_rel_8000 += r / seeds;
  }
  const auto fit = fit_power_law(xs, stds);
  const double grid_rel = lemma_check(circle, "sin_theta", 8000, eps, 0, mode, Sampling::grid).err_rel_median;
  const bool slope_ok = fit.slope >= kSlopeLo && fit.slope <= kSlopeHi;
  const bool plateau_ok = mean_rel_8000 <= kPlateauFactor * grid_rel;
  return {slope_ok && plateau_ok, "anchor_std_slope=" + fmt(fit.slope) + (slope_ok ? " (ok)" : " (out of range)") +
                                      " mean_err_rel_median(N=8000)=" + fmt(mean_rel_8000) +
                                      " grid_err_rel_median=" + fmt(grid_rel) + (plateau_ok ? " (ok)" : " (> 2x grid)")};
}

double mean_degree_ratio(const Manifold& m, std::size_t n, double eps, std::size_t seeds) {
  std::vector<double> ratio(seeds);
  parallel_for(seeds, workers(), [&](std::size_t s) {
    ratio[s] = degree_check(m, n, eps, cell_seed(0xc5, n, eps, s), GraphMode::sparse_with(kSparseTau)).ratio_mean;
  }, 1);
  double mu = 0;
  for (const double r : ratio) mu += r / static_cast<double>(seeds);
  return mu;
}

Outcome criterion_degree() {
  const double eps = 0.05;
  const double sphere = mean_degree_ratio(find_manifold("sphere"), 20000, eps, 20);
  const double circle = mean_degree_ratio(find_manifold("circle"), 20000, eps, 20);
  const bool sphere_ok = sphere - 1.0 > eps / 6.0;
  const bool circle_ok = std::abs(circle - 1.0) <= oracle::kCircleRandomN20000Eps0p05Delta;
  return {sphere_ok && circle_ok, "sphere_ratio-1=" + fmt(sphere - 1.0) + " (need > " + fmt(eps / 6.0) + ")" +
                                      " circle_ratio-1=" + fmt(circle - 1.0) + " (tolerance " +
                                      fmt(oracle::kCircleRandomN20000Eps0p05Delta) + ")"};
}

Outcome criterion_ground_truth() {
  double corr[2];
  const std::pair<const char*, const char*> cases[] = {{"sphere", "z"}, {"torus", "sin_theta"}};
  for (int i = 0; i < 2; ++i) {
    const auto r = lemma_check(find_manifold(cases[i].first), cases[i].second, 8000, 0.01, 0xc6 + i,
                               GraphMode::sparse_with(kSparseTau), Sampling::random, workers());
    corr[i] = correlation(r.estimator, r.truth);
  }
  return {corr[0] >= kCorrelationMin && corr[1] >= kCorrelationMin,
          "corr(sphere,z)=" + fmt(corr[0]) + " corr(torus,sin_theta)=" + fmt(corr[1]) + " (need >= " +
              fmt(kCorrelationMin) + ")"};
}

int shell(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "gc_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file_atomic(dir / "spec.json",
                    R"({"manifold":"sphere","function":"z","N_list":[200,400,800],"epsilon_list":[0.05,0.1],)"
                    R"("trials":3,"master_seed":7})");
  const std::string base = std::string("GRAPH_CALCULUS_LOG=quiet '") + GRAPH_CALCULUS_CLI + "' run --config '" +
                           (dir / "spec.json").string() + "' --out '";
  const int a = shell(base + (dir / "a").string() + "' --parallelism 1");
  const int b = shell(base + (dir / "b").string() + "' --parallelism 4");
  const int c = shell(base + (dir / "c").string() + "' --parallelism 1");
  if (a != 0 || b != 0 || c != 0) return {false, "run exited with status " + std::to_string(a) + "/" + std::to_string(b) + "/" + std::to_string(c)};
  const auto ra = read_file(dir / "a" / "results.csv");
  const bool same = ra == read_file(dir / "b" / "results.csv") && ra == read_file(dir / "c" / "results.csv");
  fs::remove_all(dir);
  return {same, same ? "results.csv byte-identical across parallelism 1, 4 and a rerun" : "results.csv differs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 exact operator algebra", criterion_operator_algebra},
      {"C2 spectral sanity", criterion_spectrum},
      {"C3 noise-free bias on the circle grid", criterion_bias},
      {"C4 stochastic convergence on the circle", criterion_stochastic},
      {"C5 degree asymptotics", criterion_degree},
      {"C6 Laplace-Beltrami ground truth", criterion_ground_truth},
      {"C7 determinism of sweeps", criterion_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  " << o.detail << "  [" << fmt(secs) << " s]"
              << std::endl;
    failed += !o.pass;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
