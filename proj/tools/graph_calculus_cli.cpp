// graph-calculus: command-line front end for the graph calculus library.
//
// Exit codes: 0 success, 1 configuration / usage / I/O error, 2 numerical
// failure (a sweep cell failed, or an invariant was violated).

#include <chrono>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graph_calculus/graph_calculus.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("GRAPH_CALCULUS_LOG");
    const std::string v = env ? env : "info";
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << "[info] " << msg << '\n';
}
void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::cerr << "[debug] " << msg << '\n';
}
void log_error(const std::string& msg) { std::cerr << "error: " << msg << '\n'; }

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

struct KernelArgs {
  std::string points;
  double epsilon = 0.0;
  double tau = 0.0;
};

void add_kernel_options(CLI::App* cmd, KernelArgs& args) {
  cmd->add_option("--points", args.points, "Point cloud CSV (one point per row)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--epsilon", args.epsilon, "Kernel width eps in exp(-|u-v|^2 / 2 eps)")->required();
  cmd->add_option("--tau", args.tau, "Drop weights below tau (0 keeps the complete graph)");
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    gcalc::write_file_atomic(out_path, content);
  }
}

json manifold_json(const gcalc::Manifold& m) {
  json fns = json::array();
  for (const auto& f : m.functions()) fns.push_back({{"id", f.id}, {"formula", f.formula}});
  const auto anchor = m.anchor();
  return {{"id", std::string(m.id())},
          {"m", m.intrinsic_dim()},
          {"n", m.ambient_dim()},
          {"volume", m.volume()},
          {"scalar_curvature", m.scalar_curvature(anchor)},
          {"functions", fns}};
}

int cmd_run(const std::string& config, const std::string& out_dir, unsigned parallelism,
            std::optional<std::uint64_t> seed, const std::string& mode, std::optional<double> tau,
            bool record_timing) {
  gcalc::ExperimentSpec spec;
  try {
    spec = gcalc::load_spec(config);
    if (seed) spec.master_seed = *seed;
    if (mode == "sparse") spec.mode.sparse = true;
    if (mode == "dense") spec.mode = gcalc::GraphMode::dense();
    if (tau) spec.mode.tau = *tau;
    spec.validate();
  } catch (const gcalc::Error& e) {
    log_error(e.what());
    return kConfigError;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    log_error("cannot create output directory '" + out_dir + "'");
    return kConfigError;
  }

  log_info("running " + std::to_string(spec.n_list.size() * spec.epsilon_list.size() * spec.trials) + " cells on " +
           spec.manifold + "/" + spec.function + " with parallelism " + std::to_string(parallelism));
  const auto start = std::chrono::steady_clock::now();
  const gcalc::ExperimentResult result = gcalc::sweep(spec, parallelism);
  const double total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  for (const auto& r : result.rows) {
    if (!r.ok) log_error("cell N=" + std::to_string(r.n) + " eps=" + gcalc::format_double(r.epsilon) + " trial=" +
                         std::to_string(r.trial) + ": " + r.failure);
    for (const auto& w : r.warnings) log_info("cell N=" + std::to_string(r.n) + ": " + w);
    log_debug("cell N=" + std::to_string(r.n) + " eps=" + gcalc::format_double(r.epsilon) +
              " regime=" + std::string(gcalc::to_string(r.regime)) + " wall_ms=" + gcalc::format_double(r.wall_ms));
  }

  try {
    gcalc::write_file_atomic(fs::path(out_dir) / "results.csv", gcalc::results_to_csv(result, record_timing));
    gcalc::write_file_atomic(fs::path(out_dir) / "summary.json", gcalc::summarize(result, total_ms).dump(2) + "\n");
  } catch (const gcalc::Error& e) {
    log_error(e.what());
    return kConfigError;
  }
  log_info("wrote " + (fs::path(out_dir) / "results.csv").string());
  return result.failures() == 0 ? kOk : kNumericalFailure;
}

int cmd_verify(std::size_t n, std::size_t seeds, bool inject) {
  if (n < 2 || n > 1000) {
    log_error("verify: N must be in [2, 1000] (dense mode), got " + std::to_string(n));
    return kConfigError;
  }
  if (seeds < 1) {
    log_error("verify: seeds must be >= 1");
    return kConfigError;
  }
  gcalc::VerifyOptions opt;
  opt.n = n;
  opt.seeds = seeds;
  opt.inject_asymmetry = inject;
  bool all = true;
  for (const auto& r : gcalc::run_verify(opt)) {
    all = all && r.passed();
    std::cout << (r.passed() ? "PASS" : "FAIL") << "  " << r.name << "  worst residual " << gcalc::format_double(r.residual)
              << " (tolerance " << short_number(r.tolerance) << ")\n";
  }
  return all ? kOk : kNumericalFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete calculus on Gaussian-kernel graphs and Laplace-Beltrami convergence experiments",
               "graph-calculus"};
  app.require_subcommand(1);

  // run
  std::string config, out_dir, mode_override;
  unsigned parallelism = 1;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> tau_override;
  bool record_timing = false;
  auto* run = app.add_subcommand("run", "Execute an experiment spec (JSON) and write results.csv + summary.json");
  run->add_option("--config", config, "Experiment spec JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--parallelism", parallelism, "Cells evaluated concurrently")->check(CLI::Range(1u, 1024u));
  run->add_option("--seed", seed_override, "Override master_seed");
  run->add_option("--mode", mode_override, "Override graph mode")->check(CLI::IsMember({"dense", "sparse"}));
  run->add_option("--tau", tau_override, "Override truncation threshold");
  run->add_flag("--record-timing", record_timing, "Write measured wall_ms into results.csv (breaks byte-identical reruns)");

  // verify
  std::size_t verify_n = 100, verify_seeds = 5;
  bool inject = false;
  auto* verify = app.add_subcommand("verify", "Check the exact operator identities on random clouds");
  verify->add_option("--N", verify_n, "Points per cloud (2..1000)");
  verify->add_option("--seeds", verify_seeds, "Number of random clouds");
  verify->add_flag("--inject-asymmetry", inject, "Corrupt W(0,1) to exercise the failure path")->group("");

  // degree-check
  std::string dc_manifold = "sphere", dc_mode = "dense", dc_sampling = "random";
  std::size_t dc_n = 2000;
  double dc_eps = 0.05, dc_tau = 0.0;
  std::uint64_t dc_seed = 0;
  auto* degree = app.add_subcommand("degree-check", "Compare degrees with (N-1)(2 pi eps)^{m/2}/vol (1 + eps S/6)");
  degree->add_option("--manifold", dc_manifold, "Manifold id");
  degree->add_option("--N", dc_n, "Number of points");
  degree->add_option("--epsilon", dc_eps, "Kernel width");
  degree->add_option("--seed", dc_seed, "Sampling seed");
  degree->add_option("--mode", dc_mode, "Graph mode")->check(CLI::IsMember({"dense", "sparse"}));
  degree->add_option("--tau", dc_tau, "Truncation threshold for sparse mode");
  degree->add_option("--sampling", dc_sampling, "random or grid")->check(CLI::IsMember({"random", "grid"}));

  // grad / div / laplacian
  KernelArgs grad_args, div_args, lap_args;
  std::string grad_fn, grad_out, div_field, div_out, lap_fn, lap_out, lap_matrix_out;
  auto* grad = app.add_subcommand("grad", "Gradient of a vertex function; writes the N x N edge field");
  add_kernel_options(grad, grad_args);
  grad->add_option("--function", grad_fn, "Vertex function CSV (one value per line)")->required()->check(CLI::ExistingFile);
  grad->add_option("--out", grad_out, "Output CSV (stdout if omitted)");
  auto* div = app.add_subcommand("div", "Divergence of an edge field (N x N CSV)");
  add_kernel_options(div, div_args);
  div->add_option("--field", div_field, "Edge field CSV (row-major N x N)")->required()->check(CLI::ExistingFile);
  div->add_option("--out", div_out, "Output CSV (stdout if omitted)");
  auto* lap = app.add_subcommand("laplacian", "Apply Delta = D^-1/2 W D^-1/2 - Id to a vertex function");
  add_kernel_options(lap, lap_args);
  lap->add_option("--function", lap_fn, "Vertex function CSV")->required()->check(CLI::ExistingFile);
  lap->add_option("--out", lap_out, "Output CSV (stdout if omitted)");
  lap->add_option("--matrix-out", lap_matrix_out, "Also export the dense Laplacian matrix as CSV");

  // registry
  auto* list_m = app.add_subcommand("list-manifolds", "Print the manifold registry as JSON");
  std::string lf_manifold;
  auto* list_f = app.add_subcommand("list-functions", "Print the test functions as JSON");
  list_f->add_option("--manifold", lf_manifold, "Restrict to one manifold");

  // plot-data
  std::string pd_results, pd_x = "N", pd_y = "err_rel_median", pd_group = "epsilon", pd_out;
  auto* plot = app.add_subcommand("plot-data", "Split a results CSV into per-group (x, y) series files");
  plot->add_option("--results", pd_results, "results.csv from `run`")->required()->check(CLI::ExistingFile);
  plot->add_option("--x", pd_x, "x column");
  plot->add_option("--y", pd_y, "y column");
  plot->add_option("--group-by", pd_group, "Column defining the series");
  plot->add_option("--out", pd_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out_dir, parallelism, seed_override, mode_override, tau_override, record_timing);
    if (*verify) return cmd_verify(verify_n, verify_seeds, inject);

    if (*degree) {
      const auto& m = gcalc::find_manifold(dc_manifold);
      gcalc::GraphMode mode = dc_mode == "sparse" ? gcalc::GraphMode::sparse_with(dc_tau) : gcalc::GraphMode::dense();
      const auto sampling = gcalc::parse_sampling(dc_sampling);
      const auto r = gcalc::degree_check(m, dc_n, dc_eps, dc_seed, mode, sampling);
      json j{{"manifold", dc_manifold},        {"N", r.n_points},
             {"epsilon", r.epsilon},           {"seed", dc_seed},
             {"mode", mode.name()},            {"sampling", dc_sampling},
             {"ratio_mean", r.ratio_mean},     {"ratio_std", r.ratio_std},
             {"predicted_mean", r.predicted_mean}, {"residual_mean", r.residual_mean},
             {"residual_dev", r.residual_dev}, {"self_loop_term", r.self_loop_term},
             {"self_loop_dominated", r.self_loop_dominated}};
      if (r.self_loop_dominated)
        log_info("self-loop term " + gcalc::format_double(r.self_loop_term) +
                 " exceeds the curvature correction; eps is too small for this N");
      std::cout << j.dump(2) << '\n';
      return kOk;
    }

    if (*grad || *div || *lap) {
      const KernelArgs& ka = *grad ? grad_args : (*div ? div_args : lap_args);
      const auto cloud = gcalc::read_point_cloud_csv(ka.points);
      const auto w = gcalc::build_weights(cloud, {ka.epsilon, ka.tau});
      const auto d = gcalc::degrees(w);
      if (*grad) {
        const auto f = gcalc::read_vertex_function_csv(grad_fn);
        emit(gcalc::edge_field_to_csv(gcalc::gradient(f, w, d)), grad_out);
      } else if (*div) {
        const auto field = gcalc::read_edge_field_csv(div_field, w.shared_pattern());
        emit(gcalc::vector_to_csv(gcalc::divergence(field, w, d).values()), div_out);
      } else {
        const auto f = gcalc::read_vertex_function_csv(lap_fn);
        emit(gcalc::vector_to_csv(gcalc::laplacian_apply(f, w, d).values()), lap_out);
        if (!lap_matrix_out.empty()) gcalc::write_file_atomic(lap_matrix_out, gcalc::matrix_to_csv(gcalc::laplacian_matrix(w, d)));
      }
      return kOk;
    }

    if (*list_m) {
      json all = json::array();
      for (const auto* m : gcalc::manifold_registry()) all.push_back(manifold_json(*m));
      std::cout << all.dump(2) << '\n';
      return kOk;
    }
    if (*list_f) {
      json all = json::array();
      for (const auto* m : gcalc::manifold_registry()) {
        if (!lf_manifold.empty() && m->id() != lf_manifold) continue;
        for (const auto& f : m->functions())
          all.push_back({{"manifold", std::string(m->id())}, {"id", f.id}, {"formula", f.formula}});
      }
      if (!lf_manifold.empty() && all.empty()) gcalc::find_manifold(lf_manifold);
      std::cout << all.dump(2) << '\n';
      return kOk;
    }
    if (*plot) {
      const auto series = gcalc::plot_data(pd_results, pd_x, pd_y, pd_group, pd_out);
      for (const auto& s : series) {
        std::cout << pd_group << "=" << s.group << " -> " << s.path.string();
        if (s.fit) std::cout << " slope " << gcalc::format_double(s.fit->slope);
        std::cout << '\n';
      }
      return kOk;
    }
  } catch (const gcalc::Error& e) {
    log_error(e.what());
    return kConfigError;
  }
  return kConfigError;
}
