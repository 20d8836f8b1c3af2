#pragma once

// ExperimentSpec <-> JSON, result table -> CSV, and the JSON run summary.
//
// Spec document (unknown keys are rejected):
//   {
//     "manifold": "circle",            required, see list-manifolds
//     "function": "sin_theta",         required, see list-functions
//     "N_list": [500, 1000],           required, integers >= 2
//     "epsilon_list": [0.01],          required, positive
//     "trials": 5,                     default 1
//     "master_seed": 42,               default 0, unsigned 64-bit
//     "mode": "dense" | "sparse",      default dense
//     "tau": 1e-8,                     required for sparse, 0 < tau < 1
//     "sampling": "random" | "grid",   default random
//     "interior_statistic": "median" | "mean" | "max"   default median
//   }

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graph_calculus/convergence.hpp"
#include "graph_calculus/csv.hpp"
#include "graph_calculus/error.hpp"

namespace gcalc {

inline constexpr std::string_view kResultsHeader =
    "manifold,function,N,epsilon,seed,mode,err_abs_median,err_abs_mean,err_abs_max,err_rel_median,"
    "degree_ratio_mean,degree_ratio_dev,wall_ms";

inline ExperimentSpec spec_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  if (!doc.is_object()) throw ConfigError("experiment spec must be a JSON object");
  static const std::set<std::string> known{"manifold", "function", "N_list",   "epsilon_list", "trials",
                                           "master_seed", "mode",   "tau",      "sampling",     "interior_statistic"};
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key)) throw ConfigError("experiment spec: unknown key '" + key + "'");
  for (const char* key : {"manifold", "function", "N_list", "epsilon_list"})
    if (!doc.contains(key)) throw ConfigError(std::string("experiment spec: missing required key '") + key + "'");

  auto get_string = [&](const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_string()) throw ConfigError(std::string("experiment spec: '") + key + "' must be a string");
    return v.get<std::string>();
  };
  auto get_count = [&](const json& v, const char* key) -> std::uint64_t {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(std::string("experiment spec: '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  };

  ExperimentSpec spec;
  spec.manifold = get_string("manifold");
  spec.function = get_string("function");
  if (!doc["N_list"].is_array()) throw ConfigError("experiment spec: 'N_list' must be an array");
  for (const auto& v : doc["N_list"]) spec.n_list.push_back(static_cast<std::size_t>(get_count(v, "N_list")));
  if (!doc["epsilon_list"].is_array()) throw ConfigError("experiment spec: 'epsilon_list' must be an array");
  for (const auto& v : doc["epsilon_list"]) {
    if (!v.is_number()) throw ConfigError("experiment spec: 'epsilon_list' entries must be numbers");
    spec.epsilon_list.push_back(v.get<double>());
  }
  if (doc.contains("trials")) spec.trials = static_cast<std::size_t>(get_count(doc["trials"], "trials"));
  if (doc.contains("master_seed")) spec.master_seed = get_count(doc["master_seed"], "master_seed");
  if (doc.contains("mode")) {
    const auto mode = get_string("mode");
    if (mode == "sparse") spec.mode.sparse = true;
    else if (mode != "dense") throw ConfigError("experiment spec: mode must be 'dense' or 'sparse', got '" + mode + "'");
  }
  if (doc.contains("tau")) {
    if (!doc["tau"].is_number()) throw ConfigError("experiment spec: 'tau' must be a number");
    spec.mode.tau = doc["tau"].get<double>();
  }
  if (doc.contains("sampling")) spec.sampling = parse_sampling(get_string("sampling"));
  if (doc.contains("interior_statistic")) spec.interior_statistic = parse_statistic(get_string("interior_statistic"));
  return spec;
}

inline ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return spec_from_json(doc);
}

inline nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["manifold"] = spec.manifold;
  j["function"] = spec.function;
  j["N_list"] = spec.n_list;
  j["epsilon_list"] = spec.epsilon_list;
  j["trials"] = spec.trials;
  j["master_seed"] = spec.master_seed;
  j["mode"] = spec.mode.name();
  if (spec.mode.sparse) j["tau"] = spec.mode.tau;
  j["sampling"] = std::string(to_string(spec.sampling));
  j["interior_statistic"] = std::string(to_string(spec.interior_statistic));
  return j;
}

/// Result table as CSV. Failed cells keep their identifying columns and leave
/// the numeric ones empty. wall_ms is written as 0 unless record_timing is
/// set, which keeps the file byte-identical between reruns.
inline std::string results_to_csv(const ExperimentResult& result, bool record_timing = false) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : result.rows) {
    out += r.manifold + ',' + r.function + ',' + std::to_string(r.n) + ',' + format_double(r.epsilon) + ',' +
           std::to_string(r.seed) + ',' + r.mode;
    if (r.ok) {
      for (const double x : {r.err_abs_median, r.err_abs_mean, r.err_abs_max, r.err_rel_median, r.degree_ratio_mean,
                             r.degree_ratio_dev})
        out += ',' + format_double(x);
      out += ',' + format_double(record_timing ? r.wall_ms : 0.0);
    } else {
      out += ",,,,,,,";
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json fit_to_json(const RateFit& fit) {
  return {{"axis", fit.axis},   {"response", fit.response}, {"slope", fit.slope},
          {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"points", fit.points}};
}

/// Summary: spec echo, failures, per-cell regimes and warnings, rate fits of
/// the chosen interior statistic against N (per eps) and against eps (per N),
/// and the across-trial spread at the pinned vertex with its fit against N.
inline nlohmann::json summarize(const ExperimentResult& result, double total_wall_ms) {
  using nlohmann::json;
  const auto& spec = result.spec;
  const std::string stat_column = "err_abs_" + std::string(to_string(spec.interior_statistic));

  json summary;
  summary["spec"] = spec_to_json(spec);
  summary["cells"] = result.rows.size();
  summary["failed_cells"] = result.failures();
  summary["total_wall_ms"] = total_wall_ms;

  json failures = json::array(), cells = json::array();
  for (const auto& r : result.rows) {
    if (!r.ok) {
      failures.push_back({{"N", r.n}, {"epsilon", r.epsilon}, {"trial", r.trial}, {"seed", r.seed}, {"error", r.failure}});
      continue;
    }
    json c{{"N", r.n},
           {"epsilon", r.epsilon},
           {"trial", r.trial},
           {"seed", r.seed},
           {"points", r.n_points},
           {"regime", std::string(to_string(r.regime))},
           {"anchor_estimate", r.anchor_estimate},
           {"wall_ms", r.wall_ms}};
    if (!r.warnings.empty()) c["warnings"] = r.warnings;
    cells.push_back(std::move(c));
  }
  summary["failures"] = std::move(failures);
  summary["cell_details"] = std::move(cells);

  auto try_fit = [](std::span<const ExperimentRow> rows, Axis axis, std::string_view column) -> json {
    try {
      return fit_to_json(fit_rate(rows, axis, column));
    } catch (const Error& e) {
      return {{"axis", std::string(to_string(axis))}, {"response", std::string(column)}, {"error", e.what()}};
    }
  };

  json fits = json::array();
  if (spec.n_list.size() >= 3) {
    for (const double eps : spec.epsilon_list) {
      std::vector<ExperimentRow> curve;
      for (const auto& r : result.rows)
        if (r.epsilon == eps) curve.push_back(r);
      json f = try_fit(curve, Axis::n, stat_column);
      f["epsilon"] = eps;
      fits.push_back(std::move(f));
    }
  }
  if (spec.epsilon_list.size() >= 3) {
    for (const auto n : spec.n_list) {
      std::vector<ExperimentRow> curve;
      for (const auto& r : result.rows)
        if (r.n == n) curve.push_back(r);
      json f = try_fit(curve, Axis::epsilon, stat_column);
      f["N"] = n;
      fits.push_back(std::move(f));
    }
  }
  summary["rate_fits"] = std::move(fits);

  const auto spread = anchor_spread(result.rows);
  json spread_json = json::array();
  for (const auto& s : spread)
    spread_json.push_back({{"N", s.n}, {"epsilon", s.epsilon}, {"mean", s.mean}, {"stddev", s.stddev}, {"trials", s.trials}});
  summary["anchor_spread"] = std::move(spread_json);

  json spread_fits = json::array();
  if (spec.trials >= 2 && spec.n_list.size() >= 3) {
    for (const double eps : spec.epsilon_list) {
      std::vector<double> xs, ys;
      for (const auto& s : spread)
        if (s.epsilon == eps && s.trials >= 2) {
          xs.push_back(static_cast<double>(s.n));
          ys.push_back(s.stddev);
        }
      json f;
      try {
        RateFit fit = fit_power_law(xs, ys);
        fit.axis = "N";
        fit.response = "anchor_stddev";
        f = fit_to_json(fit);
      } catch (const Error& e) {
        f = {{"axis", "N"}, {"response", "anchor_stddev"}, {"error", e.what()}};
      }
      f["epsilon"] = eps;
      spread_fits.push_back(std::move(f));
    }
  }
  summary["anchor_spread_fits"] = std::move(spread_fits);
  return summary;
}

}  // namespace gcalc
