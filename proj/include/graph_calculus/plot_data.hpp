#pragma once

// Reshapes a results table into one (x, y) series file per group, ready for
// any external plotting tool, with a power-law slope per series.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graph_calculus/convergence.hpp"
#include "graph_calculus/csv.hpp"
#include "graph_calculus/error.hpp"

namespace gcalc {

struct Series {
  std::string group;  // value of the group_by column
  std::filesystem::path path;
  std::vector<double> x;
  std::vector<double> y;  // mean over rows sharing an x value
  std::optional<RateFit> fit;
  std::string fit_note;  // why there is no fit, when there is none
};

inline std::string sanitize_file_token(std::string_view s) {
  std::string out;
  for (const char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                      c == '-' || c == '_';
    out += keep ? c : '_';
  }
  return out.empty() ? "_" : out;
}

/// Groups are emitted in order of first appearance. Rows with an empty x or y
/// (failed cells) are skipped.
inline std::vector<Series> build_series(const Table& table, std::string_view x_axis, std::string_view y_column,
                                        std::string_view group_by) {
  const std::size_t xi = table.column(x_axis);
  const std::size_t yi = table.column(y_column);
  const std::size_t gi = table.column(group_by);

  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> raw;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[xi].empty() || row[yi].empty()) continue;
    const std::string where = "row " + std::to_string(r + 1);
    auto [it, inserted] = raw.try_emplace(row[gi]);
    if (inserted) order.push_back(row[gi]);
    it->second.first.push_back(parse_double(row[xi], where));
    it->second.second.push_back(parse_double(row[yi], where));
  }

  std::vector<Series> out;
  for (const auto& g : order) {
    const auto& [xs, ys] = raw[g];
    Series s;
    s.group = g;
    std::tie(s.x, s.y) = mean_by_x(xs, ys);
    try {
      RateFit fit = fit_power_law(s.x, s.y);
      fit.axis = std::string(x_axis);
      fit.response = std::string(y_column);
      s.fit = fit;
    } catch (const Error& e) {
      s.fit_note = e.what();
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Writes <out_dir>/series_<group_by>_<value>.csv for every group and
/// <out_dir>/plot_summary.txt with the slope of each series.
inline std::vector<Series> plot_data(const std::filesystem::path& results_csv, std::string_view x_axis,
                                     std::string_view y_column, std::string_view group_by,
                                     const std::filesystem::path& out_dir) {
  const Table table = read_table(results_csv);
  auto series = build_series(table, x_axis, y_column, group_by);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  std::string summary;
  for (auto& s : series) {
    s.path = out_dir / ("series_" + sanitize_file_token(group_by) + "_" + sanitize_file_token(s.group) + ".csv");
    std::string body = "# " + std::string(x_axis) + "," + std::string(y_column) + "\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) body += format_double(s.x[i]) + "," + format_double(s.y[i]) + "\n";
    write_file_atomic(s.path, body);

    summary += std::string(group_by) + "=" + s.group + " points=" + std::to_string(s.x.size());
    if (s.fit) {
      summary += " slope=" + format_double(s.fit->slope) + " intercept=" + format_double(s.fit->intercept) +
                 " r_squared=" + format_double(s.fit->r_squared);
    } else {
      summary += " slope=n/a (" + s.fit_note + ")";
    }
    summary += '\n';
  }
  write_file_atomic(out_dir / "plot_summary.txt", summary);
  return series;
}

}  // namespace gcalc
