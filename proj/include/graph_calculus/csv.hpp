#pragma once

// Plain CSV input/output for point clouds, vertex functions, edge fields and
// dense matrices. Numbers are written with 17 significant digits so that a
// write/read cycle reproduces every double exactly. Lines starting with '#'
// and blank lines are ignored on input.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "graph_calculus/calculus.hpp"
#include "graph_calculus/error.hpp"
#include "graph_calculus/point_cloud.hpp"

namespace gcalc {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view where) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw IoError(std::string(where) + ": cannot parse '" + std::string(text) + "' as a number");
  return value;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file and a rename, so readers never observe a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

/// Numeric rows of a CSV document.
inline std::vector<std::vector<double>> parse_numeric_csv(std::string_view text, std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    for (const auto& field : split_csv_line(line)) row.push_back(parse_double(field, where));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  return parse_numeric_csv(read_file(path), path.string());
}

inline PointCloud read_point_cloud_csv(const std::filesystem::path& path) {
  try {
    return PointCloud::from_rows(read_numeric_csv(path));
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline std::string point_cloud_to_csv(const PointCloud& cloud) {
  std::string out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out += ',';
      out += format_double(p[j]);
    }
    out += '\n';
  }
  return out;
}

/// One value per line.
inline std::string vector_to_csv(std::span<const double> values) {
  std::string out;
  for (const double x : values) {
    out += format_double(x);
    out += '\n';
  }
  return out;
}

inline VertexFunction read_vertex_function_csv(const std::filesystem::path& path) {
  std::vector<double> values;
  for (const auto& row : read_numeric_csv(path)) {
    if (row.size() != 1)
      throw IoError(path.string() + ": expected one value per line, found a row with " + std::to_string(row.size()));
    values.push_back(row.front());
  }
  return VertexFunction(std::move(values));
}

/// Row-major dense matrix.
inline std::string matrix_to_csv(std::span<const double> values, std::size_t rows, std::size_t cols) {
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += format_double(values[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

inline std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return matrix_to_csv(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())),
                       static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
}

inline std::string edge_field_to_csv(const EdgeField& f) {
  const auto dense = f.to_dense();
  return matrix_to_csv(dense, f.size(), f.size());
}

inline EdgeField read_edge_field_csv(const std::filesystem::path& path, std::shared_ptr<const EdgePattern> pattern) {
  const auto rows = read_numeric_csv(path);
  const std::size_t n = pattern->n;
  if (rows.size() != n)
    throw IoError(path.string() + ": expected " + std::to_string(n) + " rows, found " + std::to_string(rows.size()));
  std::vector<double> dense;
  dense.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n)
      throw IoError(path.string() + ": row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                    " columns, expected " + std::to_string(n));
    dense.insert(dense.end(), rows[r].begin(), rows[r].end());
  }
  try {
    return EdgeField::from_dense(std::move(pattern), dense);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// A CSV with a header row, kept as strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    std::string valid;
    for (const auto& h : header) valid += (valid.empty() ? "" : ", ") + h;
    throw ConfigError("unknown column '" + std::string(name) + "'; available: " + valid);
  }
};

inline Table parse_table(std::string_view text, std::string_view source) {
  Table t;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw IoError(std::string(source) + ": row with " + std::to_string(fields.size()) + " fields, header has " +
                    std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw IoError(std::string(source) + ": empty table");
  return t;
}

inline Table read_table(const std::filesystem::path& path) { return parse_table(read_file(path), path.string()); }

}  // namespace gcalc
