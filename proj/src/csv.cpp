#include "symreg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

Dataset parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError(source + ": empty file, expected header x1,...,xm,y");

  const auto header = split(lines.front());
  if (header.size() < 2 || header.back() != "y") {
    throw DataError(source + ": line 1: header must be x1,...,xm,y");
  }
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw DataError(source + ": line 1, column " + std::to_string(j + 1) + ": expected 'x" +
                      std::to_string(j + 1) + "', got '" + std::string(header[j]) + "'");
    }
  }
  const int m = static_cast<int>(header.size()) - 1;

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = source + ": line " + std::to_string(i + 1);
    if (trim(lines[i]).empty()) throw DataError(where + ": empty line");
    const auto cells = split(lines[i]);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0.0;
      const char* first = cells[j].data();
      const char* last = first + cells[j].size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      const std::string col = std::string(header[j]);
      if (cells[j].empty() || ec != std::errc() || ptr != last) {
        throw DataError(where + ", column " + col + ": not a number: '" + std::string(cells[j]) +
                        "'");
      }
      if (!std::isfinite(v)) throw DataError(where + ", column " + col + ": non-finite value");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw DataError(source + ": need at least 2 data rows, got " + std::to_string(rows.size()));
  }
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), m);
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < m; ++j) d.X(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    d.y(static_cast<Eigen::Index>(i)) = rows[i].back();
  }
  d.provenance = source;
  return d;
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path);
}

}  // namespace symreg
