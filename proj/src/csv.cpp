#include "sfdi/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace sfdi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  for (auto h : split(line)) table.headers.emplace_back(h);
  const std::size_t cols = table.headers.size();

  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++rows;
    const auto cells = split(line);
    if (cells.size() != cols) {
      throw std::runtime_error("row " + std::to_string(rows) + " has " +
                               std::to_string(cells.size()) + " columns, header has " +
                               std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      double value = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw std::runtime_error("non-numeric value '" + std::string(cell) + "' at row " +
                                 std::to_string(rows) + ", column " + table.headers[c]);
      }
      if (!std::isfinite(value)) {
        throw std::runtime_error("non-finite value at row " + std::to_string(rows) +
                                 ", column " + table.headers[c]);
      }
      flat.push_back(value);
    }
  }

  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          flat[r * cols + c];
  return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& headers,
               const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(headers.size()) != values.cols())
    throw std::invalid_argument("write_csv: header count does not match column count");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");

  for (std::size_t c = 0; c < headers.size(); ++c) out << (c ? "," : "") << headers[c];
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace sfdi
