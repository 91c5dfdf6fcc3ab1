#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace sfdi {

/// Numeric table read from a header-first CSV file.
struct CsvTable {
  std::vector<std::string> headers;
  Eigen::MatrixXd values;  // one row per record
};

/// Parses a comma-separated file whose first row is a header and whose
/// remaining rows are numeric. Throws std::runtime_error on malformed input,
/// non-numeric cells and non-finite values (row numbers are 1-based data rows).
CsvTable read_csv(const std::filesystem::path& path);

/// Writes `values` under `headers` using 17 significant digits, so that
/// read_csv returns bit-identical doubles.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& headers,
               const Eigen::MatrixXd& values);

}  // namespace sfdi
