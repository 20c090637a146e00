#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace moesim {

// Minimal CSV writing with a fixed header row; numbers are written with
// %.17g so identical doubles produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
};

std::string format_double(double v);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

// Rectangular numeric CSV (no header detection: every cell must parse).
// Throws with row/column position on a bad cell.
Eigen::MatrixXd read_matrix_csv(const std::string& path);

}  // namespace moesim
