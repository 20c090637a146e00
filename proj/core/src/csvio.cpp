#include "moesim/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace moesim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  std::size_t columns;
};

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out)
    throw std::runtime_error("CsvWriter: cannot open " + path);
  impl_->columns = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << header[i];
  }
  impl_->out << '\n';
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != impl_->columns)
    throw std::invalid_argument("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << format_double(values[i]);
  }
  impl_->out << '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != impl_->columns)
    throw std::invalid_argument("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << '\n';
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(cell[pos])) ++pos;
        if (pos != cell.size()) throw std::invalid_argument("trailing");
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("read_matrix_csv: non-numeric cell at line " +
                                 std::to_string(lineno) + ", column " +
                                 std::to_string(col));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("read_matrix_csv: ragged row at line " +
                               std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_matrix_csv: empty file");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace moesim
