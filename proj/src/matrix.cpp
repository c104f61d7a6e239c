#include "regseg/matrix.hpp"

#include "regseg/error.hpp"

namespace regseg {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) throw SizeError("ragged rows in matrix construction");
    for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Matrix Matrix::from_column(std::span<const double> column) {
  Matrix m(column.size(), 1);
  for (std::size_t r = 0; r < column.size(); ++r) m(r, 0) = column[r];
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) throw SizeError("column length does not match row count");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double weighted_squared_distance(std::span<const double> a, std::span<const double> b,
                                 std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += w[i] * d * d;
  }
  return acc;
}

}  // namespace regseg
