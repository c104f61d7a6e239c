#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace regseg {

// Dense row-major matrix of doubles. Rows are observations, columns are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix from_column(std::span<const double> column);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Squared Euclidean distance between equally sized vectors.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Weighted squared Euclidean distance: sum_v w_v (a_v - b_v)^2.
double weighted_squared_distance(std::span<const double> a, std::span<const double> b,
                                 std::span<const double> w);

}  // namespace regseg
