#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fdsk {

/// Dense row-major matrix of doubles. The storage for inputs, sketches and
/// factor matrices. Entries are required to be finite; constructors taking
/// external data validate, internally computed results are trusted.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);  // zero initialized

  static DenseMatrix from_data(std::size_t rows, std::size_t cols,
                               std::vector<double> data);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }

  void set_row(std::size_t r, std::span<const double> values);
  void zero_row(std::size_t r);
  bool row_is_zero(std::size_t r) const;

  DenseMatrix transposed() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Sum of squared entries.
double frobenius_sq(const DenseMatrix& m);
double frobenius_sq(std::span<const double> v);

/// y = M x  (y has m.rows() entries)
void mat_vec(const DenseMatrix& m, std::span<const double> x,
             std::span<double> y);
/// y = M^T x  (y has m.cols() entries)
void mat_t_vec(const DenseMatrix& m, std::span<const double> x,
               std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(std::span<const double> v, const char* what);

}  // namespace fdsk
