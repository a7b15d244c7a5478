#include "fdsketch/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdsk {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix DenseMatrix::from_data(std::size_t rows, std::size_t cols,
                                   std::vector<double> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data length " +
                                std::to_string(data.size()) +
                                " does not match " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  }
  require_finite(data, "DenseMatrix");
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::set_row(std::size_t r, std::span<const double> values) {
  if (values.size() != cols_) {
    throw std::invalid_argument("set_row: expected " + std::to_string(cols_) +
                                " values, got " +
                                std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), data_.begin() + r * cols_);
}

void DenseMatrix::zero_row(std::size_t r) {
  std::fill_n(data_.begin() + r * cols_, cols_, 0.0);
}

bool DenseMatrix::row_is_zero(std::size_t r) const {
  auto v = row(r);
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double frobenius_sq(const DenseMatrix& m) {
  return frobenius_sq(std::span<const double>(m.data(), m.size()));
}

double frobenius_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void mat_vec(const DenseMatrix& m, std::span<const double> x,
             std::span<double> y) {
  for (std::size_t r = 0; r < m.rows(); ++r) y[r] = dot(m.row(r), x);
}

void mat_t_vec(const DenseMatrix& m, std::span<const double> x,
               std::span<double> y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double w = x[r];
    if (w == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += w * row[c];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) +
                                  ": non-finite entry rejected");
    }
  }
}

}  // namespace fdsk
