#include "fzp300/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace fzp300 {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape " + a.shape_str() +
                         " does not match " + b.shape_str());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix init: " + std::to_string(data_.size()) +
                         " values for shape " + shape_str());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  m.fill(value);
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Matrix::reset(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0);
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double scalar) {
  for (double& v : data_) v *= scalar;
  return *this;
}

void Matrix::add_scaled(const Matrix& other, double scale) {
  require_same_shape(*this, other, "add_scaled");
  double* __restrict__ dst = data_.data();
  const double* __restrict__ src = other.data_.data();
  const std::size_t n = data_.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) dst[i] += scale * src[i];
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::require_finite(const std::string& what) const {
  if (!all_finite()) {
    throw NumericalError("non-finite values in " + what);
  }
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + a.shape_str() + " x " + b.shape_str());
  }
  out.reset(a.rows(), b.cols());
  const std::size_t n = b.cols();
  // i-k-j ordering: cache-friendly, and the per-entry summation order is
  // the same left-to-right inner-index order as the naive triple loop
  // (vectorization runs across j, not across the summation index).
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* __restrict__ crow = out.row(i);
    const double* arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const double* __restrict__ brow = b.row(k);
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

namespace {

// Vectorized dot product; the simd reduction fixes the lane layout, so
// results are deterministic for a given build.
double dot_fast(const double* __restrict__ a, const double* __restrict__ b,
                std::size_t n) {
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

void matmul_transb_into(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_transb: " + a.shape_str() + " x " + b.shape_str() + "^T");
  }
  out.reset(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      out(i, j) = dot_fast(arow, b.row(j), a.cols());
    }
  }
}

void matmul_transa_into(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_transa: " + a.shape_str() + "^T x " + b.shape_str());
  }
  out.reset(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k);
    const double* __restrict__ brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      double* __restrict__ crow = out.row(i);
#pragma omp simd
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c;
  matmul_into(a, b, c);
  return c;
}

Matrix matmul_transb(const Matrix& a, const Matrix& b) {
  Matrix c;
  matmul_transb_into(a, b, c);
  return c;
}

Matrix matmul_transa(const Matrix& a, const Matrix& b) {
  Matrix c;
  matmul_transa_into(a, b, c);
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.at(i) = a.at(i) * b.at(i);
  return c;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_dot");
  return dot_fast(a.data(), b.data(), a.size());
}

double frobenius_norm(const Matrix& m) { return std::sqrt(frobenius_dot(m, m)); }

double max_abs(const Matrix& m) {
  double mx = 0.0;
  for (double v : m.values()) mx = std::max(mx, std::fabs(v));
  return mx;
}

}  // namespace fzp300
