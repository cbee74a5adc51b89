#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fzp300/errors.hpp"

namespace fzp300 {

// Dense row-major matrix of 64-bit floats. This is the only numeric
// container in the project; vectors are 1xN or Nx1 matrices where a shape
// matters and plain std::vector<double> elsewhere.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix filled(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& at(std::size_t i) { return data_[i]; }
  double at(std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  void fill(double value);
  void set_zero() { fill(0.0); }
  // Reshape to rows x cols and zero all entries (storage reused when the
  // element count matches).
  void reset(std::size_t rows, std::size_t cols);

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  // In-place elementwise updates.
  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double scalar);
  void add_scaled(const Matrix& other, double scale);  // this += scale * other

  bool all_finite() const;
  // Throws NumericalError naming `what` when any entry is NaN/Inf.
  void require_finite(const std::string& what) const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

// Standard product with deterministic accumulation order (row-major,
// left-to-right over the inner index). Throws DimensionError on mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a * b^T without forming the transpose.
Matrix matmul_transb(const Matrix& a, const Matrix& b);
// c = a^T * b without forming the transpose.
Matrix matmul_transa(const Matrix& a, const Matrix& b);

// Overwrite variants into a caller-owned output (resized as needed);
// hot-loop versions that avoid per-call allocation.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_transb_into(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_transa_into(const Matrix& a, const Matrix& b, Matrix& out);

Matrix transpose(const Matrix& m);
Matrix hadamard(const Matrix& a, const Matrix& b);

// Frobenius inner product sum_ij a_ij b_ij.
double frobenius_dot(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

// Trainable parameter: value plus an accumulated gradient of the same shape.
struct GradSlot {
  Matrix value;
  Matrix grad;
  bool requires_grad = true;

  GradSlot() = default;
  explicit GradSlot(Matrix v)
      : value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.set_zero(); }
};

}  // namespace fzp300
