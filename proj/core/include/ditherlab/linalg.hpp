#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ditherlab {

/// Dense row-major matrix of doubles.
///
/// Batches are stored feature-major (features x batch) so that one matmul
/// pushes a whole batch through a layer. Every public operation returns a new
/// matrix and throws NumericError if the result would contain NaN or Inf.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix ones(std::size_t rows, std::size_t cols) { return {rows, cols, 1.0}; }
  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  // Copies columns [begin, end) into a new matrix.
  Matrix columns(std::size_t begin, std::size_t end) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

enum class ElementwiseOp { kAdd, kSub, kMul };

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix elementwise(const Matrix& a, const Matrix& b, ElementwiseOp op);
inline Matrix add(const Matrix& a, const Matrix& b) { return elementwise(a, b, ElementwiseOp::kAdd); }
inline Matrix sub(const Matrix& a, const Matrix& b) { return elementwise(a, b, ElementwiseOp::kSub); }
inline Matrix hadamard(const Matrix& a, const Matrix& b) { return elementwise(a, b, ElementwiseOp::kMul); }

// bias is (a.rows x 1) and is added to every column of a.
Matrix broadcast_add_col(const Matrix& a, const Matrix& bias);
Matrix scale(const Matrix& a, double k);

// a * b^T without materialising the transpose.
Matrix matmul_transposed_rhs(const Matrix& a, const Matrix& b);
// a^T * b without materialising the transpose.
Matrix matmul_transposed_lhs(const Matrix& a, const Matrix& b);

// (rows x 1) column of per-row sums.
Matrix row_sum(const Matrix& a);

/// Column-compressed view of a matrix whose entries mostly equal one
/// background value (MNIST pixels that were byte 0 before normalisation).
///
/// Only entries that differ from the background are stored, as offsets from it.
class CompressedColumns {
 public:
  CompressedColumns() = default;
  explicit CompressedColumns(const Matrix& dense, double background);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return col_start_.empty() ? 0 : col_start_.size() - 1; }
  std::size_t stored() const noexcept { return row_index_.size(); }
  double background() const noexcept { return background_; }

  Matrix to_dense() const;

  // weights * dense(), shape (weights.rows x cols()).
  friend Matrix matmul(const Matrix& weights, const CompressedColumns& x);

 private:
  std::size_t rows_ = 0;
  double background_ = 0.0;
  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> row_index_;
  std::vector<double> delta_;
};

Matrix matmul(const Matrix& weights, const CompressedColumns& x);

}  // namespace ditherlab
