#include "ditherlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ditherlab/error.hpp"

namespace ditherlab {
namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// acc[i] += k * src[i]. Elementwise, so every instruction set gives the
// same bits.
__attribute__((target_clones("avx2", "default"))) void axpy(double k, const double* __restrict src,
                                                             double* __restrict acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += k * src[i];
}

// Four axpys in one pass; additions happen in the same order as four
// separate calls.
__attribute__((target_clones("avx2", "default"))) void axpy4(const double* k, const double* const* src,
                                                              double* __restrict acc, std::size_t n) {
  const double* __restrict s0 = src[0];
  const double* __restrict s1 = src[1];
  const double* __restrict s2 = src[2];
  const double* __restrict s3 = src[3];
  const double k0 = k[0], k1 = k[1], k2 = k[2], k3 = k[3];
  for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + k0 * s0[i] + k1 * s1[i] + k2 * s2[i] + k3 * s3[i];
}

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw ConfigError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

Matrix checked(Matrix m, const char* op) {
  if (!m.all_finite()) throw NumericError(std::string(op) + ": non-finite result");
  return m;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw NumericError("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ConfigError("Matrix: " + std::to_string(values_.size()) + " values for shape " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!all_finite()) throw NumericError("Matrix: non-finite value");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ConfigError("Matrix: ragged initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw NumericError("Matrix: non-finite value");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::columns(std::size_t begin, std::size_t end) const {
  if (begin > end || end > cols_) {
    throw ConfigError("Matrix::columns: range [" + std::to_string(begin) + ", " +
                      std::to_string(end) + ") outside " + std::to_string(cols_) + " columns");
  }
  Matrix out(rows_, end - begin);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(values_.data() + r * cols_ + begin, end - begin, out.values_.data() + r * out.cols_);
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  const std::size_t n = b.cols();
  Matrix out(a.rows(), n);
  // i-k-j order keeps the inner loop a contiguous axpy over rows of b.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      axpy(aik, b.row(k).data(), dst, n);
    }
  }
  return checked(std::move(out), "matmul");
}

Matrix matmul_transposed_rhs(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_mismatch("matmul_transposed_rhs", a, b);
  return matmul(a, transpose(b));
}

Matrix matmul_transposed_lhs(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_mismatch("matmul_transposed_lhs", a, b);
  const std::size_t n = b.cols();
  Matrix out(a.cols(), n);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* src = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      axpy(aki, src, out.row(i).data(), n);
    }
  }
  return checked(std::move(out), "matmul_transposed_lhs");
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

Matrix elementwise(const Matrix& a, const Matrix& b, ElementwiseOp op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch("elementwise", a, b);
  Matrix out(a.rows(), a.cols());
  auto x = a.values();
  auto y = b.values();
  auto z = out.values();
  switch (op) {
    case ElementwiseOp::kAdd:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
      break;
    case ElementwiseOp::kSub:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
      break;
    case ElementwiseOp::kMul:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
      break;
  }
  return checked(std::move(out), "elementwise");
}

Matrix broadcast_add_col(const Matrix& a, const Matrix& bias) {
  if (bias.rows() != a.rows() || bias.cols() != 1) shape_mismatch("broadcast_add_col", a, bias);
  Matrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double b = bias(r, 0);
    for (double& v : out.row(r)) v += b;
  }
  return checked(std::move(out), "broadcast_add_col");
}

Matrix scale(const Matrix& a, double k) {
  Matrix out = a;
  for (double& v : out.values()) v *= k;
  return checked(std::move(out), "scale");
}

Matrix row_sum(const Matrix& a) {
  Matrix out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (double v : a.row(r)) acc += v;
    out(r, 0) = acc;
  }
  return checked(std::move(out), "row_sum");
}

CompressedColumns::CompressedColumns(const Matrix& dense, double background)
    : rows_(dense.rows()), background_(background) {
  col_start_.reserve(dense.cols() + 1);
  col_start_.push_back(0);
  for (std::size_t c = 0; c < dense.cols(); ++c) {
    for (std::size_t r = 0; r < dense.rows(); ++r) {
      const double v = dense(r, c);
      if (v != background) {
        row_index_.push_back(r);
        delta_.push_back(v - background);
      }
    }
    col_start_.push_back(row_index_.size());
  }
}

Matrix CompressedColumns::to_dense() const {
  Matrix out(rows_, cols(), background_);
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t i = col_start_[c]; i < col_start_[c + 1]; ++i) {
      out(row_index_[i], c) = background_ + delta_[i];
    }
  }
  return out;
}

Matrix matmul(const Matrix& weights, const CompressedColumns& x) {
  if (weights.cols() != x.rows()) {
    throw ConfigError("matmul: shape mismatch " + shape_str(weights) + " vs compressed " +
                      std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  const std::size_t out_rows = weights.rows();
  const Matrix wt = transpose(weights);
  const Matrix base = scale(row_sum(weights), x.background());

  // Accumulate column-major, one contiguous column per image, then transpose.
  Matrix out_t(x.cols(), out_rows);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double* acc = out_t.row(c).data();
    std::copy_n(base.values().data(), out_rows, acc);
    std::size_t i = x.col_start_[c];
    const std::size_t end = x.col_start_[c + 1];
    for (; i + 4 <= end; i += 4) {
      const double* src[4] = {wt.row(x.row_index_[i]).data(), wt.row(x.row_index_[i + 1]).data(),
                              wt.row(x.row_index_[i + 2]).data(), wt.row(x.row_index_[i + 3]).data()};
      axpy4(&x.delta_[i], src, acc, out_rows);
    }
    for (; i < end; ++i) axpy(x.delta_[i], wt.row(x.row_index_[i]).data(), acc, out_rows);
  }
  return checked(transpose(out_t), "matmul");
}

}  // namespace ditherlab
