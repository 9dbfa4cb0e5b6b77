#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nlsrom::linalg {

// Column-major dense real matrix. Snapshot matrices store one state per column.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static DenseMatrix identity(std::size_t n);
  // Takes ownership of column-major `values` (size rows*cols).
  static DenseMatrix from_columns(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) noexcept { return {values_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const noexcept {
    return {values_.data() + j * rows_, rows_};
  }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  // First `n` columns as a new matrix.
  DenseMatrix leading_columns(std::size_t n) const;
  DenseMatrix transposed() const;

  // Frees the storage; the matrix becomes empty.
  void release();

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

enum class Op { none, transpose };

// C = op(A) op(B)
DenseMatrix matmul(const DenseMatrix& a, Op op_a, const DenseMatrix& b, Op op_b);
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  return matmul(a, Op::none, b, Op::none);
}

// y = A x  or  y = A^T x
std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x, Op op = Op::none);

double frobenius_norm(const DenseMatrix& a);
double norm2(std::span<const double> x);
double max_abs(std::span<const double> x);
bool all_finite(std::span<const double> x);

// Spectral norm of A^T A - I (for checking orthonormal columns).
double orthonormality_defect(const DenseMatrix& a);

// Replaces the columns of `a` by an orthonormal basis of their span
// (Householder QR, thin Q). Requires rows >= cols.
void orthonormalize_columns(DenseMatrix& a);

// Solves A x = b in place (LU with partial pivoting). Throws on a singular matrix.
void solve_dense(DenseMatrix a, std::span<double> b);

}  // namespace nlsrom::linalg
