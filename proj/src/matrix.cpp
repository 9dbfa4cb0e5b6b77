#include "nlsrom/linalg/matrix.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::linalg {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
  values_.assign(rows * cols, fill);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_columns(std::size_t rows, std::size_t cols,
                                      std::vector<double> values) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("DenseMatrix: dimensions must be >= 1");
  if (values.size() != rows * cols)
    throw std::invalid_argument("DenseMatrix: value count does not match dimensions");
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.values_ = std::move(values);
  return m;
}

DenseMatrix DenseMatrix::leading_columns(std::size_t n) const {
  if (n == 0 || n > cols_) throw std::out_of_range("leading_columns: bad column count");
  return from_columns(rows_, n, std::vector<double>(values_.begin(), values_.begin() + rows_ * n));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

void DenseMatrix::release() {
  rows_ = cols_ = 0;
  std::vector<double>().swap(values_);
}

DenseMatrix matmul(const DenseMatrix& a, Op op_a, const DenseMatrix& b, Op op_b) {
  const std::size_t m = op_a == Op::none ? a.rows() : a.cols();
  const std::size_t k = op_a == Op::none ? a.cols() : a.rows();
  const std::size_t kb = op_b == Op::none ? b.rows() : b.cols();
  const std::size_t n = op_b == Op::none ? b.cols() : b.rows();
  if (k != kb) throw std::invalid_argument("matmul: inner dimensions differ");
  DenseMatrix c(m, n);
  cblas_dgemm(CblasColMajor, op_a == Op::none ? CblasNoTrans : CblasTrans,
              op_b == Op::none ? CblasNoTrans : CblasTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), 1.0, a.data(), static_cast<int>(a.rows()),
              b.data(), static_cast<int>(b.rows()), 0.0, c.data(), static_cast<int>(m));
  return c;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x, Op op) {
  if (op == Op::none) {
    if (x.size() != a.cols()) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) simd::axpy(x[j], a.col(j), y);
    return y;
  }
  if (x.size() != a.rows()) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = simd::dot(a.col(j), x);
  return y;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.values()); }

double norm2(std::span<const double> x) {
  // scaled accumulation keeps tiny residuals from underflowing
  double scale = 0.0, ssq = 1.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double orthonormality_defect(const DenseMatrix& a) {
  DenseMatrix g = matmul(a, Op::transpose, a, Op::none);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  std::vector<double> s(g.rows());
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(g.rows()),
                     static_cast<lapack_int>(g.cols()), g.data(), static_cast<lapack_int>(g.rows()),
                     s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("orthonormality_defect: SVD failed");
  return s.empty() ? 0.0 : s.front();
}

void orthonormalize_columns(DenseMatrix& a) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  if (m < n) throw std::invalid_argument("orthonormalize_columns: need rows >= cols");
  std::vector<double> tau(static_cast<std::size_t>(n));
  lapack_int info = LAPACKE_dgeqrf(LAPACK_COL_MAJOR, m, n, a.data(), m, tau.data());
  if (info != 0) throw std::runtime_error("orthonormalize_columns: dgeqrf failed");
  info = LAPACKE_dorgqr(LAPACK_COL_MAJOR, m, n, n, a.data(), m, tau.data());
  if (info != 0) throw std::runtime_error("orthonormalize_columns: dorgqr failed");
}

void solve_dense(DenseMatrix a, std::span<double> b) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols() || b.size() != a.rows())
    throw std::invalid_argument("solve_dense: dimension mismatch");
  std::vector<lapack_int> piv(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, n, 1, a.data(), n, piv.data(), b.data(), n);
  if (info > 0)
    throw std::runtime_error("solve_dense: singular matrix (zero pivot at " + std::to_string(info) +
                             ")");
  if (info < 0) throw std::runtime_error("solve_dense: invalid argument");
}

}  // namespace nlsrom::linalg
