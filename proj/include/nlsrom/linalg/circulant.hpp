#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "nlsrom/linalg/fft.hpp"
#include "nlsrom/linalg/matrix.hpp"

namespace nlsrom::linalg {

class SingularOperatorError : public std::runtime_error {
 public:
  SingularOperatorError(const std::string& what, std::size_t mode)
      : std::runtime_error(what), mode_(mode) {}
  std::size_t mode() const noexcept { return mode_; }

 private:
  std::size_t mode_;
};

// Periodic convolution operator on a 1D or 2D (row-major) grid: a circulant
// matrix in 1D, block-circulant with circulant blocks in 2D. The operator is
// defined by its first column (the image of e_1); its eigenvalues are the DFT
// of that column and are cached at construction.
class CirculantOperator {
 public:
  CirculantOperator(std::vector<std::size_t> extents, std::vector<double> first_column);

  std::size_t size() const noexcept { return first_column_.size(); }
  const std::vector<std::size_t>& extents() const noexcept { return fft_->extents(); }
  std::span<const double> first_column() const noexcept { return first_column_; }
  std::span<const cplx> eigenvalues() const noexcept { return eigenvalues_; }
  const FftNd& fft() const noexcept { return *fft_; }

  // y = C x
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  // y += alpha C x
  void apply_add(double alpha, std::span<const double> x, std::span<double> y) const;

  // Operator scaled by a constant (same sparsity, eigenvalues scaled).
  CirculantOperator scaled(double factor) const;

  DenseMatrix to_dense() const;

 private:
  struct Tap {
    std::size_t row_shift;
    std::size_t col_shift;
    double coefficient;
  };

  std::vector<double> first_column_;
  std::shared_ptr<const FftNd> fft_;
  std::vector<cplx> eigenvalues_;
  std::vector<Tap> taps_;  // nonzero entries of the generator
};

// Circulant m x m operator with (left, center, right) on the three periodic
// diagonals: row i reads x_{i-1}, x_i, x_{i+1}. Requires m >= 3.
CirculantOperator circulant_from_stencil(std::size_t m, std::array<double, 3> stencil);

// Kronecker sum A (x) I + I (x) B of two 1D operators on a row-major
// extents {A.size(), B.size()} grid.
CirculantOperator kronecker_sum(const CirculantOperator& a, const CirculantOperator& b);

// Solves (a I + b C) x = rhs via diagonalization by the DFT.
// Throws SingularOperatorError when some |a + b lambda_k| vanishes relative to
// the operator scale |a| + |b| max|lambda| (threshold 1e-14).
std::vector<cplx> circulant_solve(const CirculantOperator& op, cplx a, cplx b,
                                  std::span<const cplx> rhs);

// In-place variant without allocation of the result.
void circulant_solve_inplace(const CirculantOperator& op, cplx a, cplx b, std::span<cplx> x);

}  // namespace nlsrom::linalg
