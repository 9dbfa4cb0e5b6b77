#include "nlsrom/linalg/circulant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::linalg {

CirculantOperator::CirculantOperator(std::vector<std::size_t> extents,
                                     std::vector<double> first_column)
    : first_column_(std::move(first_column)),
      fft_(std::make_shared<const FftNd>(std::move(extents))) {
  if (first_column_.size() != fft_->size())
    throw std::invalid_argument("CirculantOperator: first column size does not match extents");
  if (!all_finite(first_column_))
    throw std::invalid_argument("CirculantOperator: non-finite generator");

  eigenvalues_.assign(first_column_.begin(), first_column_.end());
  fft_->forward(eigenvalues_);

  const auto& ext = fft_->extents();
  const std::size_t n1 = ext.size() == 2 ? ext[1] : ext[0];
  for (std::size_t idx = 0; idx < first_column_.size(); ++idx) {
    if (first_column_[idx] == 0.0) continue;
    taps_.push_back({idx / n1, idx % n1, first_column_[idx]});
  }
}

void CirculantOperator::apply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  apply_add(1.0, x, y);
}

std::vector<double> CirculantOperator::apply(std::span<const double> x) const {
  std::vector<double> y(x.size());
  apply(x, y);
  return y;
}

void CirculantOperator::apply_add(double alpha, std::span<const double> x,
                                  std::span<double> y) const {
  if (x.size() != size() || y.size() != size())
    throw std::invalid_argument("CirculantOperator::apply: size mismatch");
  const auto& ext = extents();
  const std::size_t n0 = ext.size() == 2 ? ext[0] : 1;
  const std::size_t n1 = ext.size() == 2 ? ext[1] : ext[0];
  const auto& k = simd::active_kernels();
  // y[i0, i1] += c * x[i0 - s0, i1 - s1]  (indices modulo the extents)
  for (const Tap& t : taps_) {
    const double c = alpha * t.coefficient;
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
      const std::size_t src = (i0 + n0 - t.row_shift) % n0;
      const double* xr = x.data() + src * n1;
      double* yr = y.data() + i0 * n1;
      const std::size_t s = t.col_shift;
      // i1 >= s reads x[i1 - s]; i1 < s wraps to x[n1 - s + i1]
      k.axpy(c, xr, yr + s, n1 - s);
      if (s > 0) k.axpy(c, xr + (n1 - s), yr, s);
    }
  }
}

CirculantOperator CirculantOperator::scaled(double factor) const {
  std::vector<double> col(first_column_);
  for (auto& v : col) v *= factor;
  return CirculantOperator(extents(), std::move(col));
}

DenseMatrix CirculantOperator::to_dense() const {
  const std::size_t n = size();
  DenseMatrix d(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(e, d.col(j));
    e[j] = 0.0;
  }
  return d;
}

CirculantOperator circulant_from_stencil(std::size_t m, std::array<double, 3> stencil) {
  if (m < 3) throw std::invalid_argument("circulant_from_stencil: m must be >= 3");
  std::vector<double> col(m, 0.0);
  col[0] = stencil[1];
  col[1] = stencil[0];
  col[m - 1] = stencil[2];
  return CirculantOperator({m}, std::move(col));
}

CirculantOperator kronecker_sum(const CirculantOperator& a, const CirculantOperator& b) {
  if (a.extents().size() != 1 || b.extents().size() != 1)
    throw std::invalid_argument("kronecker_sum: operands must be 1D");
  const std::size_t n0 = a.size(), n1 = b.size();
  std::vector<double> gen(n0 * n1, 0.0);
  for (std::size_t i = 0; i < n0; ++i) gen[i * n1] += a.first_column()[i];
  for (std::size_t j = 0; j < n1; ++j) gen[j] += b.first_column()[j];
  return CirculantOperator({n0, n1}, std::move(gen));
}

void circulant_solve_inplace(const CirculantOperator& op, cplx a, cplx b, std::span<cplx> x) {
  if (x.size() != op.size()) throw std::invalid_argument("circulant_solve: size mismatch");
  const auto lambda = op.eigenvalues();
  double lam_max = 0.0;
  for (const cplx& l : lambda) lam_max = std::max(lam_max, std::abs(l));
  const double scale = std::abs(a) + std::abs(b) * lam_max;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const cplx d = a + b * lambda[k];
    if (scale == 0.0 || std::abs(d) <= 1e-14 * scale)
      throw SingularOperatorError(
          "circulant_solve: shifted operator is singular at mode " + std::to_string(k), k);
  }
  op.fft().forward(x);
  for (std::size_t k = 0; k < lambda.size(); ++k) x[k] /= a + b * lambda[k];
  op.fft().inverse(x);
}

std::vector<cplx> circulant_solve(const CirculantOperator& op, cplx a, cplx b,
                                  std::span<const cplx> rhs) {
  std::vector<cplx> x(rhs.begin(), rhs.end());
  circulant_solve_inplace(op, a, b, x);
  return x;
}

}  // namespace nlsrom::linalg
