#include "nlsrom/linalg/svd.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::linalg {
namespace {

void require_finite(const DenseMatrix& y, const char* who) {
  if (y.empty()) throw std::invalid_argument(std::string(who) + ": empty matrix");
  if (!all_finite(y.values()))
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

// One-sided Jacobi on the columns of a tall matrix (rows >= cols).
SvdResult jacobi_tall(DenseMatrix g) {
  const std::size_t m = g.rows(), n = g.cols();
  DenseMatrix v = DenseMatrix::identity(n);
  const auto& k = simd::active_kernels();
  const double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 80;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* gp = g.col(p).data();
        double* gq = g.col(q).data();
        const double alpha = k.dot(gp, gp, m);
        const double beta = k.dot(gq, gq, m);
        const double gamma = k.dot(gp, gq, m);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double a = gp[i], b = gq[i];
          gp[i] = c * a - s * b;
          gq[i] = s * a + c * b;
        }
        double* vp = v.col(p).data();
        double* vq = v.col(q).data();
        for (std::size_t i = 0; i < n; ++i) {
          const double a = vp[i], b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = norm2(g.col(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  SvdResult out{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t j = order[jj];
    out.sigma[jj] = norms[j];
    std::copy_n(v.col(j).data(), n, out.v.col(jj).data());
    if (norms[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, jj) = g(i, j) / norms[j];
    }
  }
  // Exactly-zero singular values leave U columns undefined; complete them to an
  // orthonormal set with Gram-Schmidt against unit vectors.
  std::size_t next_unit = 0;
  for (std::size_t jj = 0; jj < n; ++jj) {
    if (out.sigma[jj] > 0.0) continue;
    for (; next_unit < m; ++next_unit) {
      auto col = out.u.col(jj);
      std::fill(col.begin(), col.end(), 0.0);
      col[next_unit] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t c = 0; c < n; ++c) {
          if (c == jj || (out.sigma[c] == 0.0 && c > jj)) continue;
          const double d = simd::dot(out.u.col(c), col);
          simd::axpy(-d, out.u.col(c), col);
        }
      const double nrm = norm2(col);
      if (nrm > 0.5) {
        for (auto& x : col) x /= nrm;
        ++next_unit;
        break;
      }
    }
  }
  return out;
}

}  // namespace

SvdResult svd(const DenseMatrix& y, SvdVectors vectors) {
  require_finite(y, "svd");
  const auto m = static_cast<lapack_int>(y.rows());
  const auto n = static_cast<lapack_int>(y.cols());
  const lapack_int k = std::min(m, n);
  DenseMatrix a = y;
  SvdResult out;
  out.sigma.resize(static_cast<std::size_t>(k));
  lapack_int info = 0;

  switch (vectors) {
    case SvdVectors::none:
      info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, out.sigma.data(), nullptr, 1,
                            nullptr, 1);
      break;
    case SvdVectors::both: {
      DenseMatrix u(static_cast<std::size_t>(m), static_cast<std::size_t>(k));
      DenseMatrix vt(static_cast<std::size_t>(k), static_cast<std::size_t>(n));
      info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, out.sigma.data(), u.data(), m,
                            vt.data(), k);
      out.u = std::move(u);
      out.v = vt.transposed();
      break;
    }
    case SvdVectors::left: {
      if (m >= n) {
        DenseMatrix vt(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'O', m, n, a.data(), m, out.sigma.data(), nullptr,
                              1, vt.data(), n);
        out.u = std::move(a);  // overwritten with the leading left singular vectors
      } else {
        DenseMatrix u(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
        info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'O', m, n, a.data(), m, out.sigma.data(),
                              u.data(), m, nullptr, 1);
        out.u = std::move(u);
      }
      break;
    }
  }
  if (info != 0) throw std::runtime_error("svd: LAPACK dgesdd failed (info " + std::to_string(info) + ")");
  return out;
}

SvdResult jacobi_svd(const DenseMatrix& y) {
  require_finite(y, "jacobi_svd");
  if (y.rows() >= y.cols()) return jacobi_tall(y);
  SvdResult t = jacobi_tall(y.transposed());
  std::swap(t.u, t.v);
  return t;
}

SvdResult randomized_svd(const DenseMatrix& y, std::size_t target_rank,
                         const RandomizedSvdOptions& options) {
  require_finite(y, "randomized_svd");
  const std::size_t m = y.rows(), n = y.cols();
  if (target_rank == 0) throw std::invalid_argument("randomized_svd: target_rank must be >= 1");
  if (target_rank > std::min(m, n))
    throw std::invalid_argument("randomized_svd: target_rank exceeds min(rows, cols)");
  const std::size_t sketch = std::min(target_rank + options.oversampling, std::min(m, n));

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix omega(n, sketch);
  for (double& x : omega.values()) x = normal(rng);

  DenseMatrix q = matmul(y, omega);
  orthonormalize_columns(q);
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    DenseMatrix z = matmul(y, Op::transpose, q, Op::none);
    orthonormalize_columns(z);
    q = matmul(y, z);
    orthonormalize_columns(q);
  }

  // B^T = Y^T Q is n x sketch (tall). With B^T = Q_2 R and R = U_r S V_r^T,
  // B = V_r S (Q_2 U_r)^T, so Jacobi only has to sweep the sketch x sketch factor.
  DenseMatrix bt = matmul(y, Op::transpose, q, Op::none);
  const auto rows = static_cast<lapack_int>(n), cols = static_cast<lapack_int>(sketch);
  std::vector<double> tau(sketch);
  if (LAPACKE_dgeqrf(LAPACK_COL_MAJOR, rows, cols, bt.data(), rows, tau.data()) != 0)
    throw std::runtime_error("randomized_svd: dgeqrf failed");
  DenseMatrix r(sketch, sketch);
  for (std::size_t j = 0; j < sketch; ++j)
    for (std::size_t i = 0; i <= j; ++i) r(i, j) = bt(i, j);
  if (LAPACKE_dorgqr(LAPACK_COL_MAJOR, rows, cols, cols, bt.data(), rows, tau.data()) != 0)
    throw std::runtime_error("randomized_svd: dorgqr failed");
  SvdResult small = jacobi_tall(std::move(r));

  SvdResult out;
  out.sigma.assign(small.sigma.begin(), small.sigma.begin() + static_cast<long>(target_rank));
  out.u = matmul(q, small.v.leading_columns(target_rank));
  out.v = matmul(bt, small.u.leading_columns(target_rank));
  return out;
}

double default_rank_tolerance(std::size_t rows, std::size_t cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

std::size_t numerical_rank(std::span<const double> sigma, double rel_tol) {
  if (sigma.empty() || sigma.front() == 0.0) return 0;
  const double cut = rel_tol * sigma.front();
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [cut](double s) { return s > cut; }));
}

std::size_t numerical_rank(const DenseMatrix& y, std::optional<double> rel_tol) {
  const SvdResult s = svd(y, SvdVectors::none);
  return numerical_rank(s.sigma, rel_tol.value_or(default_rank_tolerance(y.rows(), y.cols())));
}

double reconstruction_error(const DenseMatrix& y, const SvdResult& s,
                            std::optional<std::size_t> k_opt) {
  const std::size_t k = k_opt.value_or(s.k());
  if (k == 0 || k > s.k() || s.u.empty() || s.v.empty())
    throw std::invalid_argument("reconstruction_error: singular vectors required");
  const std::size_t m = y.rows(), n = y.cols();
  if (s.u.rows() != m || s.v.rows() != n)
    throw std::invalid_argument("reconstruction_error: factor dimensions do not match");

  // (Sigma V^T) scaled columns of V, then Y - U (Sigma V^T) in column blocks
  DenseMatrix sv(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) sv(i, j) = s.v(i, j) * s.sigma[j];

  constexpr std::size_t kBlock = 1024;
  std::vector<double> block(m * std::min(kBlock, n));
  double scale = 0.0, ssq = 1.0;
  for (std::size_t c0 = 0; c0 < n; c0 += kBlock) {
    const std::size_t nb = std::min(kBlock, n - c0);
    std::copy_n(y.data() + c0 * m, m * nb, block.data());
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, static_cast<int>(m),
                static_cast<int>(nb), static_cast<int>(k), -1.0, s.u.data(), static_cast<int>(m),
                sv.data() + c0, static_cast<int>(n), 1.0, block.data(), static_cast<int>(m));
    for (std::size_t i = 0; i < m * nb; ++i) {
      const double av = std::abs(block[i]);
      if (av == 0.0) continue;
      if (scale < av) {
        ssq = 1.0 + ssq * (scale / av) * (scale / av);
        scale = av;
      } else {
        ssq += (av / scale) * (av / scale);
      }
    }
  }
  const double ny = frobenius_norm(y);
  const double err = scale * std::sqrt(ssq);
  return ny == 0.0 ? err : err / ny;
}

}  // namespace nlsrom::linalg
