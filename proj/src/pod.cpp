#include "nlsrom/pod.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::pod {
namespace {

using linalg::DenseMatrix;

// Largest-magnitude entry of every column made positive.
void fix_signs(DenseMatrix& modes) {
  for (std::size_t j = 0; j < modes.cols(); ++j) {
    auto c = modes.col(j);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
      if (std::abs(c[i]) > std::abs(c[arg])) arg = i;
    if (c[arg] < 0.0)
      for (double& v : c) v = -v;
  }
}

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

InnerProductSpec InnerProductSpec::uniform(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw std::invalid_argument("InnerProductSpec: empty dimensions");
  return {std::vector<double>(m, 1.0), std::vector<double>(n, 1.0 / static_cast<double>(n)),
          QuadratureMode::uniform};
}

InnerProductSpec InnerProductSpec::trapezoidal(std::size_t m, std::size_t n, double spacing) {
  if (m == 0 || n < 2) throw std::invalid_argument("InnerProductSpec: trapezoidal needs n >= 2");
  if (!(spacing > 0.0)) throw std::invalid_argument("InnerProductSpec: spacing must be > 0");
  std::vector<double> alpha(n, spacing);
  alpha.front() = alpha.back() = 0.5 * spacing;
  return {std::vector<double>(m, 1.0), std::move(alpha), QuadratureMode::trapezoidal};
}

bool InnerProductSpec::identity_w() const noexcept {
  return std::all_of(w.begin(), w.end(), [](double v) { return v == 1.0; });
}

bool InnerProductSpec::constant_alpha() const noexcept {
  return !alpha.empty() &&
         std::all_of(alpha.begin(), alpha.end(), [&](double v) { return v == alpha.front(); });
}

void InnerProductSpec::validate(std::size_t m, std::size_t n) const {
  if (w.size() != m) throw std::invalid_argument("InnerProductSpec: W length must equal rows");
  if (alpha.size() != n) throw std::invalid_argument("InnerProductSpec: alpha length must equal cols");
  for (double v : w)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("InnerProductSpec: W must be positive");
  for (double v : alpha)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("InnerProductSpec: alpha must be nonnegative");
}

PodBasis PodBasis::truncated(std::size_t keep) const {
  if (keep == 0 || keep > l) throw std::invalid_argument("PodBasis::truncated: bad mode count");
  PodBasis b = *this;
  b.modes = modes.leading_columns(keep);
  b.l = keep;
  return b;
}

PodBasis compute_pod(const DenseMatrix& y, const InnerProductSpec& ip, std::size_t l,
                     const PodOptions& options) {
  if (y.empty()) throw std::invalid_argument("compute_pod: empty snapshot matrix");
  const std::size_t m = y.rows(), n = y.cols();
  ip.validate(m, n);
  if (l == 0) throw std::invalid_argument("compute_pod: l must be >= 1");

  // Weighted problem reduces to the SVD of W^{1/2} Y diag(alpha)^{1/2}.
  const bool plain = ip.identity_w() && ip.constant_alpha();
  const double scale = plain ? std::sqrt(ip.alpha.front()) : 1.0;
  DenseMatrix weighted;
  if (!plain) {
    weighted = DenseMatrix(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double sa = std::sqrt(ip.alpha[j]);
      for (std::size_t i = 0; i < m; ++i) weighted(i, j) = std::sqrt(ip.w[i]) * y(i, j) * sa;
    }
  }
  const DenseMatrix& yw = plain ? y : weighted;

  PodBasis b;
  b.method = options.method;
  b.total_energy = scale * scale * sum_squares(yw.values());
  if (!(b.total_energy > 0.0)) throw std::invalid_argument("compute_pod: snapshot matrix is zero");

  linalg::SvdResult s;
  if (options.method == PodMethod::deterministic) {
    s = linalg::svd(yw, linalg::SvdVectors::left);
  } else {
    const std::size_t k = std::min(std::max(l, options.randomized_rank), std::min(m, n));
    s = linalg::randomized_svd(yw, k, options.randomized);
  }
  b.sigma_all = s.sigma;
  for (double& v : b.sigma_all) v *= scale;
  b.d = linalg::numerical_rank(b.sigma_all, linalg::default_rank_tolerance(m, n));
  b.sigma_raw.assign(b.sigma_all.begin(), b.sigma_all.begin() + static_cast<long>(b.d));

  const double norm = options.method == PodMethod::deterministic
                          ? std::sqrt(sum_squares(b.sigma_raw))
                          : std::sqrt(b.total_energy);
  b.sigma_normalized = b.sigma_raw;
  for (double& v : b.sigma_normalized) v /= norm;

  b.l = l;
  if (l > b.d) {
    b.warnings.push_back("requested " + std::to_string(l) + " modes but the numerical rank is " +
                         std::to_string(b.d) + "; clamped");
    b.l = b.d;
  }
  b.modes = s.u.leading_columns(b.l);
  if (!ip.identity_w())
    for (std::size_t j = 0; j < b.l; ++j)
      for (std::size_t i = 0; i < m; ++i) b.modes(i, j) /= std::sqrt(ip.w[i]);
  fix_signs(b.modes);
  return b;
}

double ric(const PodBasis& basis, std::size_t l) {
  if (l > basis.d) throw std::invalid_argument("ric: l exceeds the numerical rank");
  if (l == basis.d && basis.method == PodMethod::deterministic) return 100.0;
  double s = 0.0;
  for (std::size_t i = 0; i < l; ++i) s += basis.sigma_normalized[i] * basis.sigma_normalized[i];
  return std::min(100.0, 100.0 * s);
}

std::size_t choose_rank(const PodBasis& basis, double energy_threshold) {
  if (!(energy_threshold > 0.0) || energy_threshold > 100.0)
    throw std::invalid_argument("choose_rank: threshold must lie in (0, 100]");
  for (std::size_t l = 1; l <= basis.d; ++l)
    if (ric(basis, l) >= energy_threshold - 1e-9) return l;
  return basis.d;
}

std::vector<double> project(std::span<const double> state, const PodBasis& basis,
                            const InnerProductSpec& ip, std::size_t l) {
  if (l == 0) l = basis.modes.cols();
  if (state.size() != basis.modes.rows() || ip.w.size() != state.size())
    throw std::invalid_argument("project: dimension mismatch");
  if (l > basis.modes.cols()) throw std::invalid_argument("project: l exceeds the stored modes");
  std::vector<double> c(l);
  const bool ident = ip.identity_w();
  for (std::size_t i = 0; i < l; ++i)
    c[i] = ident ? simd::dot(basis.mode(i), state) : simd::weighted_dot(basis.mode(i), ip.w, state);
  return c;
}

std::vector<double> lift(std::span<const double> coeffs, const PodBasis& basis) {
  if (coeffs.size() > basis.modes.cols()) throw std::invalid_argument("lift: too many coefficients");
  std::vector<double> x(basis.modes.rows(), 0.0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) simd::axpy(coeffs[i], basis.mode(i), x);
  return x;
}

DenseMatrix project_snapshots(const DenseMatrix& y, const PodBasis& basis,
                              const InnerProductSpec& ip, std::size_t l) {
  if (l == 0 || l > basis.modes.cols()) throw std::invalid_argument("project_snapshots: bad l");
  if (y.rows() != basis.modes.rows()) throw std::invalid_argument("project_snapshots: row mismatch");
  DenseMatrix wpsi = basis.modes.leading_columns(l);
  if (!ip.identity_w())
    for (std::size_t j = 0; j < l; ++j)
      for (std::size_t i = 0; i < wpsi.rows(); ++i) wpsi(i, j) *= ip.w[i];
  return linalg::matmul(wpsi, linalg::Op::transpose, y, linalg::Op::none);
}

double projection_error(const DenseMatrix& y, const PodBasis& basis, const InnerProductSpec& ip,
                        std::size_t l) {
  const std::size_t m = y.rows(), n = y.cols();
  ip.validate(m, n);
  if (l > basis.modes.cols()) throw std::invalid_argument("projection_error: l exceeds the stored modes");
  if (m != basis.modes.rows()) throw std::invalid_argument("projection_error: row mismatch");

  DenseMatrix coeffs;
  if (l > 0) coeffs = project_snapshots(y, basis, ip, l);
  const bool ident = ip.identity_w();

  constexpr std::size_t kBlock = 512;
  std::vector<double> block(m * std::min(kBlock, n));
  double total = 0.0;
  for (std::size_t c0 = 0; c0 < n; c0 += kBlock) {
    const std::size_t nb = std::min(kBlock, n - c0);
    std::copy_n(y.data() + c0 * m, m * nb, block.data());
    if (l > 0)
      cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(m),
                  static_cast<int>(nb), static_cast<int>(l), -1.0, basis.modes.data(),
                  static_cast<int>(m), coeffs.data() + c0 * l, static_cast<int>(l), 1.0,
                  block.data(), static_cast<int>(m));
    for (std::size_t j = 0; j < nb; ++j) {
      const double* r = block.data() + j * m;
      const double e = ident ? simd::active_kernels().dot(r, r, m)
                             : simd::active_kernels().weighted_dot(r, ip.w.data(), r, m);
      total += ip.alpha[c0 + j] * e;
    }
  }
  return total;
}

double tail_energy(const PodBasis& basis, std::size_t l) {
  double s = 0.0;
  for (std::size_t i = l; i < basis.sigma_all.size(); ++i) s += basis.sigma_all[i] * basis.sigma_all[i];
  return s;
}

}  // namespace nlsrom::pod
