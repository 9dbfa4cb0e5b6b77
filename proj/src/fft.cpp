#include "nlsrom/linalg/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::linalg {
namespace {

std::vector<cplx>& scratch(std::size_t n) {
  thread_local std::vector<cplx> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

std::vector<cplx>& axis_buffer(std::size_t n) {
  thread_local std::vector<cplx> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n), pow2_(std::has_single_bit(n)) {
  if (n == 0) throw std::invalid_argument("Fft: length must be >= 1");
  work_n_ = pow2_ ? n : std::bit_ceil(2 * n - 1);

  const int log2n = std::countr_zero(work_n_);
  bitrev_.resize(work_n_);
  for (std::size_t i = 0; i < work_n_; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(work_n_ / 2 + 1);
  for (std::size_t k = 0; k < twiddle_.size(); ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(work_n_);
    twiddle_[k] = {std::cos(a), std::sin(a)};
  }

  if (!pow2_) {
    chirp_.resize(n);
    const std::size_t two_n = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the phase argument small
      const std::size_t k2 = (k * k) % two_n;
      const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp_[k] = {std::cos(a), std::sin(a)};
    }
    kernel_hat_.assign(work_n_, cplx{0.0, 0.0});
    kernel_hat_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel_hat_[k] = std::conj(chirp_[k]);
      kernel_hat_[work_n_ - k] = std::conj(chirp_[k]);
    }
    radix2(kernel_hat_, false);
  }
}

void Fft::radix2(std::span<cplx> a, bool inverse) const {
  const std::size_t n = work_n_;
  for (std::size_t i = 0; i < n; ++i)
    if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        const cplx u = a[start + k];
        const cplx v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

void Fft::bluestein(std::span<cplx> data, bool inverse) const {
  auto& buf = scratch(work_n_);
  std::span<cplx> work(buf.data(), work_n_);
  // inverse DFT = conj(forward DFT(conj(x)))
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx x = inverse ? std::conj(data[k]) : data[k];
    work[k] = x * chirp_[k];
  }
  for (std::size_t k = n_; k < work_n_; ++k) work[k] = {0.0, 0.0};
  radix2(work, false);
  simd::active_kernels().complex_mul(work.data(), kernel_hat_.data(), work_n_);
  radix2(work, true);
  const double inv_m = 1.0 / static_cast<double>(work_n_);
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx y = work[k] * inv_m * chirp_[k];
    data[k] = inverse ? std::conj(y) : y;
  }
}

void Fft::forward(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft::forward: length mismatch");
  if (n_ == 1) return;
  if (pow2_)
    radix2(data, false);
  else
    bluestein(data, false);
}

void Fft::inverse(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft::inverse: length mismatch");
  if (n_ == 1) return;
  if (pow2_)
    radix2(data, true);
  else
    bluestein(data, true);
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= inv_n;
}

FftNd::FftNd(std::vector<std::size_t> extents) : extents_(std::move(extents)), total_(1) {
  if (extents_.empty() || extents_.size() > 2)
    throw std::invalid_argument("FftNd: supports 1 or 2 axes");
  for (std::size_t e : extents_) {
    if (e == 0) throw std::invalid_argument("FftNd: zero extent");
    total_ *= e;
    plans_.emplace_back(e);
  }
}

void FftNd::transform(std::span<cplx> data, bool inverse) const {
  if (data.size() != total_) throw std::invalid_argument("FftNd: size mismatch");
  auto run = [inverse](const Fft& plan, std::span<cplx> v) {
    if (inverse)
      plan.inverse(v);
    else
      plan.forward(v);
  };
  if (extents_.size() == 1) {
    run(plans_[0], data);
    return;
  }
  const std::size_t n0 = extents_[0], n1 = extents_[1];
  // contiguous rows (last axis)
  for (std::size_t i = 0; i < n0; ++i) run(plans_[1], data.subspan(i * n1, n1));
  // strided columns (first axis)
  auto& buf = axis_buffer(n0);
  std::span<cplx> col(buf.data(), n0);
  for (std::size_t j = 0; j < n1; ++j) {
    for (std::size_t i = 0; i < n0; ++i) col[i] = data[i * n1 + j];
    run(plans_[0], col);
    for (std::size_t i = 0; i < n0; ++i) data[i * n1 + j] = col[i];
  }
}

void FftNd::forward(std::span<cplx> data) const { transform(data, false); }
void FftNd::inverse(std::span<cplx> data) const { transform(data, true); }

std::vector<cplx> naive_dft(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jk = (j * k) % n;
      const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(jk) / static_cast<double>(n);
      s += x[j] * cplx{std::cos(a), std::sin(a)};
    }
    out[k] = inverse ? s / static_cast<double>(n) : s;
  }
  return out;
}

}  // namespace nlsrom::linalg
