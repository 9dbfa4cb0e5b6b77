#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nlsrom::linalg {

using cplx = std::complex<double>;

// Discrete Fourier transform of a fixed length.
//   forward:  X_k = sum_j x_j exp(-2 pi i jk / n)
//   inverse:  x_j = (1/n) sum_k X_k exp(+2 pi i jk / n)
// Powers of two use an iterative radix-2 transform; every other length goes
// through Bluestein's chirp-z reformulation on a padded power-of-two grid.
// Plans are immutable after construction and can be shared between threads.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

 private:
  void radix2(std::span<cplx> data, bool inverse) const;
  void bluestein(std::span<cplx> data, bool inverse) const;

  std::size_t n_;
  bool pow2_;
  // radix-2 tables (for n_ itself, or for the padded length when Bluestein)
  std::size_t work_n_ = 0;
  std::vector<std::size_t> bitrev_;
  std::vector<cplx> twiddle_;
  // Bluestein tables
  std::vector<cplx> chirp_;         // exp(-i pi k^2 / n), k < n
  std::vector<cplx> kernel_hat_;    // FFT of the conjugate chirp filter
};

// Row-major multi-dimensional transform (1 or 2 axes), applied axis by axis.
class FftNd {
 public:
  explicit FftNd(std::vector<std::size_t> extents);

  const std::vector<std::size_t>& extents() const noexcept { return extents_; }
  std::size_t size() const noexcept { return total_; }
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

 private:
  void transform(std::span<cplx> data, bool inverse) const;

  std::vector<std::size_t> extents_;
  std::size_t total_;
  std::vector<Fft> plans_;
};

// O(n^2) reference DFT used as a test oracle.
std::vector<cplx> naive_dft(std::span<const cplx> x, bool inverse = false);

}  // namespace nlsrom::linalg
