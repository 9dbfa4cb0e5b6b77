#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace nlsrom::simd {

// Inner-loop kernels shared by the full-order solver and the reduced model.
// Every entry has a scalar reference implementation; vector variants are
// selected once at startup and must agree with the reference to rounding.
struct KernelTable {
  const char* name;

  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i x_i w_i y_i
  double (*weighted_dot)(const double* x, const double* w, const double* y, std::size_t n);
  // y += a x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = a x + b y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  // r += p^2 + q^2
  void (*modulus_sq_acc)(const double* p, const double* q, double* r, std::size_t n);
  // dp -= g r q ; dq += g r p
  void (*cubic_rotation)(const double* p, const double* q, const double* r, double g,
                         double* dp, double* dq, std::size_t n);
  // One Newton sweep of the pointwise midpoint system
  //   P - p0 + hg |m|^2 mq = 0,   Q - q0 - hg |m|^2 mp = 0,   m = ((p0+P)/2, (q0+Q)/2)
  // updating (P, Q) in place. Returns the squared residual norm before the update.
  double (*cubic_midpoint_sweep)(const double* p0, const double* q0, double* p, double* q,
                                 double hg, std::size_t n);
  // z_i *= f_i
  void (*complex_mul)(std::complex<double>* z, const std::complex<double>* f, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_kernels();

// The table used by the library. Chosen on first use; NLSROM_KERNELS=scalar
// in the environment forces the reference path.
const KernelTable& active_kernels();

// Overrides the active table (tests and benchmarks).
void set_active_kernels(const KernelTable& table);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active_kernels().dot(x.data(), y.data(), x.size());
}

inline double weighted_dot(std::span<const double> x, std::span<const double> w,
                           std::span<const double> y) {
  return active_kernels().weighted_dot(x.data(), w.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(a, x.data(), y.data(), x.size());
}

inline void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
  active_kernels().axpby(a, x.data(), b, y.data(), x.size());
}

}  // namespace nlsrom::simd
