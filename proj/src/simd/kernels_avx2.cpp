#include <immintrin.h>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_dot_avx2(const double* x, const double* w, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d xw0 = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i));
    const __m256d xw1 = _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(w + i + 4));
    acc0 = _mm256_fmadd_pd(xw0, _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(xw1, _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d xw = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i));
    acc0 = _mm256_fmadd_pd(xw, _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * w[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void modulus_sq_acc_avx2(const double* p, const double* q, double* r, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vp = _mm256_loadu_pd(p + i);
    const __m256d vq = _mm256_loadu_pd(q + i);
    __m256d vr = _mm256_loadu_pd(r + i);
    vr = _mm256_fmadd_pd(vp, vp, vr);
    vr = _mm256_fmadd_pd(vq, vq, vr);
    _mm256_storeu_pd(r + i, vr);
  }
  for (; i < n; ++i) r[i] += p[i] * p[i] + q[i] * q[i];
}

void cubic_rotation_avx2(const double* p, const double* q, const double* r, double g,
                         double* dp, double* dq, std::size_t n) {
  const __m256d vg = _mm256_set1_pd(g);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gr = _mm256_mul_pd(vg, _mm256_loadu_pd(r + i));
    _mm256_storeu_pd(dp + i, _mm256_fnmadd_pd(gr, _mm256_loadu_pd(q + i), _mm256_loadu_pd(dp + i)));
    _mm256_storeu_pd(dq + i, _mm256_fmadd_pd(gr, _mm256_loadu_pd(p + i), _mm256_loadu_pd(dq + i)));
  }
  for (; i < n; ++i) {
    const double gr = g * r[i];
    dp[i] -= gr * q[i];
    dq[i] += gr * p[i];
  }
}

double cubic_midpoint_sweep_avx2(const double* p0, const double* q0, double* p, double* q,
                                 double hg, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vhg = _mm256_set1_pd(hg);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(p0 + i);
    const __m256d b = _mm256_loadu_pd(q0 + i);
    __m256d vp = _mm256_loadu_pd(p + i);
    __m256d vq = _mm256_loadu_pd(q + i);
    const __m256d mp = _mm256_mul_pd(half, _mm256_add_pd(a, vp));
    const __m256d mq = _mm256_mul_pd(half, _mm256_add_pd(b, vq));
    const __m256d r = _mm256_fmadd_pd(mp, mp, _mm256_mul_pd(mq, mq));
    const __m256d hr = _mm256_mul_pd(vhg, r);
    const __m256d f1 = _mm256_fmadd_pd(hr, mq, _mm256_sub_pd(vp, a));
    const __m256d f2 = _mm256_fnmadd_pd(hr, mp, _mm256_sub_pd(vq, b));
    acc = _mm256_fmadd_pd(f1, f1, acc);
    acc = _mm256_fmadd_pd(f2, f2, acc);
    const __m256d hpq = _mm256_mul_pd(vhg, _mm256_mul_pd(mp, mq));
    const __m256d a11 = _mm256_add_pd(one, hpq);
    const __m256d a22 = _mm256_sub_pd(one, hpq);
    const __m256d hr2 = _mm256_mul_pd(half, r);
    const __m256d a12 = _mm256_mul_pd(vhg, _mm256_fmadd_pd(mq, mq, hr2));
    const __m256d a21 = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), vhg),
                                      _mm256_fmadd_pd(mp, mp, hr2));
    const __m256d det = _mm256_fmsub_pd(a11, a22, _mm256_mul_pd(a12, a21));
    const __m256d inv = _mm256_div_pd(one, det);
    const __m256d d1 = _mm256_fmsub_pd(a22, f1, _mm256_mul_pd(a12, f2));
    const __m256d d2 = _mm256_fmsub_pd(a11, f2, _mm256_mul_pd(a21, f1));
    vp = _mm256_fnmadd_pd(d1, inv, vp);
    vq = _mm256_fnmadd_pd(d2, inv, vq);
    _mm256_storeu_pd(p + i, vp);
    _mm256_storeu_pd(q + i, vq);
  }
  double res = hsum(acc);
  if (i < n) res += scalar_kernels().cubic_midpoint_sweep(p0 + i, q0 + i, p + i, q + i, hg, n - i);
  return res;
}

void complex_mul_avx2(std::complex<double>* z, const std::complex<double>* f, std::size_t n) {
  auto* zd = reinterpret_cast<double*>(z);
  const auto* fd = reinterpret_cast<const double*>(f);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vz = _mm256_loadu_pd(zd + 2 * i);  // a0 b0 a1 b1
    const __m256d vf = _mm256_loadu_pd(fd + 2 * i);  // c0 d0 c1 d1
    const __m256d fre = _mm256_movedup_pd(vf);        // c c
    const __m256d fim = _mm256_permute_pd(vf, 0xF);   // d d
    const __m256d zsw = _mm256_permute_pd(vz, 0x5);   // b a
    // (a c - b d, b c + a d)
    _mm256_storeu_pd(zd + 2 * i, _mm256_fmaddsub_pd(vz, fre, _mm256_mul_pd(zsw, fim)));
  }
  if (i < n) scalar_kernels().complex_mul(z + i, f + i, n - i);
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{
      "avx2",
      dot_avx2,
      weighted_dot_avx2,
      axpy_avx2,
      axpby_avx2,
      modulus_sq_acc_avx2,
      cubic_rotation_avx2,
      cubic_midpoint_sweep_avx2,
      complex_mul_avx2,
  };
  return supported ? &table : nullptr;
}

}  // namespace nlsrom::simd
