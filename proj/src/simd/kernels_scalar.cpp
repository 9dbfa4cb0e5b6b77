#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_dot_scalar(const double* x, const double* w, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * w[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void modulus_sq_acc_scalar(const double* p, const double* q, double* r, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) r[i] += p[i] * p[i] + q[i] * q[i];
}

void cubic_rotation_scalar(const double* p, const double* q, const double* r, double g,
                           double* dp, double* dq, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double gr = g * r[i];
    dp[i] -= gr * q[i];
    dq[i] += gr * p[i];
  }
}

double cubic_midpoint_sweep_scalar(const double* p0, const double* q0, double* p, double* q,
                                   double hg, std::size_t n) {
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mp = 0.5 * (p0[i] + p[i]);
    const double mq = 0.5 * (q0[i] + q[i]);
    const double r = mp * mp + mq * mq;
    const double f1 = p[i] - p0[i] + hg * r * mq;
    const double f2 = q[i] - q0[i] - hg * r * mp;
    res += f1 * f1 + f2 * f2;
    const double a11 = 1.0 + hg * mp * mq;
    const double a12 = hg * (mq * mq + 0.5 * r);
    const double a21 = -hg * (mp * mp + 0.5 * r);
    const double a22 = 1.0 - hg * mp * mq;
    const double inv_det = 1.0 / (a11 * a22 - a12 * a21);
    p[i] -= (a22 * f1 - a12 * f2) * inv_det;
    q[i] -= (a11 * f2 - a21 * f1) * inv_det;
  }
  return res;
}

void complex_mul_scalar(std::complex<double>* z, const std::complex<double>* f, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z[i].real(), b = z[i].imag();
    const double c = f[i].real(), d = f[i].imag();
    z[i] = {a * c - b * d, a * d + b * c};
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",
      dot_scalar,
      weighted_dot_scalar,
      axpy_scalar,
      axpby_scalar,
      modulus_sq_acc_scalar,
      cubic_rotation_scalar,
      cubic_midpoint_sweep_scalar,
      complex_mul_scalar,
  };
  return table;
}

}  // namespace nlsrom::simd
