#include <doctest.h>

#include <cmath>
#include <random>

#include "nlsrom/integrate.hpp"
#include "nlsrom/linalg/svd.hpp"
#include "nlsrom/pod.hpp"
#include "oracles.hpp"

using namespace nlsrom;
using namespace nlsrom::pod;
using linalg::DenseMatrix;

namespace {

DenseMatrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  DenseMatrix a(m, n);
  std::normal_distribution<double> g;
  for (double& v : a.values()) v = g(rng);
  return a;
}

InnerProductSpec random_ip(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  InnerProductSpec ip = InnerProductSpec::uniform(m, n);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (double& v : ip.w) v = u(rng);
  for (double& v : ip.alpha) v = u(rng) / double(n);
  ip.mode = QuadratureMode::custom;
  return ip;
}

// Eigen-decomposition of W^{1/2} Y diag(alpha) Y^T W^{1/2}: eigenvalues are the
// squared weighted singular values and W^{-1/2} times the eigenvectors are the modes.
std::vector<double> weighted_gram_eigen(const DenseMatrix& y, const InnerProductSpec& ip, oracle::Mat* vecs) {
  const std::size_t m = y.rows(), n = y.cols();
  oracle::Mat g = oracle::zeros(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += y(i, j) * ip.alpha[j] * y(k, j);
      g[i][k] = std::sqrt(ip.w[i]) * s * std::sqrt(ip.w[k]);
    }
  return oracle::symmetric_eigen(g, vecs);
}

double w_dot(std::span<const double> a, std::span<const double> b, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * w[i] * b[i];
  return s;
}

PodBasis handmade(std::vector<double> sigma_sq) {
  PodBasis b;
  for (double v : sigma_sq) {
    b.sigma_raw.push_back(std::sqrt(v));
    b.sigma_normalized.push_back(std::sqrt(v));
  }
  b.sigma_all = b.sigma_raw;
  b.d = b.l = sigma_sq.size();
  return b;
}

}  // namespace

TEST_CASE("inner product specs") {
  const auto u = InnerProductSpec::uniform(3, 4);
  CHECK(u.identity_w());
  CHECK(u.constant_alpha());
  CHECK(u.alpha[0] == 0.25);
  const auto t = InnerProductSpec::trapezoidal(3, 11, 0.1);
  double sum = 0.0;
  for (double a : t.alpha) sum += a;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(t.alpha.front() == doctest::Approx(0.05));
  auto bad = u;
  bad.w[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(u.validate(3, 5), std::invalid_argument);
}

TEST_CASE("compute_pod on the identity") {
  const auto ip = InnerProductSpec::uniform(3, 3);
  const auto b = compute_pod(DenseMatrix::identity(3), ip, 3);
  CHECK(b.l == 3);
  CHECK(b.d == 3);
  for (double s : b.sigma_raw) CHECK(s == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(linalg::orthonormality_defect(b.modes) < 1e-14);
}

TEST_CASE("rank-2 snapshots: dominant direction and tail value match the weighted Gram oracle") {
  std::mt19937_64 rng(3);
  const std::size_t m = 6, n = 10;
  std::vector<double> e1(m, 0.0), e2(m, 0.0);
  e1[1] = 1.0, e2[4] = 1.0;
  DenseMatrix y(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = 1.0, b = j % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < m; ++i) y(i, j) = 3.0 * a * e1[i] + 1.0 * b * e2[i];
  }
  for (const auto& ip : {InnerProductSpec::uniform(m, n), random_ip(m, n, rng)}) {
    const auto b = compute_pod(y, ip, 1);
    oracle::Mat vecs;
    const auto ev = weighted_gram_eigen(y, ip, &vecs);
    CHECK(b.d == 2);
    CHECK(b.sigma_raw[0] * b.sigma_raw[0] == doctest::Approx(ev[0]).epsilon(1e-12));
    CHECK(projection_error(y, b, ip, 1) == doctest::Approx(ev[1]).epsilon(1e-10));
    std::vector<double> oracle_mode(m);
    for (std::size_t i = 0; i < m; ++i) oracle_mode[i] = vecs[i][0] / std::sqrt(ip.w[i]);
    const double overlap = std::abs(w_dot(b.mode(0), oracle_mode, ip.w));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-12));
    if (ip.identity_w()) {
      CHECK(std::abs(b.mode(0)[1]) == doctest::Approx(1.0));
      // time profiles are orthogonal, so the tail is the alpha-weighted energy of the weak direction
      CHECK(projection_error(y, b, ip, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: no unit vector beats the first mode") {
  std::mt19937_64 rng(9);
  const DenseMatrix y = random_matrix(5, 12, rng);
  const auto ip = random_ip(5, 12, rng);
  const auto b = compute_pod(y, ip, 1);
  const double best = projection_error(y, b, ip, 1);
  for (int trial = 0; trial < 200; ++trial) {
    PodBasis other = b;
    auto v = oracle::random_vector(5, rng);
    const double nv = std::sqrt(w_dot(v, v, ip.w));
    for (std::size_t i = 0; i < 5; ++i) other.modes(i, 0) = v[i] / nv;
    CHECK(projection_error(y, other, ip, 1) >= best * (1.0 - 1e-12));
  }
}

TEST_CASE("modes are W-orthonormal, signs fixed, normalized values sum to one") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix y = random_matrix(20, 30, rng);
    const auto ip = random_ip(20, 30, rng);
    const auto b = compute_pod(y, ip, 20);
    for (std::size_t a = 0; a < b.l; ++a)
      for (std::size_t c = 0; c < b.l; ++c)
        CHECK(std::abs(w_dot(b.mode(a), b.mode(c), ip.w) - (a == c ? 1.0 : 0.0)) <= 1e-10);
    for (std::size_t a = 0; a < b.l; ++a) {
      double big = 0.0;
      for (double v : b.mode(a))
        if (std::abs(v) > std::abs(big)) big = v;
      CHECK(big > 0.0);
    }
    double s = 0.0;
    for (double v : b.sigma_normalized) s += v * v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("l larger than the rank is clamped with a warning") {
  DenseMatrix y(4, 6, 0.0);
  for (std::size_t j = 0; j < 6; ++j) y(0, j) = 1.0 + double(j);
  const auto b = compute_pod(y, InnerProductSpec::uniform(4, 6), 3);
  CHECK(b.d == 1);
  CHECK(b.l == 1);
  CHECK(b.warnings.size() == 1);
  CHECK_THROWS_AS(compute_pod(DenseMatrix(3, 3, 0.0), InnerProductSpec::uniform(3, 3), 1), std::invalid_argument);
}

TEST_CASE("ric and choose_rank") {
  const auto b = handmade({0.6, 0.39, 0.01});
  CHECK(choose_rank(b, 99.0) == 2);
  CHECK(choose_rank(b, 100.0) == 3);
  CHECK(choose_rank(b, 50.0) == 1);
  CHECK(ric(b, 3) == 100.0);
  CHECK(ric(b, 1) == doctest::Approx(60.0));
  CHECK(ric(b, 0) == 0.0);
  CHECK_THROWS_AS(choose_rank(b, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ric(b, 4), std::invalid_argument);
}

TEST_CASE("project and lift") {
  std::mt19937_64 rng(14);
  const std::size_t m = 8;
  const DenseMatrix y = random_matrix(m, 20, rng);
  const auto ip = random_ip(m, 20, rng);
  const auto b = compute_pod(y, ip, m);
  REQUIRE(b.l == m);

  SUBCASE("mode maps to a unit coefficient vector") {
    const auto c = project(b.mode(0), b, ip);
    for (std::size_t i = 0; i < m; ++i) CHECK(c[i] == doctest::Approx(i == 0 ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
  }
  SUBCASE("W-orthogonal state maps to zero") {
    const auto b3 = b.truncated(3);
    std::vector<double> v(b.mode(5).begin(), b.mode(5).end());
    const auto c = project(v, b3, ip);
    for (double x : c) CHECK(std::abs(x) < 1e-12);
  }
  SUBCASE("full basis reconstructs any state") {
    const auto v = oracle::random_vector(m, rng);
    CHECK(oracle::max_abs_diff(lift(project(v, b, ip), b), v) < 1e-10);
  }
  SUBCASE("project after lift is the identity; lift after project is a non-expansive idempotent") {
    const auto b3 = b.truncated(3);
    const auto c = oracle::random_vector(3, rng);
    CHECK(oracle::max_abs_diff(project(lift(c, b3), b3, ip), c) < 1e-12);
    const auto v = oracle::random_vector(m, rng);
    const auto pv = lift(project(v, b3, ip), b3);
    const auto ppv = lift(project(pv, b3, ip), b3);
    CHECK(oracle::max_abs_diff(pv, ppv) < 1e-12);
    CHECK(w_dot(pv, pv, ip.w) <= w_dot(v, v, ip.w) * (1 + 1e-12));
  }
  SUBCASE("dimension mismatch") {
    std::vector<double> v(m + 1, 0.0);
    CHECK_THROWS_AS(project(v, b, ip), std::invalid_argument);
  }
}

TEST_CASE("property: projection error equals the singular value tail (random weighted matrices)") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 4 + trial * 3, n = 10 + trial * 7;
    const DenseMatrix y = random_matrix(m, n, rng);
    const auto ip = random_ip(m, n, rng);
    const auto b = compute_pod(y, ip, std::min(m, n));
    for (std::size_t l = 0; l <= b.l; ++l) {
      const double lhs = projection_error(y, b, ip, l), rhs = tail_energy(b, l);
      CHECK(std::abs(lhs - rhs) <= 1e-8 * rhs + 1e-12 * b.total_energy);
    }
    CHECK(projection_error(y, b, ip, 0) == doctest::Approx(b.total_energy).epsilon(1e-12));
    double r = 0.0;
    for (std::size_t l = 1; l <= b.d; ++l) {
      CHECK(ric(b, l) >= r);
      r = ric(b, l);
    }
    CHECK(ric(b, b.d) == 100.0);
  }
}

TEST_CASE("randomized POD spans the deterministic subspace") {
  std::mt19937_64 rng(16);
  const std::size_t m = 50, n = 120, rank = 6;
  DenseMatrix u = random_matrix(m, rank, rng), v = random_matrix(n, rank, rng);
  for (std::size_t k = 0; k < rank; ++k)
    for (std::size_t i = 0; i < m; ++i) u(i, k) *= std::pow(0.3, double(k));
  const DenseMatrix y = linalg::matmul(u, linalg::Op::none, v, linalg::Op::transpose);
  for (const auto& ip : {InnerProductSpec::uniform(m, n), random_ip(m, n, rng)}) {
    const auto det = compute_pod(y, ip, rank);
    PodOptions opt;
    opt.method = PodMethod::randomized;
    const auto fast = compute_pod(y, ip, rank, opt);
    REQUIRE(fast.l == rank);
    for (std::size_t l = 1; l <= rank; ++l) {
      // sin of the largest principal angle between the leading-l subspaces, W-geometry
      const auto dl = det.truncated(l), fl = fast.truncated(l);
      double worst = 0.0;
      for (std::size_t k = 0; k < l; ++k) {
        std::vector<double> x(fl.mode(k).begin(), fl.mode(k).end());
        const auto px = lift(project(x, dl, ip), dl);
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) r += ip.w[i] * (x[i] - px[i]) * (x[i] - px[i]);
        worst = std::max(worst, std::sqrt(r));
      }
      CHECK(worst <= 1e-6);
      CHECK(std::abs(fl.sigma_raw[l - 1] - dl.sigma_raw[l - 1]) <= 1e-6 * dl.sigma_raw[l - 1]);
    }
  }
}

TEST_CASE("reference: 1D preset snapshots reach 99.99 percent energy at l = 4") {
  const auto tr = integrate::simulate(model::preset_problem("nls1d"), {});
  const auto& y = tr.components[0];
  const auto b = compute_pod(y, InnerProductSpec::uniform(y.rows(), y.cols()), 8);
  MESSAGE("RIC(3) = " << ric(b, 3) << ", RIC(4) = " << ric(b, 4));
  CHECK(choose_rank(b, 99.99) == 4);
}

TEST_CASE("1D preset snapshots: the four-mode tail is below 0.01 percent") {
  const auto tr = integrate::simulate(model::preset_problem("nls1d"), {});
  const auto& y = tr.components[0];
  const auto ip = InnerProductSpec::uniform(y.rows(), y.cols());
  const auto b = compute_pod(y, ip, 8);
  const double pe = projection_error(y, b, ip, 4);
  CHECK(pe == doctest::Approx(tail_energy(b, 4)).epsilon(1e-8));
  CHECK(pe <= 1e-4 * b.total_energy);
  CHECK(projection_error(y, compute_pod(y, ip, 32), ip, b.d) <= 1e-10 * b.total_energy);
}
