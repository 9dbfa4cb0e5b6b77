#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nlsrom/linalg/matrix.hpp"

namespace nlsrom::linalg {

// Thin SVD  Y ~ U diag(sigma) V^T  with k retained triplets.
// sigma is nonincreasing; U is m x k and V is n x k when requested (empty otherwise).
struct SvdResult {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix v;

  std::size_t k() const noexcept { return sigma.size(); }
};

enum class SvdVectors { none, left, both };

// Deterministic thin SVD (k = min(m, n)) via LAPACK's divide-and-conquer driver.
// Throws std::invalid_argument on non-finite input.
SvdResult svd(const DenseMatrix& y, SvdVectors vectors = SvdVectors::both);

// One-sided (Hestenes) Jacobi SVD. Accurate for small and skinny problems;
// used inside the randomized SVD and as an independent oracle in tests.
SvdResult jacobi_svd(const DenseMatrix& y);

struct RandomizedSvdOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 2;
  std::uint64_t seed = 20140101;
};

// Randomized range-finder SVD (Gaussian test matrix, subspace iteration with
// re-orthonormalization, small SVD of the projected matrix). Returns exactly
// `target_rank` triplets. Deterministic for a fixed seed.
SvdResult randomized_svd(const DenseMatrix& y, std::size_t target_rank,
                         const RandomizedSvdOptions& options = {});

// max(m, n) * machine epsilon
double default_rank_tolerance(std::size_t rows, std::size_t cols);

// Number of singular values strictly above rel_tol * sigma_1 (0 for a zero matrix).
std::size_t numerical_rank(std::span<const double> sigma, double rel_tol);
std::size_t numerical_rank(const DenseMatrix& y, std::optional<double> rel_tol = std::nullopt);

// ||Y - U_k diag(sigma_k) V_k^T||_F / ||Y||_F over the first k triplets.
double reconstruction_error(const DenseMatrix& y, const SvdResult& s,
                            std::optional<std::size_t> k = std::nullopt);

}  // namespace nlsrom::linalg
