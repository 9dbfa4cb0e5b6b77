#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nlsrom/linalg/matrix.hpp"
#include "nlsrom/linalg/svd.hpp"

namespace nlsrom::pod {

enum class QuadratureMode { uniform, trapezoidal, custom };

// Weighted inner products: <x, y>_W = sum_i w_i x_i y_i over space, and
// snapshot weights alpha_j over time.
struct InnerProductSpec {
  std::vector<double> w;
  std::vector<double> alpha;
  QuadratureMode mode = QuadratureMode::custom;

  // W = I, alpha_j = 1/n.
  static InnerProductSpec uniform(std::size_t m, std::size_t n);
  // W = I, trapezoidal weights for equally spaced times (sum = T).
  static InnerProductSpec trapezoidal(std::size_t m, std::size_t n, double spacing);

  bool identity_w() const noexcept;
  bool constant_alpha() const noexcept;
  void validate(std::size_t m, std::size_t n) const;
};

enum class PodMethod { deterministic, randomized };

struct PodOptions {
  PodMethod method = PodMethod::deterministic;
  linalg::RandomizedSvdOptions randomized{};
  // Randomized only: number of triplets computed (>= l); 0 means l.
  std::size_t randomized_rank = 0;
};

struct PodBasis {
  linalg::DenseMatrix modes;             // m x l, W-orthonormal columns
  std::vector<double> sigma_raw;         // d weighted singular values
  std::vector<double> sigma_normalized;  // sigma_raw / sqrt(total_energy)
  std::vector<double> sigma_all;         // every computed singular value
  double total_energy = 0.0;             // sum_j alpha_j ||y_j||_W^2
  std::size_t l = 0;
  std::size_t d = 0;
  PodMethod method = PodMethod::deterministic;
  std::vector<std::string> warnings;

  // Copy holding only the first `l` modes.
  PodBasis truncated(std::size_t l) const;
  std::span<const double> mode(std::size_t i) const { return modes.col(i); }
};

// POD basis of the snapshot matrix Y under `ip`, keeping l modes
// (clamped to the numerical rank with a warning).
PodBasis compute_pod(const linalg::DenseMatrix& y, const InnerProductSpec& ip, std::size_t l,
                     const PodOptions& options = {});

// Relative information content of the first l modes, in percent.
double ric(const PodBasis& basis, std::size_t l);

// Smallest l whose RIC reaches `energy_threshold` percent.
std::size_t choose_rank(const PodBasis& basis, double energy_threshold);

// Coefficients <state, psi_i>_W for the first l modes (all modes when l = 0).
std::vector<double> project(std::span<const double> state, const PodBasis& basis,
                            const InnerProductSpec& ip, std::size_t l = 0);
// sum_i c_i psi_i
std::vector<double> lift(std::span<const double> coeffs, const PodBasis& basis);

// Coefficients of every snapshot: (l x n) matrix  Psi^T W Y.
linalg::DenseMatrix project_snapshots(const linalg::DenseMatrix& y, const PodBasis& basis,
                                      const InnerProductSpec& ip, std::size_t l);

// sum_j alpha_j ||y_j - P_l y_j||_W^2 computed from the residuals.
double projection_error(const linalg::DenseMatrix& y, const PodBasis& basis,
                        const InnerProductSpec& ip, std::size_t l);

// sum_{i > l} sigma_i^2 over every computed singular value.
double tail_energy(const PodBasis& basis, std::size_t l);

}  // namespace nlsrom::pod
