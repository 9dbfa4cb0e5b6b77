#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "nlsrom/integrate.hpp"
#include "nlsrom/linalg/matrix.hpp"
#include "nlsrom/model.hpp"
#include "nlsrom/pod.hpp"

namespace nlsrom::rom {

enum class RomIntegrator { midpoint, strang };

const char* to_string(RomIntegrator r) noexcept;

// Galerkin system for the coefficient vector [a_1, b_1 (, a_2, b_2)] where
// p_f = Psi_f a_f and q_f = Phi_f b_f.
struct ReducedSystem {
  std::shared_ptr<const model::Problem> problem;
  double gamma = 1.0;
  std::size_t l = 0;
  std::size_t fields = 1;
  std::vector<linalg::DenseMatrix> bases;  // one m x l basis per component
  std::vector<double> w;                   // spatial weights of the inner product
  std::vector<linalg::DenseMatrix> b_pq;   // per field: Psi^T W A Phi
  std::vector<linalg::DenseMatrix> b_qp;   // per field: Phi^T W A Psi

  std::size_t dim() const noexcept { return 2 * fields * l; }
  std::size_t points() const noexcept { return bases.front().rows(); }
  const linalg::DenseMatrix& B() const noexcept { return b_pq.front(); }

  model::StateVector lift(std::span<const double> coeffs) const;
  void lift(std::span<const double> coeffs, model::StateVector& out) const;
  std::vector<double> project(const model::StateVector& state) const;
};

// Bases given per component (p1, q1 (, p2, q2)); all must share l.
ReducedSystem build_reduced(std::shared_ptr<const model::Problem> problem,
                            std::vector<linalg::DenseMatrix> bases, std::vector<double> w);
ReducedSystem build_reduced(const model::ProblemSpec& spec, const pod::PodBasis& basis_p,
                            const pod::PodBasis& basis_q, const pod::InnerProductSpec& ip);
ReducedSystem build_reduced(const model::ProblemSpec& spec, const std::vector<pod::PodBasis>& bases,
                            const pod::InnerProductSpec& ip);

enum class RhsPart { full, linear, nonlinear };

void reduced_rhs(const ReducedSystem& sys, std::span<const double> coeffs, std::span<double> out,
                 RhsPart part = RhsPart::full);
std::vector<double> reduced_rhs(const ReducedSystem& sys, std::span<const double> coeffs);

// Analytic Jacobian of reduced_rhs (dim x dim).
void reduced_jacobian(const ReducedSystem& sys, std::span<const double> coeffs,
                      linalg::DenseMatrix& jac, RhsPart part = RhsPart::full);

struct ReducedTrajectory {
  std::vector<double> times;
  linalg::DenseMatrix coeffs;  // dim x snapshots
  double dt = 0.0;
  std::size_t stride = 1;
  RomIntegrator integrator = RomIntegrator::midpoint;

  std::size_t snapshots() const noexcept { return times.size(); }
  std::span<const double> at(std::size_t j) const { return coeffs.col(j); }
};

// Integrates the reduced system from the projection of y0 over [0, T].
ReducedTrajectory integrate_rom(const ReducedSystem& sys, const model::StateVector& y0, double t_final,
                                double dt, const integrate::IntegratorConfig& cfg,
                                RomIntegrator integrator = RomIntegrator::midpoint);

enum class ErrorForm {
  verbatim,  // sqrt(mean_j ||y_h - y_l||)
  rms        // sqrt(mean_j ||y_h - y_l||^2)
};

enum class HamReference {
  trajectory,  // H_h(t_j)
  initial      // H_h(t_0)
};

// Average error of one component over the snapshot times.
double rom_error(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                 const ReducedSystem& sys, std::size_t component = 0,
                 ErrorForm form = ErrorForm::verbatim);

// H of every lifted reduced snapshot.
std::vector<double> lifted_hamiltonian(const ReducedTrajectory& reduced, const ReducedSystem& sys);

// Root mean square of H_h - H_l over the snapshot times.
double ham_rom_error(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                     const ReducedSystem& sys, HamReference ref = HamReference::trajectory);

// sum_j alpha_j ||y(t_j) - Y_j||_W^2 summed over every component.
double squared_rom_error(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                         const ReducedSystem& sys, const pod::InnerProductSpec& ip);

// sum_{l < i <= d} (2 sigma_i^2 + sum_j alpha_j <y'(t_j), psi_i>_W^2) without the dt^4 term.
// Needs all d modes in `basis`; y' uses central differences with the given snapshot spacing.
double error_bound_tail(const linalg::DenseMatrix& y, const pod::PodBasis& basis,
                        const pod::InnerProductSpec& ip, std::size_t l, double snapshot_spacing);

// error_bound_tail + dt^4.
double error_bound_quantity(const linalg::DenseMatrix& y, const pod::PodBasis& basis,
                            const pod::InnerProductSpec& ip, std::size_t l, double dt,
                            double snapshot_spacing = 0.0);

struct RomReport {
  std::size_t l = 0;
  double ric = 0.0;
  double ham_error = 0.0;
  double rom_error = 0.0;
  double bound_quantity = 0.0;
};

}  // namespace nlsrom::rom
