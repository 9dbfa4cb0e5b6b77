#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlsrom/linalg/matrix.hpp"
#include "nlsrom/model.hpp"

namespace nlsrom::integrate {

enum class Scheme { strang_split, full_midpoint };
// Order of the Strang substeps: nonlinear halves outside, or linear halves outside.
enum class SplitOrder { nln, lnl };
// How the linear substep is advanced in Fourier space.
enum class LinearSolve { midpoint_circulant, exact_rotation };

struct IntegratorConfig {
  Scheme scheme = Scheme::strang_split;
  SplitOrder split_order = SplitOrder::nln;
  LinearSolve linear_solve = LinearSolve::midpoint_circulant;
  double newton_tol = 1e-10;
  std::size_t newton_max_iters = 25;
  std::size_t snapshot_stride = 1;

  void validate() const;
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

struct StabilityCheck {
  bool stable;
  double bound;   // 2 dx^2 / L
  double margin;  // dt - bound (negative when stable)
};

// dt < 2 dx^2 / L for a 1D periodic grid of length L.
StabilityCheck check_stability(double dt, const model::Grid& grid);

using RhsFn = std::function<void(std::span<const double> y, std::span<double> dy)>;
// Fills J = d rhs / dy (n x n).
using JacobianFn = std::function<void(std::span<const double> y, linalg::DenseMatrix& jac)>;

struct NewtonStats {
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Solves  z = y + dt f((y + z)/2)  by Newton's method. Without an analytic
// Jacobian, columns are formed by forward differences of f.
std::vector<double> midpoint_newton(const RhsFn& rhs, std::span<const double> y, double dt,
                                    const IntegratorConfig& cfg, const JacobianFn& jacobian = {},
                                    NewtonStats* stats = nullptr);

// Advances the full-order model. Holds per-dt Fourier multipliers, so
// reuse one instance for a run.
class Stepper {
 public:
  Stepper(std::shared_ptr<const model::Problem> problem, IntegratorConfig cfg);

  const model::Problem& problem() const noexcept { return *problem_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }

  // One step of the configured scheme (dt may be negative).
  void step(model::StateVector& state, double dt) const;

  // Substeps, exposed for testing.
  void linear_substep(model::StateVector& state, double h) const;
  void nonlinear_substep(model::StateVector& state, double h) const;

 private:
  void strang(model::StateVector& state, double dt) const;
  void full_midpoint(model::StateVector& state, double dt) const;
  const std::vector<linalg::cplx>& multipliers(double h) const;

  std::shared_ptr<const model::Problem> problem_;
  IntegratorConfig cfg_;
  mutable std::vector<std::pair<double, std::vector<linalg::cplx>>> cache_;
};

model::StateVector strang_step(const model::ProblemSpec& spec, const model::StateVector& state,
                               double dt, const IntegratorConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  // One snapshot matrix per state component (p1, q1, p2, q2): points x snapshots.
  std::vector<linalg::DenseMatrix> components;
  std::vector<double> hamiltonian;
  std::vector<std::string> warnings;
  double dt = 0.0;
  std::size_t stride = 1;
  std::size_t fields = 1;

  std::size_t snapshots() const noexcept { return times.size(); }
  model::StateVector state(std::size_t j) const;
};

// Runs the full-order model from the recipe's initial state, storing
// snapshots every `snapshot_stride` steps including t = 0. Components whose
// `keep` entry is false are not stored (their matrices stay empty); an empty
// mask keeps everything.
Trajectory simulate(const model::ProblemSpec& spec, const IntegratorConfig& cfg,
                    const std::vector<bool>& keep = {});

}  // namespace nlsrom::integrate
