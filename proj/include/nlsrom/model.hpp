#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlsrom/linalg/circulant.hpp"

namespace nlsrom::model {

// Uniform periodic grid on a box. 2D grids are stored row-major with the
// first axis as rows: index = i0 * extents[1] + i1.
struct Grid {
  std::size_t dim = 1;
  std::vector<std::size_t> extents;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> spacing;

  static Grid line(std::size_t m, double lo, double hi);
  static Grid square(std::size_t m, double lo, double hi);

  std::size_t points() const noexcept;
  // Node coordinate along `axis` for index i on that axis.
  double node(std::size_t axis, std::size_t i) const { return lower[axis] + spacing[axis] * static_cast<double>(i); }
  // Product of the spacings (cell volume).
  double cell_volume() const noexcept;
  void validate() const;
};

enum class ProblemKind { nls1d, nls2d, cnls };

const char* to_string(ProblemKind kind) noexcept;
ProblemKind parse_problem_kind(const std::string& name);

struct InitialCondition {
  std::string recipe;
  std::map<std::string, double> params;  // missing entries take recipe defaults
};

// Names accepted by initial_state.
std::vector<std::string> known_recipes();

struct ProblemSpec {
  ProblemKind kind = ProblemKind::nls1d;
  double gamma = 1.0;
  Grid grid;
  InitialCondition initial;
  double t_final = 1.0;
  double dt = 0.01;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  std::size_t steps() const;
  std::size_t fields() const noexcept { return kind == ProblemKind::cnls ? 2 : 1; }
  std::size_t components() const noexcept { return 2 * fields(); }
  std::size_t unknowns() const noexcept { return components() * grid.points(); }
};

// The three experiment setups.
ProblemSpec preset_problem(const std::string& name);

// Phase-space point stored as contiguous component blocks p1, q1 (, p2, q2).
struct StateVector {
  std::size_t fields = 1;
  std::size_t points = 0;
  std::vector<double> data;

  StateVector() = default;
  StateVector(std::size_t fields, std::size_t points);

  std::size_t components() const noexcept { return 2 * fields; }
  std::span<double> component(std::size_t c) { return {data.data() + c * points, points}; }
  std::span<const double> component(std::size_t c) const { return {data.data() + c * points, points}; }
  std::span<double> p(std::size_t f = 0) { return component(2 * f); }
  std::span<const double> p(std::size_t f = 0) const { return component(2 * f); }
  std::span<double> q(std::size_t f = 0) { return component(2 * f + 1); }
  std::span<const double> q(std::size_t f = 0) const { return component(2 * f + 1); }

  // |Psi_f| at every grid point.
  std::vector<double> envelope(std::size_t f = 0) const;
};

// Periodic (1, -2, 1) Laplacian without the 1/dx^2 factor. 2D grids get the
// Kronecker sum of the two 1D stencils.
linalg::CirculantOperator build_laplacian(const Grid& grid);
// Laplacian including the 1/dx^2 (and 1/dy^2) factors used by the dynamics.
linalg::CirculantOperator build_scaled_laplacian(const Grid& grid);

// ODE right-hand side  p' = -A q - g q r,  q' = A p + g p r  with r the summed
// squared modulus over all fields.
void add_cubic_terms(const StateVector& state, double gamma, StateVector& dstate);

// Grouping of the quartic CNLS Hamiltonian term.
enum class CnlsQuartic {
  printed,  // (P^2 + Q^2)/4 + P Q / 2 with P = sum p_f^2, Q = sum q_f^2
  modulus   // (|Psi_1|^2 + |Psi_2|^2)^2 / 4
};

// Caches the scaled Laplacian for repeated evaluations on one problem.
class Problem {
 public:
  explicit Problem(ProblemSpec spec);

  const ProblemSpec& spec() const noexcept { return spec_; }
  const linalg::CirculantOperator& laplacian() const noexcept { return *laplacian_; }
  std::shared_ptr<const linalg::CirculantOperator> laplacian_ptr() const noexcept { return laplacian_; }

  StateVector make_state() const { return StateVector(spec_.fields(), spec_.grid.points()); }
  void check_layout(const StateVector& s) const;

  void rhs(const StateVector& state, StateVector& dstate) const;
  StateVector rhs(const StateVector& state) const;
  double hamiltonian(const StateVector& state, CnlsQuartic form = CnlsQuartic::printed) const;

  // Constant c with  p' = c dH/dq,  q' = -c dH/dp.
  double hamiltonian_pairing() const noexcept;

 private:
  ProblemSpec spec_;
  std::shared_ptr<const linalg::CirculantOperator> laplacian_;
};

StateVector semi_discrete_rhs(const ProblemSpec& spec, const StateVector& state);
double hamiltonian(const ProblemSpec& spec, const StateVector& state);
StateVector initial_state(const ProblemSpec& spec);

}  // namespace nlsrom::model
