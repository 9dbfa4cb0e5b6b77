#include "nlsrom/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::model {
namespace {

constexpr const char* kRecipeModulated = "nls1d_modulated";
constexpr const char* kRecipePlaneWave = "plane_wave";
constexpr const char* kRecipeCnls = "cnls_modulated";

double param(const InitialCondition& ic, const std::string& key, double fallback) {
  auto it = ic.params.find(key);
  return it == ic.params.end() ? fallback : it->second;
}

// sum over forward differences (periodic) of a field, squared
double gradient_energy(const Grid& g, std::span<const double> u) {
  double s = 0.0;
  if (g.dim == 1) {
    const std::size_t m = g.extents[0];
    const double inv = 1.0 / g.spacing[0];
    for (std::size_t j = 0; j < m; ++j) {
      const double d = (u[(j + 1) % m] - u[j]) * inv;
      s += d * d;
    }
    return s;
  }
  const std::size_t n0 = g.extents[0], n1 = g.extents[1];
  const double inv0 = 1.0 / g.spacing[0], inv1 = 1.0 / g.spacing[1];
  for (std::size_t i = 0; i < n0; ++i) {
    const std::size_t ip = (i + 1) % n0;
    for (std::size_t j = 0; j < n1; ++j) {
      const double v = u[i * n1 + j];
      const double d0 = (u[ip * n1 + j] - v) * inv0;
      const double d1 = (u[i * n1 + (j + 1) % n1] - v) * inv1;
      s += d0 * d0 + d1 * d1;
    }
  }
  return s;
}

// (s, -2s, s) on the periodic diagonals; with two points both neighbours coincide
linalg::CirculantOperator periodic_second_difference(std::size_t m, double s) {
  if (m >= 3) return linalg::circulant_from_stencil(m, {s, -2.0 * s, s});
  return linalg::CirculantOperator({m}, {-2.0 * s, 2.0 * s});
}

}  // namespace

Grid Grid::line(std::size_t m, double lo, double hi) {
  Grid g;
  g.dim = 1;
  g.extents = {m};
  g.lower = {lo};
  g.upper = {hi};
  g.spacing = {(hi - lo) / static_cast<double>(m)};
  g.validate();
  return g;
}

Grid Grid::square(std::size_t m, double lo, double hi) {
  Grid g;
  g.dim = 2;
  g.extents = {m, m};
  g.lower = {lo, lo};
  g.upper = {hi, hi};
  const double h = (hi - lo) / static_cast<double>(m);
  g.spacing = {h, h};
  g.validate();
  return g;
}

std::size_t Grid::points() const noexcept {
  std::size_t n = 1;
  for (std::size_t e : extents) n *= e;
  return n;
}

double Grid::cell_volume() const noexcept {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
  if (extents.size() != dim || lower.size() != dim || upper.size() != dim || spacing.size() != dim)
    throw std::invalid_argument("Grid: per-axis arrays must have dim entries");
  for (std::size_t a = 0; a < dim; ++a) {
    if (extents[a] < 2) throw std::invalid_argument("Grid: need at least 2 points per axis");
    if (!(upper[a] > lower[a])) throw std::invalid_argument("Grid: empty interval");
    const double h = (upper[a] - lower[a]) / static_cast<double>(extents[a]);
    if (std::abs(spacing[a] - h) > 1e-12 * h)
      throw std::invalid_argument("Grid: spacing must equal interval length / points");
  }
}

const char* to_string(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::nls1d: return "nls1d";
    case ProblemKind::nls2d: return "nls2d";
    case ProblemKind::cnls: return "cnls";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "nls1d") return ProblemKind::nls1d;
  if (name == "nls2d") return ProblemKind::nls2d;
  if (name == "cnls") return ProblemKind::cnls;
  throw std::invalid_argument("unknown problem kind '" + name + "' (known: nls1d, nls2d, cnls)");
}

std::vector<std::string> known_recipes() { return {kRecipeModulated, kRecipePlaneWave, kRecipeCnls}; }

void ProblemSpec::validate() const {
  grid.validate();
  const std::size_t want_dim = kind == ProblemKind::nls2d ? 2 : 1;
  if (grid.dim != want_dim)
    throw std::invalid_argument(std::string("ProblemSpec: ") + to_string(kind) + " needs a " +
                                std::to_string(want_dim) + "D grid");
  if (!std::isfinite(gamma)) throw std::invalid_argument("ProblemSpec: gamma must be finite");
  if (kind != ProblemKind::nls1d && gamma != 1.0)
    throw std::invalid_argument(std::string("ProblemSpec: gamma is fixed to 1 for ") + to_string(kind));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("ProblemSpec: dt must be > 0");
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    throw std::invalid_argument("ProblemSpec: T must be > 0");
  (void)steps();
  const auto recipes = known_recipes();
  if (std::find(recipes.begin(), recipes.end(), initial.recipe) == recipes.end()) {
    std::ostringstream os;
    os << "unknown initial condition '" << initial.recipe << "' (known:";
    for (const auto& r : recipes) os << ' ' << r;
    os << ')';
    throw std::invalid_argument(os.str());
  }
}

std::size_t ProblemSpec::steps() const {
  const double ratio = t_final / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(n * dt - t_final) > 1e-9 * t_final)
    throw std::invalid_argument("ProblemSpec: T/dt must be an integer step count");
  return static_cast<std::size_t>(n);
}

ProblemSpec preset_problem(const std::string& name) {
  ProblemSpec s;
  if (name == "nls1d") {
    const double len = 2.0 * std::numbers::sqrt2 * std::numbers::pi;
    s.kind = ProblemKind::nls1d;
    s.gamma = 2.0;
    s.grid = Grid::line(32, -len / 2.0, len / 2.0);
    s.initial = {kRecipeModulated, {{"amplitude", 0.5}, {"epsilon", 0.01}, {"wavenumber", 1.0}}};
    s.t_final = 500.0;
    s.dt = 0.01;
  } else if (name == "nls2d") {
    s.kind = ProblemKind::nls2d;
    s.gamma = 1.0;
    s.grid = Grid::square(80, 0.0, 2.0 * std::numbers::pi);
    s.initial = {kRecipePlaneWave, {{"kx", 1.0}, {"ky", 1.0}, {"amplitude", 1.0}, {"t0", 0.0}}};
    s.t_final = 30.0;
    s.dt = 0.001;
  } else if (name == "cnls") {
    s.kind = ProblemKind::cnls;
    s.gamma = 1.0;
    s.grid = Grid::line(128, 0.0, 8.0 * std::numbers::pi);
    s.initial = {kRecipeCnls, {{"amplitude", 0.5}, {"epsilon", 0.1}, {"wavenumber", 0.5}}};
    s.t_final = 100.0;
    s.dt = 0.05;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (known: nls1d, nls2d, cnls)");
  }
  return s;
}

StateVector::StateVector(std::size_t f, std::size_t n) : fields(f), points(n), data(2 * f * n, 0.0) {}

std::vector<double> StateVector::envelope(std::size_t f) const {
  std::vector<double> e(points);
  const auto pp = p(f), qq = q(f);
  for (std::size_t i = 0; i < points; ++i) e[i] = std::hypot(pp[i], qq[i]);
  return e;
}

linalg::CirculantOperator build_laplacian(const Grid& grid) {
  grid.validate();
  if (grid.dim == 1) return periodic_second_difference(grid.extents[0], 1.0);
  return linalg::kronecker_sum(periodic_second_difference(grid.extents[0], 1.0),
                               periodic_second_difference(grid.extents[1], 1.0));
}

linalg::CirculantOperator build_scaled_laplacian(const Grid& grid) {
  grid.validate();
  auto axis = [&](std::size_t a) {
    const double s = 1.0 / (grid.spacing[a] * grid.spacing[a]);
    return periodic_second_difference(grid.extents[a], s);
  };
  if (grid.dim == 1) return axis(0);
  return linalg::kronecker_sum(axis(0), axis(1));
}

void add_cubic_terms(const StateVector& state, double gamma, StateVector& dstate) {
  const auto& k = simd::active_kernels();
  const std::size_t n = state.points;
  std::vector<double> r(n, 0.0);
  for (std::size_t f = 0; f < state.fields; ++f)
    k.modulus_sq_acc(state.p(f).data(), state.q(f).data(), r.data(), n);
  for (std::size_t f = 0; f < state.fields; ++f)
    k.cubic_rotation(state.p(f).data(), state.q(f).data(), r.data(), gamma, dstate.p(f).data(),
                     dstate.q(f).data(), n);
}

Problem::Problem(ProblemSpec spec)
    : spec_(std::move(spec)),
      laplacian_(std::make_shared<const linalg::CirculantOperator>(build_scaled_laplacian(spec_.grid))) {
  spec_.validate();
}

void Problem::check_layout(const StateVector& s) const {
  if (s.fields != spec_.fields() || s.points != spec_.grid.points() ||
      s.data.size() != spec_.unknowns())
    throw std::invalid_argument("state layout does not match the problem");
}

void Problem::rhs(const StateVector& state, StateVector& dstate) const {
  check_layout(state);
  check_layout(dstate);
  std::fill(dstate.data.begin(), dstate.data.end(), 0.0);
  for (std::size_t f = 0; f < state.fields; ++f) {
    laplacian_->apply_add(-1.0, state.q(f), dstate.p(f));
    laplacian_->apply_add(1.0, state.p(f), dstate.q(f));
  }
  add_cubic_terms(state, spec_.gamma, dstate);
}

StateVector Problem::rhs(const StateVector& state) const {
  StateVector d = make_state();
  rhs(state, d);
  return d;
}

double Problem::hamiltonian(const StateVector& state, CnlsQuartic form) const {
  check_layout(state);
  const Grid& g = spec_.grid;
  const std::size_t n = state.points;
  double grad = 0.0;
  for (std::size_t c = 0; c < state.components(); ++c) grad += gradient_energy(g, state.component(c));

  double quartic = 0.0;
  if (spec_.kind == ProblemKind::cnls) {
    for (std::size_t i = 0; i < n; ++i) {
      double pp = 0.0, qq = 0.0;
      for (std::size_t f = 0; f < state.fields; ++f) {
        pp += state.p(f)[i] * state.p(f)[i];
        qq += state.q(f)[i] * state.q(f)[i];
      }
      if (form == CnlsQuartic::printed)
        quartic += 0.25 * (pp * pp + qq * qq) + 0.5 * pp * qq;
      else
        quartic += 0.25 * (pp + qq) * (pp + qq);
    }
    return g.cell_volume() * (-0.5 * grad + quartic);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double r = state.p()[i] * state.p()[i] + state.q()[i] * state.q()[i];
    quartic += r * r;
  }
  return g.cell_volume() * (0.5 * grad - 0.25 * spec_.gamma * quartic);
}

double Problem::hamiltonian_pairing() const noexcept {
  const double v = spec_.grid.cell_volume();
  return spec_.kind == ProblemKind::cnls ? -1.0 / v : 1.0 / v;
}

StateVector semi_discrete_rhs(const ProblemSpec& spec, const StateVector& state) {
  return Problem(spec).rhs(state);
}

double hamiltonian(const ProblemSpec& spec, const StateVector& state) {
  return Problem(spec).hamiltonian(state);
}

StateVector initial_state(const ProblemSpec& spec) {
  spec.validate();
  const Grid& g = spec.grid;
  const InitialCondition& ic = spec.initial;
  StateVector s(spec.fields(), g.points());

  if (ic.recipe == kRecipeModulated) {
    if (spec.kind != ProblemKind::nls1d)
      throw std::invalid_argument(std::string(kRecipeModulated) + " needs the nls1d problem");
    const double a = param(ic, "amplitude", 0.5);
    const double eps = param(ic, "epsilon", 0.01);
    const double k = param(ic, "wavenumber", 1.0);
    const double len = g.upper[0] - g.lower[0];
    for (std::size_t j = 0; j < g.points(); ++j)
      s.p()[j] = a * (1.0 + eps * std::cos(2.0 * std::numbers::pi * k * g.node(0, j) / len));
  } else if (ic.recipe == kRecipePlaneWave) {
    if (spec.kind == ProblemKind::cnls)
      throw std::invalid_argument(std::string(kRecipePlaneWave) + " is a single-field recipe");
    const double kx = param(ic, "kx", 1.0), ky = param(ic, "ky", 1.0);
    const double a = param(ic, "amplitude", 1.0), t0 = param(ic, "t0", 0.0);
    const double omega = kx * kx + (g.dim == 2 ? ky * ky : 0.0) - spec.gamma * a * a;
    if (g.dim == 1) {
      for (std::size_t j = 0; j < g.points(); ++j) {
        const double ph = kx * g.node(0, j) - omega * t0;
        s.p()[j] = a * std::cos(ph);
        s.q()[j] = a * std::sin(ph);
      }
    } else {
      const std::size_t n1 = g.extents[1];
      for (std::size_t i = 0; i < g.extents[0]; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
          const double ph = kx * g.node(0, i) + ky * g.node(1, j) - omega * t0;
          s.p()[i * n1 + j] = a * std::cos(ph);
          s.q()[i * n1 + j] = a * std::sin(ph);
        }
    }
  } else if (ic.recipe == kRecipeCnls) {
    if (spec.kind != ProblemKind::cnls)
      throw std::invalid_argument(std::string(kRecipeCnls) + " needs the cnls problem");
    const double a = param(ic, "amplitude", 0.5);
    const double eps = param(ic, "epsilon", 0.1);
    const double k = param(ic, "wavenumber", 0.5);
    for (std::size_t j = 0; j < g.points(); ++j) {
      const double v = a * (1.0 - eps * std::cos(k * g.node(0, j)));
      s.p(0)[j] = v;
      s.p(1)[j] = v;
    }
  }
  return s;
}

}  // namespace nlsrom::model
