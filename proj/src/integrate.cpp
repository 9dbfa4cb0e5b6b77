#include "nlsrom/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::integrate {
namespace {

using linalg::cplx;
using linalg::DenseMatrix;

// Solves the small dense system a x = b in place (partial pivoting).
template <std::size_t N>
void solve_small(std::array<std::array<double, N>, N>& a, std::array<double, N>& b) {
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) throw NewtonError("singular pointwise Jacobian", NAN);
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < N; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < N; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = N; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < N; ++k) s -= a[c][k] * b[k];
    b[c] = s / a[c][c];
  }
}

// One Newton sweep of the coupled two-field pointwise midpoint system.
double coupled_midpoint_sweep(const model::StateVector& y0, model::StateVector& y, double h,
                              double gamma) {
  const std::size_t n = y.points;
  double res2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 4> u0{}, u{}, m{};
    for (std::size_t c = 0; c < 4; ++c) {
      u0[c] = y0.component(c)[i];
      u[c] = y.component(c)[i];
      m[c] = 0.5 * (u0[c] + u[c]);
    }
    const double r = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
    std::array<double, 4> f{};
    for (std::size_t fl = 0; fl < 2; ++fl) {
      const double mp = m[2 * fl], mq = m[2 * fl + 1];
      f[2 * fl] = u[2 * fl] - u0[2 * fl] + h * gamma * r * mq;
      f[2 * fl + 1] = u[2 * fl + 1] - u0[2 * fl + 1] - h * gamma * r * mp;
    }
    for (double v : f) res2 += v * v;

    // J = I - (h/2) dg/du at the midpoint
    std::array<std::array<double, 4>, 4> jac{};
    const double hh = 0.5 * h * gamma;
    for (std::size_t a = 0; a < 2; ++a) {
      const double pa = m[2 * a], qa = m[2 * a + 1];
      for (std::size_t b = 0; b < 2; ++b) {
        const double pb = m[2 * b], qb = m[2 * b + 1];
        const double delta = a == b ? r : 0.0;
        jac[2 * a][2 * b] = -hh * (-2.0 * qa * pb);
        jac[2 * a][2 * b + 1] = -hh * (-(delta + 2.0 * qa * qb));
        jac[2 * a + 1][2 * b] = -hh * (delta + 2.0 * pa * pb);
        jac[2 * a + 1][2 * b + 1] = -hh * (2.0 * pa * qb);
      }
    }
    for (std::size_t c = 0; c < 4; ++c) jac[c][c] += 1.0;
    solve_small(jac, f);
    for (std::size_t c = 0; c < 4; ++c) y.component(c)[i] = u[c] - f[c];
  }
  return res2;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(newton_tol > 0.0)) throw std::invalid_argument("IntegratorConfig: newton_tol must be > 0");
  if (newton_max_iters == 0)
    throw std::invalid_argument("IntegratorConfig: newton_max_iters must be >= 1");
  if (snapshot_stride == 0)
    throw std::invalid_argument("IntegratorConfig: snapshot_stride must be >= 1");
}

StabilityCheck check_stability(double dt, const model::Grid& grid) {
  if (grid.dim != 1) throw std::invalid_argument("check_stability: defined for 1D grids");
  const double len = grid.upper[0] - grid.lower[0];
  const double dx = grid.spacing[0];
  const double bound = 2.0 * dx * dx / len;
  return {dt < bound, bound, dt - bound};
}

std::vector<double> midpoint_newton(const RhsFn& rhs, std::span<const double> y, double dt,
                                    const IntegratorConfig& cfg, const JacobianFn& jacobian,
                                    NewtonStats* stats) {
  const std::size_t n = y.size();
  std::vector<double> z(y.begin(), y.end()), mid(n), f(n), g(n), fp(n);
  DenseMatrix jac(n, n), sys(n, n);
  double res = 0.0;
  for (std::size_t it = 0;; ++it) {
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (y[i] + z[i]);
    rhs(mid, f);
    for (std::size_t i = 0; i < n; ++i) g[i] = z[i] - y[i] - dt * f[i];
    res = linalg::norm2(g);
    if (!std::isfinite(res)) throw NewtonError("midpoint_newton: non-finite residual", res);
    if (res <= cfg.newton_tol) {
      if (stats) *stats = {it, res};
      return z;
    }
    if (it == cfg.newton_max_iters)
      throw NewtonError("midpoint_newton: no convergence in " + std::to_string(it) +
                            " iterations (residual " + std::to_string(res) + ")",
                        res);
    if (jacobian) {
      jacobian(mid, jac);
    } else {
      for (std::size_t c = 0; c < n; ++c) {
        const double step = 1e-7 * std::max(1.0, std::abs(mid[c]));
        const double keep = mid[c];
        mid[c] = keep + step;
        rhs(mid, fp);
        mid[c] = keep;
        for (std::size_t r = 0; r < n; ++r) jac(r, c) = (fp[r] - f[r]) / step;
      }
    }
    // G'(z) = I - (dt/2) J
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t r = 0; r < n; ++r) sys(r, c) = (r == c ? 1.0 : 0.0) - 0.5 * dt * jac(r, c);
    linalg::solve_dense(sys, g);
    for (std::size_t i = 0; i < n; ++i) z[i] -= g[i];
  }
}

Stepper::Stepper(std::shared_ptr<const model::Problem> problem, IntegratorConfig cfg)
    : problem_(std::move(problem)), cfg_(cfg) {
  if (!problem_) throw std::invalid_argument("Stepper: null problem");
  cfg_.validate();
}

const std::vector<cplx>& Stepper::multipliers(double h) const {
  for (const auto& [key, mult] : cache_)
    if (key == h) return mult;
  const auto lambda = problem_->laplacian().eigenvalues();
  std::vector<cplx> mult(lambda.size());
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double l = lambda[k].real();
    if (cfg_.linear_solve == LinearSolve::exact_rotation) {
      mult[k] = std::polar(1.0, h * l);
    } else {
      // (1 - i h/2 A)^{-1} (1 + i h/2 A) on each Fourier mode
      const cplx half{0.0, 0.5 * h * l};
      mult[k] = (1.0 + half) / (1.0 - half);
    }
  }
  if (cache_.size() >= 8) cache_.erase(cache_.begin());
  cache_.emplace_back(h, std::move(mult));
  return cache_.back().second;
}

void Stepper::linear_substep(model::StateVector& state, double h) const {
  const auto& mult = multipliers(h);
  const auto& fft = problem_->laplacian().fft();
  thread_local std::vector<cplx> u;
  u.resize(state.points);
  for (std::size_t f = 0; f < state.fields; ++f) {
    auto p = state.p(f);
    auto q = state.q(f);
    for (std::size_t i = 0; i < state.points; ++i) u[i] = {p[i], q[i]};
    fft.forward(u);
    simd::active_kernels().complex_mul(u.data(), mult.data(), u.size());
    fft.inverse(u);
    for (std::size_t i = 0; i < state.points; ++i) {
      p[i] = u[i].real();
      q[i] = u[i].imag();
    }
  }
}

void Stepper::nonlinear_substep(model::StateVector& state, double h) const {
  const double gamma = problem_->spec().gamma;
  if (gamma == 0.0 || h == 0.0) return;
  const model::StateVector y0 = state;
  const auto& k = simd::active_kernels();
  double res = 0.0;
  for (std::size_t it = 0; it < cfg_.newton_max_iters; ++it) {
    double res2;
    if (state.fields == 1)
      res2 = k.cubic_midpoint_sweep(y0.p().data(), y0.q().data(), state.p().data(),
                                    state.q().data(), h * gamma, state.points);
    else
      res2 = coupled_midpoint_sweep(y0, state, h, gamma);
    res = std::sqrt(res2);
    if (!std::isfinite(res)) break;
    if (res <= cfg_.newton_tol) return;
  }
  throw NewtonError("nonlinear substep: Newton did not converge (residual " + std::to_string(res) + ")",
                    res);
}

void Stepper::strang(model::StateVector& state, double dt) const {
  if (cfg_.split_order == SplitOrder::nln) {
    nonlinear_substep(state, 0.5 * dt);
    linear_substep(state, dt);
    nonlinear_substep(state, 0.5 * dt);
  } else {
    linear_substep(state, 0.5 * dt);
    nonlinear_substep(state, dt);
    linear_substep(state, 0.5 * dt);
  }
}

// Simplified Newton for the unsplit midpoint rule: the linear part is
// solved exactly in Fourier space while the cubic term is lagged.
void Stepper::full_midpoint(model::StateVector& state, double dt) const {
  const model::Problem& pr = *problem_;
  const auto& fft = pr.laplacian().fft();
  const auto lambda = pr.laplacian().eigenvalues();
  const std::size_t n = state.points;
  const model::StateVector y = state;
  model::StateVector mid = pr.make_state(), f = pr.make_state(), nl = pr.make_state();

  // (1 + i dt/2 A) y in Fourier space, per field
  std::vector<std::vector<cplx>> base(state.fields, std::vector<cplx>(n));
  for (std::size_t fl = 0; fl < state.fields; ++fl) {
    for (std::size_t i = 0; i < n; ++i) base[fl][i] = {y.p(fl)[i], y.q(fl)[i]};
    fft.forward(base[fl]);
    for (std::size_t k = 0; k < n; ++k) base[fl][k] *= cplx{1.0, 0.5 * dt * lambda[k].real()};
  }
  std::vector<cplx> u(n);
  double res = 0.0;
  for (std::size_t it = 0; it <= cfg_.newton_max_iters; ++it) {
    for (std::size_t i = 0; i < y.data.size(); ++i) mid.data[i] = 0.5 * (y.data[i] + state.data[i]);
    pr.rhs(mid, f);
    double r2 = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      const double g = state.data[i] - y.data[i] - dt * f.data[i];
      r2 += g * g;
    }
    res = std::sqrt(r2);
    if (!std::isfinite(res)) break;
    if (res <= cfg_.newton_tol) return;
    if (it == cfg_.newton_max_iters) break;

    std::fill(nl.data.begin(), nl.data.end(), 0.0);
    model::add_cubic_terms(mid, pr.spec().gamma, nl);
    for (std::size_t fl = 0; fl < state.fields; ++fl) {
      for (std::size_t i = 0; i < n; ++i) u[i] = dt * cplx{nl.p(fl)[i], nl.q(fl)[i]};
      fft.forward(u);
      for (std::size_t k = 0; k < n; ++k)
        u[k] = (u[k] + base[fl][k]) / cplx{1.0, -0.5 * dt * lambda[k].real()};
      fft.inverse(u);
      for (std::size_t i = 0; i < n; ++i) {
        state.p(fl)[i] = u[i].real();
        state.q(fl)[i] = u[i].imag();
      }
    }
  }
  throw NewtonError("full midpoint: iteration did not converge (residual " + std::to_string(res) + ")",
                    res);
}

void Stepper::step(model::StateVector& state, double dt) const {
  problem_->check_layout(state);
  if (cfg_.scheme == Scheme::strang_split)
    strang(state, dt);
  else
    full_midpoint(state, dt);
}

model::StateVector strang_step(const model::ProblemSpec& spec, const model::StateVector& state,
                               double dt, const IntegratorConfig& cfg) {
  IntegratorConfig c = cfg;
  c.scheme = Scheme::strang_split;
  Stepper stepper(std::make_shared<const model::Problem>(spec), c);
  model::StateVector out = state;
  stepper.step(out, dt);
  return out;
}

model::StateVector Trajectory::state(std::size_t j) const {
  if (j >= snapshots()) throw std::out_of_range("Trajectory::state: index out of range");
  std::size_t rows = 0;
  for (const auto& m : components) rows = std::max(rows, m.rows());
  model::StateVector s(fields, rows);
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (components[c].empty()) throw std::logic_error("Trajectory::state: component was released");
    auto col = components[c].col(j);
    std::copy(col.begin(), col.end(), s.component(c).begin());
  }
  return s;
}

Trajectory simulate(const model::ProblemSpec& spec, const IntegratorConfig& cfg,
                    const std::vector<bool>& keep) {
  cfg.validate();
  auto problem = std::make_shared<const model::Problem>(spec);
  Stepper stepper(problem, cfg);

  Trajectory traj;
  traj.dt = spec.dt;
  traj.stride = cfg.snapshot_stride;
  traj.fields = spec.fields();
  if (spec.kind == model::ProblemKind::nls1d) {
    const StabilityCheck sc = check_stability(spec.dt, spec.grid);
    if (!sc.stable) {
      std::ostringstream os;
      os << "dt = " << spec.dt << " violates the stability bound dt < 2 dx^2 / L = " << sc.bound
         << " (margin " << sc.margin << ")";
      traj.warnings.push_back(os.str());
    }
  }

  const std::size_t steps = spec.steps();
  const std::size_t nsnap = steps / cfg.snapshot_stride + 1;
  const std::size_t points = spec.grid.points();
  traj.times.reserve(nsnap);
  traj.hamiltonian.reserve(nsnap);
  if (!keep.empty() && keep.size() != spec.components())
    throw std::invalid_argument("simulate: keep mask needs one entry per component");
  for (std::size_t c = 0; c < spec.components(); ++c) {
    if (keep.empty() || keep[c])
      traj.components.emplace_back(points, nsnap);
    else
      traj.components.emplace_back();
  }

  model::StateVector state = model::initial_state(spec);
  auto record = [&](std::size_t step) {
    const std::size_t j = traj.times.size();
    const double t = static_cast<double>(step) * spec.dt;
    if (!linalg::all_finite(state.data))
      throw StepError("simulate: state became non-finite at t = " + std::to_string(t), t);
    for (std::size_t c = 0; c < state.components(); ++c) {
      if (traj.components[c].empty()) continue;
      auto src = state.component(c);
      std::copy(src.begin(), src.end(), traj.components[c].col(j).begin());
    }
    traj.times.push_back(t);
    traj.hamiltonian.push_back(problem->hamiltonian(state));
  };

  record(0);
  for (std::size_t s = 1; s <= steps; ++s) {
    try {
      stepper.step(state, spec.dt);
    } catch (const NewtonError& e) {
      const double t = static_cast<double>(s - 1) * spec.dt;
      throw StepError(std::string("simulate: step from t = ") + std::to_string(t) +
                          " failed: " + e.what(),
                      t);
    }
    if (s % cfg.snapshot_stride == 0) record(s);
  }
  return traj;
}

}  // namespace nlsrom::integrate
