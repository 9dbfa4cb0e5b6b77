#include "nlsrom/rom.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nlsrom/simd/kernels.hpp"

namespace nlsrom::rom {
namespace {

using linalg::DenseMatrix;

void gemv(bool trans, const DenseMatrix& a, const double* x, double alpha, double beta, double* y) {
  cblas_dgemv(CblasColMajor, trans ? CblasTrans : CblasNoTrans, static_cast<int>(a.rows()),
              static_cast<int>(a.cols()), alpha, a.data(), static_cast<int>(a.rows()), x, 1, beta,
              y, 1);
}

void check_times(const integrate::Trajectory& full, const ReducedTrajectory& reduced) {
  if (full.times.size() != reduced.times.size())
    throw std::invalid_argument("time grids differ in length");
  for (std::size_t j = 0; j < full.times.size(); ++j)
    if (std::abs(full.times[j] - reduced.times[j]) > 1e-9 * std::max(1.0, std::abs(full.times[j])))
      throw std::invalid_argument("time grids differ at snapshot " + std::to_string(j));
}

// Squared W-norm of y_h(t_j) - V_c a_c(t_j) for every snapshot j.
std::vector<double> component_errors(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                                     const ReducedSystem& sys, std::size_t c) {
  check_times(full, reduced);
  if (c >= full.components.size() || c >= sys.bases.size())
    throw std::invalid_argument("component index out of range");
  const DenseMatrix& yh = full.components[c];
  if (yh.empty()) throw std::invalid_argument("full trajectory component was released");
  const DenseMatrix& v = sys.bases[c];
  const std::size_t m = yh.rows(), n = yh.cols(), l = sys.l, dim = sys.dim();
  if (m != v.rows()) throw std::invalid_argument("basis and trajectory grids differ");

  const bool ident = std::all_of(sys.w.begin(), sys.w.end(), [](double x) { return x == 1.0; });
  const auto& k = simd::active_kernels();
  constexpr std::size_t kBlock = 512;
  std::vector<double> block(m * std::min(kBlock, n));
  std::vector<double> out(n);
  for (std::size_t c0 = 0; c0 < n; c0 += kBlock) {
    const std::size_t nb = std::min(kBlock, n - c0);
    std::copy_n(yh.data() + c0 * m, m * nb, block.data());
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(m), static_cast<int>(nb),
                static_cast<int>(l), -1.0, v.data(), static_cast<int>(m),
                reduced.coeffs.data() + c * l + c0 * dim, static_cast<int>(dim), 1.0, block.data(),
                static_cast<int>(m));
    for (std::size_t j = 0; j < nb; ++j) {
      const double* r = block.data() + j * m;
      out[c0 + j] = ident ? k.dot(r, r, m) : k.weighted_dot(r, sys.w.data(), r, m);
    }
  }
  return out;
}

}  // namespace

const char* to_string(RomIntegrator r) noexcept {
  return r == RomIntegrator::midpoint ? "midpoint" : "strang";
}

void ReducedSystem::lift(std::span<const double> coeffs, model::StateVector& out) const {
  if (coeffs.size() != dim()) throw std::invalid_argument("lift: coefficient length mismatch");
  if (out.fields != fields || out.points != points())
    throw std::invalid_argument("lift: state layout mismatch");
  for (std::size_t c = 0; c < bases.size(); ++c)
    gemv(false, bases[c], coeffs.data() + c * l, 1.0, 0.0, out.component(c).data());
}

model::StateVector ReducedSystem::lift(std::span<const double> coeffs) const {
  model::StateVector s(fields, points());
  lift(coeffs, s);
  return s;
}

std::vector<double> ReducedSystem::project(const model::StateVector& state) const {
  if (state.fields != fields || state.points != points())
    throw std::invalid_argument("project: state layout mismatch");
  std::vector<double> c(dim()), tmp(points());
  for (std::size_t k = 0; k < bases.size(); ++k) {
    auto u = state.component(k);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = w[i] * u[i];
    gemv(true, bases[k], tmp.data(), 1.0, 0.0, c.data() + k * l);
  }
  return c;
}

ReducedSystem build_reduced(std::shared_ptr<const model::Problem> problem,
                            std::vector<DenseMatrix> bases, std::vector<double> w) {
  if (!problem) throw std::invalid_argument("build_reduced: null problem");
  const auto& spec = problem->spec();
  if (bases.size() != spec.components())
    throw std::invalid_argument("build_reduced: need one basis per state component");
  const std::size_t m = spec.grid.points();
  const std::size_t l = bases.front().cols();
  for (const auto& b : bases) {
    if (b.rows() != m) throw std::invalid_argument("build_reduced: basis built on a different grid");
    if (b.cols() != l) throw std::invalid_argument("build_reduced: bases must share the same l");
  }
  if (w.empty()) w.assign(m, 1.0);
  if (w.size() != m) throw std::invalid_argument("build_reduced: weight length mismatch");

  ReducedSystem sys;
  sys.problem = std::move(problem);
  sys.gamma = spec.gamma;
  sys.l = l;
  sys.fields = spec.fields();
  sys.bases = std::move(bases);
  sys.w = std::move(w);

  const auto& a = sys.problem->laplacian();
  // (rows basis)^T W A (cols basis)
  auto galerkin = [&](const DenseMatrix& rows, const DenseMatrix& cols) {
    DenseMatrix out(l, l);
    std::vector<double> av(m);
    for (std::size_t j = 0; j < l; ++j) {
      a.apply(cols.col(j), av);
      for (std::size_t i = 0; i < l; ++i) out(i, j) = simd::weighted_dot(rows.col(i), sys.w, av);
    }
    return out;
  };
  for (std::size_t f = 0; f < sys.fields; ++f) {
    sys.b_pq.push_back(galerkin(sys.bases[2 * f], sys.bases[2 * f + 1]));
    sys.b_qp.push_back(galerkin(sys.bases[2 * f + 1], sys.bases[2 * f]));
  }
  return sys;
}

ReducedSystem build_reduced(const model::ProblemSpec& spec, const std::vector<pod::PodBasis>& bases,
                            const pod::InnerProductSpec& ip) {
  std::vector<DenseMatrix> mats;
  for (const auto& b : bases) mats.push_back(b.modes);
  return build_reduced(std::make_shared<const model::Problem>(spec), std::move(mats), ip.w);
}

ReducedSystem build_reduced(const model::ProblemSpec& spec, const pod::PodBasis& basis_p,
                            const pod::PodBasis& basis_q, const pod::InnerProductSpec& ip) {
  if (spec.kind == model::ProblemKind::cnls)
    throw std::invalid_argument("build_reduced: the coupled problem needs four bases");
  if (basis_p.l != basis_q.l) throw std::invalid_argument("build_reduced: bases must share the same l");
  return build_reduced(spec, std::vector<pod::PodBasis>{basis_p, basis_q}, ip);
}

void reduced_rhs(const ReducedSystem& sys, std::span<const double> coeffs, std::span<double> out,
                 RhsPart part) {
  const std::size_t l = sys.l;
  if (coeffs.size() != sys.dim() || out.size() != sys.dim())
    throw std::invalid_argument("reduced_rhs: coefficient length mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  if (part != RhsPart::nonlinear) {
    for (std::size_t f = 0; f < sys.fields; ++f) {
      const double* a = coeffs.data() + 2 * f * l;
      const double* b = a + l;
      gemv(false, sys.b_pq[f], b, -1.0, 1.0, out.data() + 2 * f * l);
      gemv(false, sys.b_qp[f], a, 1.0, 1.0, out.data() + (2 * f + 1) * l);
    }
  }
  if (part != RhsPart::linear && sys.gamma != 0.0) {
    const model::StateVector s = sys.lift(coeffs);
    model::StateVector g(sys.fields, sys.points());
    model::add_cubic_terms(s, sys.gamma, g);
    for (std::size_t c = 0; c < sys.bases.size(); ++c) {
      auto gc = g.component(c);
      for (std::size_t i = 0; i < gc.size(); ++i) gc[i] *= sys.w[i];
      gemv(true, sys.bases[c], gc.data(), 1.0, 1.0, out.data() + c * l);
    }
  }
}

std::vector<double> reduced_rhs(const ReducedSystem& sys, std::span<const double> coeffs) {
  std::vector<double> out(sys.dim());
  reduced_rhs(sys, coeffs, out);
  return out;
}

void reduced_jacobian(const ReducedSystem& sys, std::span<const double> coeffs, DenseMatrix& jac,
                      RhsPart part) {
  const std::size_t l = sys.l, n = sys.dim(), m = sys.points();
  if (coeffs.size() != n) throw std::invalid_argument("reduced_jacobian: coefficient length mismatch");
  if (jac.rows() != n || jac.cols() != n) jac = DenseMatrix(n, n);
  std::fill(jac.values().begin(), jac.values().end(), 0.0);

  if (part != RhsPart::nonlinear) {
    for (std::size_t f = 0; f < sys.fields; ++f) {
      const std::size_t ra = 2 * f * l, rb = ra + l;
      for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < l; ++i) {
          jac(ra + i, rb + j) = -sys.b_pq[f](i, j);
          jac(rb + i, ra + j) = sys.b_qp[f](i, j);
        }
    }
  }
  if (part == RhsPart::linear || sys.gamma == 0.0) return;

  const model::StateVector s = sys.lift(coeffs);
  std::vector<double> r(m, 0.0);
  for (std::size_t f = 0; f < sys.fields; ++f)
    simd::active_kernels().modulus_sq_acc(s.p(f).data(), s.q(f).data(), r.data(), m);

  const double g = sys.gamma;
  DenseMatrix scaled(m, l), block(l, l);
  std::vector<double> d(m);
  for (std::size_t c = 0; c < sys.bases.size(); ++c) {
    const std::size_t fc = c / 2;
    const bool cp = c % 2 == 0;
    for (std::size_t e = 0; e < sys.bases.size(); ++e) {
      const std::size_t fe = e / 2;
      const bool ep = e % 2 == 0;
      const bool same = fc == fe;
      auto pc = s.p(fc), qc = s.q(fc), pe = s.p(fe), qe = s.q(fe);
      // derivative of the cubic term of component c with respect to component e
      for (std::size_t i = 0; i < m; ++i) {
        double v;
        if (cp && ep)
          v = -g * 2.0 * qc[i] * pe[i];
        else if (cp)
          v = -g * ((same ? r[i] : 0.0) + 2.0 * qc[i] * qe[i]);
        else if (ep)
          v = g * ((same ? r[i] : 0.0) + 2.0 * pc[i] * pe[i]);
        else
          v = g * 2.0 * pc[i] * qe[i];
        d[i] = v * sys.w[i];
      }
      const DenseMatrix& ve = sys.bases[e];
      for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < m; ++i) scaled(i, j) = d[i] * ve(i, j);
      cblas_dgemm(CblasColMajor, CblasTrans, CblasNoTrans, static_cast<int>(l), static_cast<int>(l),
                  static_cast<int>(m), 1.0, sys.bases[c].data(), static_cast<int>(m), scaled.data(),
                  static_cast<int>(m), 0.0, block.data(), static_cast<int>(l));
      for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < l; ++i) jac(c * l + i, e * l + j) += block(i, j);
    }
  }
}

ReducedTrajectory integrate_rom(const ReducedSystem& sys, const model::StateVector& y0, double t_final,
                                double dt, const integrate::IntegratorConfig& cfg,
                                RomIntegrator integrator) {
  cfg.validate();
  if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("integrate_rom: dt and T must be > 0");
  const double ratio = std::round(t_final / dt);
  if (ratio < 1.0 || std::abs(ratio * dt - t_final) > 1e-9 * t_final)
    throw std::invalid_argument("integrate_rom: T/dt must be an integer step count");
  const auto steps = static_cast<std::size_t>(ratio);
  const std::size_t n = sys.dim();
  const std::size_t nsnap = steps / cfg.snapshot_stride + 1;

  ReducedTrajectory out;
  out.dt = dt;
  out.stride = cfg.snapshot_stride;
  out.integrator = integrator;
  out.coeffs = DenseMatrix(n, nsnap);
  out.times.reserve(nsnap);

  std::vector<double> c = sys.project(y0);

  auto full_rhs = [&](std::span<const double> y, std::span<double> dy) { reduced_rhs(sys, y, dy); };
  auto full_jac = [&](std::span<const double> y, DenseMatrix& j) { reduced_jacobian(sys, y, j); };
  auto nl_rhs = [&](std::span<const double> y, std::span<double> dy) {
    reduced_rhs(sys, y, dy, RhsPart::nonlinear);
  };
  auto nl_jac = [&](std::span<const double> y, DenseMatrix& j) {
    reduced_jacobian(sys, y, j, RhsPart::nonlinear);
  };

  // Cayley propagator (I - h/2 L)^{-1} (I + h/2 L) of the reduced linear part
  const bool nln = cfg.split_order == integrate::SplitOrder::nln;
  DenseMatrix cayley;
  if (integrator == RomIntegrator::strang) {
    const double h = nln ? dt : 0.5 * dt;
    DenseMatrix lin(n, n);
    reduced_jacobian(sys, c, lin, RhsPart::linear);
    DenseMatrix lhs(n, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) lhs(i, j) = (i == j ? 1.0 : 0.0) - 0.5 * h * lin(i, j);
    cayley = DenseMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = (i == j ? 1.0 : 0.0) + 0.5 * h * lin(i, j);
      linalg::solve_dense(lhs, col);
      std::copy(col.begin(), col.end(), cayley.col(j).begin());
    }
  }
  std::vector<double> tmp(n);
  auto apply_cayley = [&] {
    gemv(false, cayley, c.data(), 1.0, 0.0, tmp.data());
    c.swap(tmp);
  };

  auto record = [&](std::size_t s) {
    std::copy(c.begin(), c.end(), out.coeffs.col(out.times.size()).begin());
    out.times.push_back(static_cast<double>(s) * dt);
  };
  record(0);
  for (std::size_t s = 1; s <= steps; ++s) {
    try {
      if (integrator == RomIntegrator::midpoint) {
        c = integrate::midpoint_newton(full_rhs, c, dt, cfg, full_jac);
      } else if (nln) {
        c = integrate::midpoint_newton(nl_rhs, c, 0.5 * dt, cfg, nl_jac);
        apply_cayley();
        c = integrate::midpoint_newton(nl_rhs, c, 0.5 * dt, cfg, nl_jac);
      } else {
        apply_cayley();
        c = integrate::midpoint_newton(nl_rhs, c, dt, cfg, nl_jac);
        apply_cayley();
      }
    } catch (const integrate::NewtonError& e) {
      const double t = static_cast<double>(s - 1) * dt;
      throw integrate::StepError(
          "integrate_rom: step from t = " + std::to_string(t) + " failed: " + e.what(), t);
    }
    if (s % cfg.snapshot_stride == 0) record(s);
  }
  return out;
}

double rom_error(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                 const ReducedSystem& sys, std::size_t component, ErrorForm form) {
  const auto e2 = component_errors(full, reduced, sys, component);
  double s = 0.0;
  for (double v : e2) s += form == ErrorForm::verbatim ? std::sqrt(v) : v;
  return std::sqrt(s / static_cast<double>(e2.size()));
}

std::vector<double> lifted_hamiltonian(const ReducedTrajectory& reduced, const ReducedSystem& sys) {
  std::vector<double> h(reduced.snapshots());
  model::StateVector s(sys.fields, sys.points());
  for (std::size_t j = 0; j < h.size(); ++j) {
    sys.lift(reduced.at(j), s);
    h[j] = sys.problem->hamiltonian(s);
  }
  return h;
}

double ham_rom_error(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                     const ReducedSystem& sys, HamReference ref) {
  check_times(full, reduced);
  const auto hl = lifted_hamiltonian(reduced, sys);
  double s = 0.0;
  for (std::size_t j = 0; j < hl.size(); ++j) {
    const double hh = ref == HamReference::trajectory ? full.hamiltonian[j] : full.hamiltonian.front();
    s += (hh - hl[j]) * (hh - hl[j]);
  }
  return std::sqrt(s / static_cast<double>(hl.size()));
}

double squared_rom_error(const integrate::Trajectory& full, const ReducedTrajectory& reduced,
                         const ReducedSystem& sys, const pod::InnerProductSpec& ip) {
  if (ip.alpha.size() != full.snapshots())
    throw std::invalid_argument("squared_rom_error: alpha length mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < sys.bases.size(); ++c) {
    const auto e2 = component_errors(full, reduced, sys, c);
    for (std::size_t j = 0; j < e2.size(); ++j) total += ip.alpha[j] * e2[j];
  }
  return total;
}

double error_bound_tail(const DenseMatrix& y, const pod::PodBasis& basis, const pod::InnerProductSpec& ip,
                        std::size_t l, double snapshot_spacing) {
  const std::size_t d = basis.d, n = y.cols();
  if (l > d) throw std::invalid_argument("error_bound_tail: l exceeds the numerical rank");
  if (basis.modes.cols() < d) throw std::invalid_argument("error_bound_tail: basis must hold all d modes");
  if (!(snapshot_spacing > 0.0)) throw std::invalid_argument("error_bound_tail: spacing must be > 0");
  if (l == d) return 0.0;
  if (n < 2) throw std::invalid_argument("error_bound_tail: need at least two snapshots");
  ip.validate(y.rows(), n);
  const DenseMatrix c = pod::project_snapshots(y, basis, ip, d);
  double tail = 0.0;
  for (std::size_t i = l; i < d; ++i) {
    double deriv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dc;
      if (j == 0)
        dc = (c(i, 1) - c(i, 0)) / snapshot_spacing;
      else if (j + 1 == n)
        dc = (c(i, j) - c(i, j - 1)) / snapshot_spacing;
      else
        dc = (c(i, j + 1) - c(i, j - 1)) / (2.0 * snapshot_spacing);
      deriv += ip.alpha[j] * dc * dc;
    }
    tail += 2.0 * basis.sigma_raw[i] * basis.sigma_raw[i] + deriv;
  }
  return tail;
}

double error_bound_quantity(const DenseMatrix& y, const pod::PodBasis& basis, const pod::InnerProductSpec& ip,
                            std::size_t l, double dt, double snapshot_spacing) {
  const double h = snapshot_spacing > 0.0 ? snapshot_spacing : dt;
  const double dt2 = dt * dt;
  return error_bound_tail(y, basis, ip, l, h) + dt2 * dt2;
}

}  // namespace nlsrom::rom
