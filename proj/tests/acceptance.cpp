// Acceptance checks for the nine end-to-end criteria.
//
//   acceptance [criterion ...] [--out DIR]
//
// With no criterion numbers every check runs. Each prints its measurements
// followed by one "PASS criterion N" or "FAIL criterion N" line; the exit
// status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nlsrom/experiment.hpp"
#include "nlsrom/integrate.hpp"
#include "nlsrom/linalg/svd.hpp"
#include "nlsrom/pod.hpp"
#include "nlsrom/rom.hpp"

using namespace nlsrom;
using linalg::DenseMatrix;
namespace fs = std::filesystem;

namespace {

fs::path g_out = "acceptance_out";

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Least-squares slope of y against t.
double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) st += t[i], sy += y[i];
  const double mt = st / n, my = sy / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return num / den;
}

std::vector<double> ranks_of(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * double(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks_of(a), rb = ranks_of(b);
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += ra[i] / n, mb += rb[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

bool within_factor(double v, double target, double f) { return v > 0 && v <= target * f && v >= target / f; }

const integrate::Trajectory& nls1d_trajectory() {
  static const integrate::Trajectory tr = integrate::simulate(model::preset_problem("nls1d"), {});
  return tr;
}

// ---------------------------------------------------------------------------

// Projection error versus singular value tail. Pairs whose tail lies at the
// round-off level of the SVD are judged against that level: every computed
// sigma_i carries an absolute uncertainty of tol * sigma_1 with tol the
// numerical-rank tolerance max(m, n) * eps, so the tail sum is only known to
// sum_{i>l} (2 sigma_i + delta) delta, and a residual below delta^2 is
// indistinguishable from zero.
bool criterion1() {
  struct Tally {
    std::size_t pairs = 0, strict = 0, ok = 0;
    double worst_rel = 0.0;
  } tally;
  auto check = [&](const DenseMatrix& y, const pod::InnerProductSpec& ip, const char* label, bool verbose) {
    const std::size_t k = std::min(y.rows(), y.cols());
    const auto b = pod::compute_pod(y, ip, k);
    const double delta = linalg::default_rank_tolerance(y.rows(), y.cols()) * b.sigma_all.front();
    for (std::size_t l = 0; l <= b.l; ++l) {
      const double lhs = pod::projection_error(y, b, ip, l), rhs = pod::tail_energy(b, l);
      double floor = delta * delta;
      for (std::size_t i = l; i < b.sigma_all.size(); ++i) floor += (2.0 * b.sigma_all[i] + delta) * delta;
      const double diff = std::abs(lhs - rhs), rel = rhs > 0 ? diff / rhs : (diff > 0 ? INFINITY : 0.0);
      ++tally.pairs;
      tally.strict += rel <= 1e-8;
      tally.ok += diff <= 1e-8 * rhs + floor;
      tally.worst_rel = std::max(tally.worst_rel, rel);
      if (verbose || diff > 1e-8 * rhs + floor)
        std::printf("  %s l=%2zu  lhs=%.6e  tail=%.6e  rel=%.2e%s\n", label, l, lhs, rhs, rel,
                    rel <= 1e-8 ? "" : (diff <= 1e-8 * rhs + floor ? "  (round-off level)" : "  MISMATCH"));
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20140101);
  std::uniform_int_distribution<std::size_t> dm(1, 64), dn(1, 200);
  std::uniform_real_distribution<double> dw(0.1, 10.0);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = dm(rng), n = dn(rng);
    DenseMatrix y(m, n);
    for (double& v : y.values()) v = g(rng);
    auto ip = pod::InnerProductSpec::uniform(m, n);
    for (double& w : ip.w) w = dw(rng);
    check(y, ip, "random", false);
  }
  std::printf("  50 random weighted matrices: %zu (matrix, l) pairs checked so far\n", tally.pairs);
  const auto& tr = nls1d_trajectory();
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& y = tr.components[c];
    check(y, pod::InnerProductSpec::uniform(y.rows(), y.cols()), c == 0 ? "nls1d p" : "nls1d q", true);
  }
  const double secs = seconds_since(t0);
  std::printf("  strict relative 1e-8: %zu / %zu pairs (worst %.2e); within 1e-8 or SVD round-off: %zu / %zu; %.1f s\n",
              tally.strict, tally.pairs, tally.worst_rel, tally.ok, tally.pairs, secs);
  return tally.ok == tally.pairs && secs < 60.0;
}

// ---------------------------------------------------------------------------

bool criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  bool ok = true;
  for (const char* name : {"nls1d", "nls2d", "cnls"}) {
    const auto spec = model::preset_problem(name);
    auto prob = std::make_shared<model::Problem>(spec);
    const std::size_t m = spec.grid.points();
    for (std::size_t l : {1, 2, 4, 8}) {
      std::vector<DenseMatrix> bases;
      for (std::size_t c = 0; c < spec.components(); ++c) {
        DenseMatrix b(m, l);
        for (double& v : b.values()) v = g(rng);
        linalg::orthonormalize_columns(b);
        bases.push_back(std::move(b));
      }
      const auto sys = rom::build_reduced(prob, bases, std::vector<double>(m, 1.0));
      double worst = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> c(sys.dim());
        for (double& v : c) v = g(rng);
        const auto red = rom::reduced_rhs(sys, c);
        const auto f = prob->rhs(sys.lift(c));
        double err = 0.0, scale = 0.0;
        for (std::size_t comp = 0; comp < spec.components(); ++comp)
          for (std::size_t k = 0; k < l; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += bases[comp](i, k) * f.component(comp)[i];
            err = std::max(err, std::abs(red[comp * l + k] - s));
            scale = std::max(scale, std::abs(s));
          }
        worst = std::max(worst, err / scale);
      }
      std::printf("  %-6s l=%zu  max relative deviation %.2e\n", name, l, worst);
      ok &= worst <= 1e-12;
    }
  }
  const double secs = seconds_since(t0);
  std::printf("  %.1f s\n", secs);
  return ok && secs < 60.0;
}

// ---------------------------------------------------------------------------

experiment::ExperimentReport run_table(const std::string& preset, const std::string& sweep) {
  experiment::ExperimentConfig cfg;
  cfg.preset = preset;
  cfg.set("l_sweep", sweep);
  cfg.output_dir = g_out / preset;
  const auto rep = experiment::run_preset(cfg);
  for (const auto& w : rep.warnings) std::printf("  warning: %s\n", w.c_str());
  std::printf("  svd=%s ranks:", rep.svd_method.c_str());
  for (auto r : rep.ranks) std::printf(" %zu", r);
  std::printf("\n   l        ric    ham_error  (vs H0)      rom_error  (rms form)\n");
  for (const auto& r : rep.rows)
    std::printf("  %2zu  %9.4f  %.4e  %.4e  %.4e  %.4e\n", r.report.l, r.report.ric, r.report.ham_error,
                r.ham_error_initial, r.report.rom_error, r.rom_error_rms);
  return rep;
}

bool criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_table("nls2d", "1,2,3");
  const double secs = seconds_since(t0);
  std::printf("  full 80x80, T=30 run: %.1f s (scaled-down substitute not needed below 1800 s)\n", secs);
  if (rep.rows.size() != 3) return false;
  bool ok = true;
  const double ric_ref[] = {51.65, 99.995, 99.998};
  for (int i = 0; i < 3; ++i) {
    const bool r = std::abs(rep.rows[i].report.ric - ric_ref[i]) <= 0.5;
    std::printf("  RIC(l=%d) = %.4f vs %.3f +-0.5: %s\n", i + 1, rep.rows[i].report.ric, ric_ref[i], r ? "ok" : "off");
    ok &= r;
  }
  const auto& r2 = rep.rows[1];
  const bool rom_ok = within_factor(r2.report.rom_error, 1.040e-3, 3.0) || within_factor(r2.rom_error_rms, 1.040e-3, 3.0);
  std::printf("  rom_error(l=2) = %.4e (rms %.4e) vs 1.040e-3 x3: %s\n", r2.report.rom_error, r2.rom_error_rms,
              rom_ok ? "ok" : "off");
  ok &= rom_ok;
  const double ham_ref[] = {6.116e-7, 4.164e-7};
  for (int i = 0; i < 2; ++i) {
    const auto& r = rep.rows[i + 1];
    const bool h = within_factor(r.report.ham_error, ham_ref[i], 5.0) || within_factor(r.ham_error_initial, ham_ref[i], 5.0);
    std::printf("  ham_error(l=%d) = %.4e (vs H0 %.4e) vs %.3e x5: %s\n", i + 2, r.report.ham_error,
                r.ham_error_initial, ham_ref[i], h ? "ok" : "off");
    ok &= h;
  }
  return ok;
}

// ---------------------------------------------------------------------------

bool criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_table("cnls", "2,3,4,5");
  const double secs = seconds_since(t0);
  if (rep.rows.size() != 4) return false;
  bool ok = true;
  const double ric_ref[] = {99.58, 99.98, 99.99, 99.99};
  for (int i = 0; i < 4; ++i) {
    const bool r = std::abs(rep.rows[i].report.ric - ric_ref[i]) <= 0.5;
    std::printf("  RIC(l=%d) = %.4f vs %.2f +-0.5: %s\n", i + 2, rep.rows[i].report.ric, ric_ref[i], r ? "ok" : "off");
    ok &= r;
  }
  auto decreasing = [&](auto get) {
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      if (!(get(rep.rows[i]) < get(rep.rows[i - 1]))) return false;
    return true;
  };
  const bool dec_v = decreasing([](const auto& r) { return r.report.rom_error; });
  const bool dec_r = decreasing([](const auto& r) { return r.rom_error_rms; });
  std::printf("  rom_error strictly decreasing: verbatim %s, rms %s\n", dec_v ? "yes" : "no", dec_r ? "yes" : "no");
  const auto& r5 = rep.rows.back();
  const bool small_v = r5.report.rom_error <= 1e-2, small_r = r5.rom_error_rms <= 1e-2;
  std::printf("  rom_error(l=5) = %.4e (rms %.4e) vs <= 1e-2 (published 3.919e-3): %s\n", r5.report.rom_error,
              r5.rom_error_rms, small_v || small_r ? "ok" : "off");
  ok &= (dec_v && small_v) || (dec_r && small_r);
  std::printf("  %.1f s\n", secs);
  return ok && secs < 300.0;
}

// ---------------------------------------------------------------------------

bool criterion5() {
  bool ok = true;
  struct Target {
    const char* preset;
    std::size_t rank;
    std::size_t repeats;
    bool timing;
  };
  for (const Target& t : {Target{"nls1d", 15, 3, true}, Target{"nls2d", 25, 1, true}, Target{"cnls", 122, 3, false}}) {
    const auto spec = model::preset_problem(t.preset);
    std::vector<bool> keep(spec.components(), false);
    keep[0] = true;
    auto tr = integrate::simulate(spec, {}, keep);
    const auto row = experiment::benchmark_matrix(t.preset, tr.components[0], t.repeats, 20140101);
    tr.components[0].release();
    const bool rank_ok = row.rank + 2 >= t.rank && row.rank <= t.rank + 2;
    const bool acc_ok = row.fsvd_accuracy <= 1e-9;
    const bool time_ok = !t.timing || row.fsvd_time < row.svd_time;
    std::printf("  %-6s %zux%zu rank %zu (published %zu +-2: %s)  svd %.3f s [%s, err %.2e]  fsvd %.3f s err %.2e (%s)%s\n",
                t.preset, row.rows, row.cols, row.rank, t.rank, rank_ok ? "ok" : "off", row.svd_time,
                row.svd_vectors ? "vectors" : "values only", row.svd_accuracy, row.fsvd_time, row.fsvd_accuracy,
                acc_ok ? "ok" : "off", t.timing ? (time_ok ? "  fsvd faster: ok" : "  fsvd faster: no") : "");
    ok &= rank_ok && acc_ok && time_ok;
  }
  return ok;
}

// ---------------------------------------------------------------------------

bool criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = model::preset_problem("nls1d");
  const auto& tr = nls1d_trajectory();
  std::vector<double> dev(tr.snapshots());
  double worst = 0.0;
  for (std::size_t j = 0; j < dev.size(); ++j) {
    dev[j] = std::abs(tr.hamiltonian[j] - tr.hamiltonian.front());
    worst = std::max(worst, dev[j]);
  }
  const double slope_full = ls_slope(tr.times, dev);
  std::printf("  full order: H0 = %.10f, max |H-H0| = %.3e, slope %.3e per unit time\n", tr.hamiltonian.front(),
              worst, slope_full);

  const auto ip = pod::InnerProductSpec::uniform(32, tr.snapshots());
  const auto bp = pod::compute_pod(tr.components[0], ip, 4), bq = pod::compute_pod(tr.components[1], ip, 4);
  const auto sys = rom::build_reduced(spec, bp, bq, ip);
  const auto red = rom::integrate_rom(sys, model::initial_state(spec), spec.t_final, spec.dt, {});
  const auto hl = rom::lifted_hamiltonian(red, sys);
  std::vector<double> rdev(hl.size());
  double rworst = 0.0;
  for (std::size_t j = 0; j < hl.size(); ++j) {
    rdev[j] = std::abs(hl[j] - tr.hamiltonian.front());
    rworst = std::max(rworst, rdev[j]);
  }
  const double slope_rom = ls_slope(red.times, rdev);
  std::printf("  ROM l=4: max |H_l - H_h(0)| = %.3e, slope %.3e per unit time; %.1f s\n", rworst, slope_rom,
              seconds_since(t0));
  const bool bounded = worst < 1e-3 * std::abs(tr.hamiltonian.front()) && rworst < 1e-3 * std::abs(tr.hamiltonian.front());
  return bounded && std::abs(slope_full) <= 1e-8 && std::abs(slope_rom) <= 1e-8;
}

// ---------------------------------------------------------------------------

// Against the plane wave exp(i(x + y - w t)) with w = -(lx + ly) - 1 built from
// the discrete Laplacian symbol, which solves the semi-discrete system exactly;
// only time-stepping error remains.
bool criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  auto spec = model::preset_problem("nls2d");
  spec.t_final = 1.0;
  const double dx = spec.grid.spacing[0];
  const double lam = (2.0 * std::cos(dx) - 2.0) / (dx * dx);
  const double omega = -2.0 * lam - spec.gamma;
  std::printf("  semi-discrete frequency %.10f (continuum 1)\n", omega);
  std::vector<double> errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    spec.dt = dt;
    integrate::Stepper st(std::make_shared<model::Problem>(spec), {});
    auto s = model::initial_state(spec);
    for (std::size_t k = 0; k < spec.steps(); ++k) st.step(s, dt);
    double err = 0.0;
    const std::size_t m = spec.grid.extents[0];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double ph = spec.grid.node(0, i) + spec.grid.node(1, j) - omega * spec.t_final;
        err = std::max(err, std::hypot(s.p()[i * m + j] - std::cos(ph), s.q()[i * m + j] - std::sin(ph)));
      }
    errs.push_back(err);
    std::printf("  dt=%.0e  max error %.4e\n", dt, err);
  }
  bool ok = true;
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double r = errs[i - 1] / errs[i];
    std::printf("  ratio %.3f\n", r);
    ok &= r >= 3.4 && r <= 4.6;
  }
  const double secs = seconds_since(t0);
  std::printf("  %.1f s\n", secs);
  return ok && secs < 300.0;
}

// ---------------------------------------------------------------------------

bool criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = model::preset_problem("nls1d");
  const auto& tr = nls1d_trajectory();
  const auto ip = pod::InnerProductSpec::uniform(32, tr.snapshots());
  std::vector<pod::PodBasis> bases;
  for (const auto& y : tr.components) bases.push_back(pod::compute_pod(y, ip, 32));
  std::vector<double> measured, bound, bound_p;
  std::printf("   l    squared error    bound (p, q)    bound (p)\n");
  for (std::size_t l = 1; l <= 8; ++l) {
    const auto sys = rom::build_reduced(spec, bases[0].truncated(l), bases[1].truncated(l), ip);
    const auto red = rom::integrate_rom(sys, model::initial_state(spec), spec.t_final, spec.dt, {});
    measured.push_back(rom::squared_rom_error(tr, red, sys, ip));
    double tail = 0.0;
    for (std::size_t c = 0; c < 2; ++c) tail += rom::error_bound_tail(tr.components[c], bases[c], ip, l, spec.dt);
    bound.push_back(tail + std::pow(spec.dt, 4));
    bound_p.push_back(rom::error_bound_quantity(tr.components[0], bases[0], ip, l, spec.dt));
    std::printf("  %2zu  %.6e  %.6e  %.6e\n", l, measured.back(), bound.back(), bound_p.back());
  }
  const bool m_mono = nonincreasing(measured), b_mono = nonincreasing(bound);
  const double rho = spearman(measured, bound);
  std::printf("  measured nonincreasing: %s; bound nonincreasing: %s; Spearman %.4f; %.1f s\n", m_mono ? "yes" : "no",
              b_mono ? "yes" : "no", rho, seconds_since(t0));
  return m_mono && b_mono && rho > 1.0 - 1e-12 && seconds_since(t0) < 300.0;
}

// ---------------------------------------------------------------------------

bool criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  auto spec = model::preset_problem("nls1d");
  spec.grid = model::Grid::line(16, spec.grid.lower[0], spec.grid.upper[0]);
  spec.t_final = 1.0;
  auto prob = std::make_shared<model::Problem>(spec);
  const auto sys = rom::build_reduced(prob, {DenseMatrix::identity(16), DenseMatrix::identity(16)},
                                      std::vector<double>(16, 1.0));
  bool ok = true;
  struct Pair {
    integrate::Scheme full;
    rom::RomIntegrator reduced;
    const char* label;
  };
  for (const Pair& p : {Pair{integrate::Scheme::full_midpoint, rom::RomIntegrator::midpoint, "midpoint"},
                        Pair{integrate::Scheme::strang_split, rom::RomIntegrator::strang, "strang"}}) {
    integrate::IntegratorConfig cfg;
    cfg.scheme = p.full;
    const auto full = integrate::simulate(spec, cfg);
    const auto red = rom::integrate_rom(sys, model::initial_state(spec), spec.t_final, spec.dt, cfg, p.reduced);
    double err = 0.0;
    for (std::size_t j = 0; j < full.snapshots(); ++j) {
      const auto s = sys.lift(red.at(j)), f = full.state(j);
      for (std::size_t i = 0; i < s.data.size(); ++i) err = std::max(err, std::abs(s.data[i] - f.data[i]));
    }
    std::printf("  %-8s full vs identity-basis ROM: max deviation %.3e\n", p.label, err);
    ok &= err <= 1e-8;
  }
  const double secs = seconds_since(t0);
  std::printf("  %.2f s\n", secs);
  return ok && secs < 10.0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<bool()>>> checks{
      {"projection error equals singular value tail", criterion1},
      {"Galerkin consistency", criterion2},
      {"2D table reproduction", criterion3},
      {"coupled table reproduction", criterion4},
      {"snapshot ranks and randomized SVD", criterion5},
      {"symplectic energy behaviour", criterion6},
      {"second-order time convergence", criterion7},
      {"error bound qualitative behaviour", criterion8},
      {"full-basis exactness", criterion9},
  };
  std::vector<bool> selected(checks.size(), false);
  bool any = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      g_out = argv[++i];
      continue;
    }
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(checks.size())) {
      std::fprintf(stderr, "usage: %s [1-9 ...] [--out DIR]\n", argv[0]);
      return 2;
    }
    selected[k - 1] = any = true;
  }
  if (!any) selected.assign(checks.size(), true);

  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (!selected[i]) continue;
    std::printf("criterion %zu: %s\n", i + 1, checks[i].first);
    std::fflush(stdout);
    bool pass = false;
    try {
      pass = checks[i].second();
    } catch (const std::exception& e) {
      std::printf("  error: %s\n", e.what());
    }
    std::printf("%s criterion %zu: %s\n", pass ? "PASS" : "FAIL", i + 1, checks[i].first);
    std::fflush(stdout);
    failed += !pass;
  }
  return failed ? 1 : 0;
}
