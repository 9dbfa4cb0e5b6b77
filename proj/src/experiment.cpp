#include "nlsrom/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "nlsrom/io.hpp"
#include "nlsrom/linalg/svd.hpp"

namespace nlsrom::experiment {
namespace {

using linalg::DenseMatrix;
using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long n = std::stoull(v, &pos);
      if (pos == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": expected a nonnegative integer, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(v);
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

const char* component_name(std::size_t c) {
  static const char* names[] = {"p1", "q1", "p2", "q2"};
  return names[c];
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Envelope table in long format: t, x (, y), |psi_f| per field.
void write_envelopes(const std::filesystem::path& path, const model::ProblemSpec& spec,
                     const std::vector<std::pair<double, model::StateVector>>& states) {
  io::CsvTable t;
  t.header = {"t", "x"};
  if (spec.grid.dim == 2) t.header.push_back("y");
  for (std::size_t f = 0; f < spec.fields(); ++f) t.header.push_back("abs_psi" + std::to_string(f + 1));
  const model::Grid& g = spec.grid;
  for (const auto& [time, s] : states) {
    std::vector<std::vector<double>> env;
    for (std::size_t f = 0; f < s.fields; ++f) env.push_back(s.envelope(f));
    for (std::size_t i = 0; i < g.points(); ++i) {
      std::vector<std::string> row{io::format_double(time)};
      if (g.dim == 1) {
        row.push_back(io::format_double(g.node(0, i)));
      } else {
        row.push_back(io::format_double(g.node(0, i / g.extents[1])));
        row.push_back(io::format_double(g.node(1, i % g.extents[1])));
      }
      for (const auto& e : env) row.push_back(io::format_double(e[i]));
      t.rows.push_back(std::move(row));
    }
  }
  io::write_csv(path, t);
}

// Snapshot indices written to the envelope files.
std::vector<std::size_t> envelope_indices(const model::ProblemSpec& spec, std::size_t n) {
  if (spec.kind != model::ProblemKind::cnls) return {0, n - 1};
  const std::size_t step = (n + 199) / 200;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < n; j += step) idx.push_back(j);
  return idx;
}

}  // namespace

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  if (key == "preset") {
    preset = v;
  } else if (key == "dt") {
    dt = to_double(key, v);
  } else if (key == "t_final" || key == "t-final") {
    t_final = to_double(key, v);
  } else if (key == "gamma") {
    gamma = to_double(key, v);
  } else if (key == "grid") {
    grid = to_count(key, v);
  } else if (key == "stride") {
    integrator.snapshot_stride = to_count(key, v);
  } else if (key == "l_sweep" || key == "l-sweep") {
    l_sweep.clear();
    for (const auto& s : split_list(v)) {
      const auto l = to_count(key, s);
      if (l == 0) throw std::invalid_argument("l_sweep: entries must be >= 1");
      l_sweep.push_back(l);
    }
  } else if (key == "seed") {
    seed = to_count(key, v);
  } else if (key == "out") {
    output_dir = v;
  } else if (key == "rom_integrator" || key == "rom-integrator") {
    if (v == "midpoint") rom_integrator = rom::RomIntegrator::midpoint;
    else if (v == "strang") rom_integrator = rom::RomIntegrator::strang;
    else throw std::invalid_argument("rom_integrator: expected midpoint or strang");
  } else if (key == "svd") {
    if (v == "det") svd = SvdChoice::deterministic;
    else if (v == "rand") svd = SvdChoice::randomized;
    else if (v == "auto") svd = SvdChoice::automatic;
    else throw std::invalid_argument("svd: expected det, rand or auto");
  } else if (key == "quadrature") {
    if (v == "uniform") quadrature = pod::QuadratureMode::uniform;
    else if (v == "trapezoidal") quadrature = pod::QuadratureMode::trapezoidal;
    else throw std::invalid_argument("quadrature: expected uniform or trapezoidal");
  } else if (key == "scheme") {
    if (v == "strang") integrator.scheme = integrate::Scheme::strang_split;
    else if (v == "midpoint") integrator.scheme = integrate::Scheme::full_midpoint;
    else throw std::invalid_argument("scheme: expected strang or midpoint");
  } else if (key == "split_order") {
    if (v == "nln") integrator.split_order = integrate::SplitOrder::nln;
    else if (v == "lnl") integrator.split_order = integrate::SplitOrder::lnl;
    else throw std::invalid_argument("split_order: expected nln or lnl");
  } else if (key == "linear_solve") {
    if (v == "midpoint") integrator.linear_solve = integrate::LinearSolve::midpoint_circulant;
    else if (v == "exact") integrator.linear_solve = integrate::LinearSolve::exact_rotation;
    else throw std::invalid_argument("linear_solve: expected midpoint or exact");
  } else if (key == "newton_tol") {
    integrator.newton_tol = to_double(key, v);
  } else if (key == "newton_max_iters") {
    integrator.newton_max_iters = to_count(key, v);
  } else if (key == "export") {
    if (v == "1" || v == "true" || v == "yes") export_data = true;
    else if (v == "0" || v == "false" || v == "no") export_data = false;
    else throw std::invalid_argument("export: expected true or false");
  } else if (key == "repeats") {
    repeats = to_count(key, v);
    if (repeats == 0) throw std::invalid_argument("repeats must be >= 1");
  } else if (key == "threads") {
    threads = to_count(key, v);
  } else if (key == "bench_problems") {
    bench_problems = split_list(v);
  } else {
    throw std::invalid_argument("unknown setting '" + key + "'");
  }
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

model::ProblemSpec make_problem(const ExperimentConfig& cfg) {
  model::ProblemSpec spec = model::preset_problem(cfg.preset);
  if (cfg.dt) spec.dt = *cfg.dt;
  if (cfg.t_final) spec.t_final = *cfg.t_final;
  if (cfg.gamma) spec.gamma = *cfg.gamma;
  if (cfg.grid) {
    const model::Grid& g = spec.grid;
    spec.grid = g.dim == 1 ? model::Grid::line(*cfg.grid, g.lower[0], g.upper[0])
                           : model::Grid::square(*cfg.grid, g.lower[0], g.upper[0]);
  }
  spec.validate();
  cfg.integrator.validate();
  return spec;
}

std::vector<std::size_t> default_l_sweep(const std::string& preset) {
  if (preset == "nls1d") return {1, 2, 3, 4, 5, 6, 7, 8};
  if (preset == "nls2d") return {1, 2, 3};
  if (preset == "cnls") return {2, 3, 4, 5};
  throw std::invalid_argument("no default l sweep for preset '" + preset + "'");
}

ExperimentReport run_preset(const ExperimentConfig& cfg) {
  if (cfg.preset == "svdbench") {
    run_svdbench(cfg);
    return {};
  }
  const auto t_start = Clock::now();
  const model::ProblemSpec spec = stage("configure", [&] { return make_problem(cfg); });
  std::vector<std::size_t> sweep = cfg.l_sweep.empty() ? default_l_sweep(cfg.preset) : cfg.l_sweep;
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
  stage("configure", [&] {
    std::filesystem::create_directories(cfg.output_dir);
    return 0;
  });

  ExperimentReport report;
  integrate::Trajectory traj = stage("simulate", [&] { return integrate::simulate(spec, cfg.integrator); });
  report.warnings = traj.warnings;
  const std::size_t m = spec.grid.points(), n = traj.snapshots();

  stage("output", [&] {
    io::write_hamiltonian_csv(cfg.output_dir / "hamiltonian.csv", traj.times, traj.hamiltonian);
    std::vector<std::pair<double, model::StateVector>> full;
    for (std::size_t j : envelope_indices(spec, n)) full.emplace_back(traj.times[j], traj.state(j));
    write_envelopes(cfg.output_dir / "envelope_full.csv", spec, full);
    if (cfg.export_data)
      for (std::size_t c = 0; c < traj.components.size(); ++c)
        io::write_snapshots(cfg.output_dir / (std::string("snapshots_") + component_name(c) + ".bin"),
                            traj.components[c], traj.dt, traj.stride);
    return 0;
  });

  const pod::InnerProductSpec ip =
      cfg.quadrature == pod::QuadratureMode::trapezoidal
          ? pod::InnerProductSpec::trapezoidal(m, n, spec.dt * static_cast<double>(traj.stride))
          : pod::InnerProductSpec::uniform(m, n);
  const std::size_t l_max = sweep.back();

  bool randomized = cfg.svd == SvdChoice::randomized;
  if (cfg.svd == SvdChoice::automatic) randomized = static_cast<double>(m) * static_cast<double>(n) > 1e8;
  report.svd_method = randomized ? "rand" : "det";

  std::vector<pod::PodBasis> bases = stage("pod", [&] {
    std::vector<pod::PodBasis> out;
    pod::PodOptions po;
    po.method = randomized ? pod::PodMethod::randomized : pod::PodMethod::deterministic;
    po.randomized.seed = cfg.seed;
    po.randomized_rank = std::min(std::max(2 * l_max, l_max + 10), std::min(m, n));
    // deterministic bases keep every mode up to the numerical rank (the bound needs them)
    const std::size_t want = randomized ? l_max : std::min(m, n);
    for (const auto& y : traj.components) {
      pod::PodBasis b = pod::compute_pod(y, ip, want, po);
      if (randomized)
        for (const auto& w : b.warnings) report.warnings.push_back(std::string("pod: ") + w);
      b.warnings.clear();
      report.ranks.push_back(b.d);
      out.push_back(std::move(b));
    }
    return out;
  });

  stage("output", [&] {
    io::CsvTable sv{{"component", "i", "sigma_raw", "sigma_normalized", "ric"}, {}};
    for (std::size_t c = 0; c < bases.size(); ++c)
      for (std::size_t i = 0; i < bases[c].d; ++i)
        sv.rows.push_back({component_name(c), std::to_string(i + 1), io::format_double(bases[c].sigma_raw[i]),
                           io::format_double(bases[c].sigma_normalized[i]),
                           io::format_double(pod::ric(bases[c], i + 1))});
    io::write_csv(cfg.output_dir / "singular_values.csv", sv);
    if (cfg.export_data)
      for (std::size_t c = 0; c < bases.size(); ++c)
        io::write_basis(cfg.output_dir / (std::string("basis_") + component_name(c)), bases[c]);
    return 0;
  });

  // Large trajectories: keep only the real part of the first field from here on.
  constexpr double kReleaseBytes = 1024.0 * 1024.0 * 1024.0;
  bool released = false;
  for (std::size_t c = 1; c < traj.components.size(); ++c)
    if (static_cast<double>(m) * static_cast<double>(n) * 8.0 > kReleaseBytes) {
      traj.components[c].release();
      released = true;
    }

  std::size_t d_min = bases.front().l;
  for (const auto& b : bases) d_min = std::min(d_min, b.l);
  std::vector<std::size_t> ls;
  for (std::size_t l : sweep) {
    if (l > d_min) {
      report.warnings.push_back("l = " + std::to_string(l) + " exceeds the available modes (" +
                                std::to_string(d_min) + "); row skipped");
      continue;
    }
    ls.push_back(l);
  }

  // The bound needs every mode up to the numerical rank; a randomized basis stops short.
  bool partial_bases = false;
  for (const auto& b : bases) partial_bases |= b.modes.cols() < b.d;
  if (partial_bases)
    report.warnings.push_back("basis holds fewer modes than the numerical rank; bound_quantity not computed");

  const model::StateVector y0 = model::initial_state(spec);
  rom::ReducedTrajectory fig_traj;
  std::optional<rom::ReducedSystem> fig_sys;
  auto run_one = [&](std::size_t l) {
    std::vector<pod::PodBasis> bl;
    for (const auto& b : bases) bl.push_back(b.truncated(l));
    rom::ReducedSystem sys = rom::build_reduced(spec, bl, ip);
    rom::ReducedTrajectory red =
        rom::integrate_rom(sys, y0, spec.t_final, spec.dt, cfg.integrator, cfg.rom_integrator);
    RomDetail d;
    d.report.l = l;
    d.report.ric = pod::ric(bases[0], l);
    d.report.ham_error = rom::ham_rom_error(traj, red, sys);
    d.report.rom_error = rom::rom_error(traj, red, sys, 0);
    const double spacing = spec.dt * static_cast<double>(traj.stride);
    d.report.bound_quantity = partial_bases ? NAN
                                            : rom::error_bound_quantity(traj.components[0], bases[0], ip,
                                                                        std::min(l, bases[0].d), spec.dt, spacing);
    d.ham_error_initial = rom::ham_rom_error(traj, red, sys, rom::HamReference::initial);
    d.rom_error_rms = rom::rom_error(traj, red, sys, 0, rom::ErrorForm::rms);
    d.squared_error = released ? NAN : rom::squared_rom_error(traj, red, sys, ip);
    if (released || partial_bases) {
      d.bound_quantity_state = NAN;
    } else {
      double tail = 0.0;
      for (std::size_t c = 0; c < bases.size(); ++c)
        tail += rom::error_bound_tail(traj.components[c], bases[c], ip, std::min(l, bases[c].d), spacing);
      d.bound_quantity_state = tail + std::pow(spec.dt, 4);
    }
    return std::make_pair(d, std::make_pair(std::move(sys), std::move(red)));
  };

  report.rows = stage("rom", [&] {
    std::vector<RomDetail> rows(ls.size());
    std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::max<std::size_t>(1, std::min(workers, ls.size()));
    for (std::size_t start = 0; start < ls.size(); start += workers) {
      const std::size_t end = std::min(ls.size(), start + workers);
      std::vector<std::future<decltype(run_one(0))>> jobs;
      for (std::size_t i = start; i < end; ++i)
        jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_one, ls[i]));
      for (std::size_t i = start; i < end; ++i) {
        auto res = jobs[i - start].get();
        rows[i] = res.first;
        if (ls[i] == ls.back()) {
          fig_sys.emplace(std::move(res.second.first));
          fig_traj = std::move(res.second.second);
        }
      }
    }
    return rows;
  });

  stage("output", [&] {
    io::CsvTable t{{"l", "ric", "ham_error", "rom_error", "bound_quantity"}, {}};
    io::CsvTable dt{{"l", "ric", "ham_error", "ham_error_initial", "rom_error", "rom_error_rms",
                     "squared_error", "bound_quantity", "bound_quantity_state"},
                    {}};
    for (const auto& r : report.rows) {
      t.rows.push_back({std::to_string(r.report.l), io::format_double(r.report.ric),
                        io::format_double(r.report.ham_error), io::format_double(r.report.rom_error),
                        io::format_double(r.report.bound_quantity)});
      dt.rows.push_back({std::to_string(r.report.l), io::format_double(r.report.ric),
                         io::format_double(r.report.ham_error), io::format_double(r.ham_error_initial),
                         io::format_double(r.report.rom_error), io::format_double(r.rom_error_rms),
                         io::format_double(r.squared_error), io::format_double(r.report.bound_quantity),
                         io::format_double(r.bound_quantity_state)});
    }
    io::write_csv(cfg.output_dir / "rom_report.csv", t);
    io::write_csv(cfg.output_dir / "rom_report_detail.csv", dt);

    if (fig_sys) {
      std::vector<std::pair<double, model::StateVector>> rom_states;
      for (std::size_t j : envelope_indices(spec, n))
        rom_states.emplace_back(fig_traj.times[j], fig_sys->lift(fig_traj.at(j)));
      write_envelopes(cfg.output_dir / "envelope_rom.csv", spec, rom_states);
      io::write_hamiltonian_csv(cfg.output_dir / "hamiltonian_rom.csv", fig_traj.times,
                                rom::lifted_hamiltonian(fig_traj, *fig_sys));
    }

    std::ofstream info(cfg.output_dir / "run_info.txt");
    info << "preset " << cfg.preset << '\n'
         << "kind " << model::to_string(spec.kind) << '\n'
         << "gamma " << io::format_double(spec.gamma) << '\n'
         << "grid";
    for (std::size_t e : spec.grid.extents) info << ' ' << e;
    info << '\n'
         << "dt " << io::format_double(spec.dt) << '\n'
         << "t_final " << io::format_double(spec.t_final) << '\n'
         << "snapshots " << n << " (stride " << traj.stride << ")\n"
         << "full_scheme " << (cfg.integrator.scheme == integrate::Scheme::strang_split ? "strang" : "midpoint")
         << '\n'
         << "rom_integrator " << rom::to_string(cfg.rom_integrator) << '\n'
         << "svd " << report.svd_method << '\n'
         << "quadrature " << (cfg.quadrature == pod::QuadratureMode::trapezoidal ? "trapezoidal" : "uniform")
         << '\n'
         << "seed " << cfg.seed << '\n'
         << "numerical_rank";
    for (std::size_t c = 0; c < report.ranks.size(); ++c) info << ' ' << component_name(c) << '=' << report.ranks[c];
    info << '\n' << "l_envelope " << (ls.empty() ? 0 : ls.back()) << '\n';
    for (const auto& w : report.warnings) info << "warning " << w << '\n';
    info << "wall_seconds " << seconds_since(t_start) << '\n';
    return 0;
  });
  return report;
}

SvdBenchRow benchmark_matrix(const std::string& name, const DenseMatrix& y, std::size_t repeats,
                             std::uint64_t seed) {
  if (repeats == 0) throw std::invalid_argument("benchmark_matrix: repeats must be >= 1");
  SvdBenchRow row;
  row.problem = name;
  row.rows = y.rows();
  row.cols = y.cols();
  row.svd_vectors = static_cast<double>(y.rows()) * static_cast<double>(y.cols()) <= 5e7;

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  std::vector<double> times;
  linalg::SvdResult det;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    det = linalg::svd(y, row.svd_vectors ? linalg::SvdVectors::both : linalg::SvdVectors::none);
    times.push_back(seconds_since(t0));
  }
  row.svd_time = median(times);
  row.rank = linalg::numerical_rank(det.sigma, linalg::default_rank_tolerance(y.rows(), y.cols()));
  row.svd_accuracy = row.svd_vectors ? linalg::reconstruction_error(y, det, row.rank) : NAN;
  det = {};

  times.clear();
  linalg::SvdResult fast;
  // Plain range finder: snapshot spectra decay fast enough that subspace
  // iteration adds cost without changing the result.
  linalg::RandomizedSvdOptions opt;
  opt.seed = seed;
  opt.power_iterations = 0;
  const std::size_t k = std::max<std::size_t>(1, row.rank);
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    fast = linalg::randomized_svd(y, k, opt);
    times.push_back(seconds_since(t0));
  }
  row.fsvd_time = median(times);
  row.fsvd_accuracy = linalg::reconstruction_error(y, fast);
  return row;
}

std::vector<SvdBenchRow> run_svdbench(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<SvdBenchRow> rows;
  for (const auto& name : cfg.bench_problems) {
    ExperimentConfig pc = cfg;
    pc.preset = name;
    const model::ProblemSpec spec = stage("configure", [&] { return make_problem(pc); });
    std::vector<bool> keep(spec.components(), false);
    keep[0] = true;
    integrate::Trajectory traj =
        stage("simulate", [&] { return integrate::simulate(spec, cfg.integrator, keep); });
    rows.push_back(stage("svd", [&] { return benchmark_matrix(name, traj.components[0], cfg.repeats, cfg.seed); }));
  }
  io::CsvTable t{{"problem", "rows", "cols", "rank", "svd_vectors", "svd_time_s", "svd_accuracy", "fsvd_time_s",
                  "fsvd_accuracy"},
                 {}};
  for (const auto& r : rows)
    t.rows.push_back({r.problem, std::to_string(r.rows), std::to_string(r.cols), std::to_string(r.rank),
                      r.svd_vectors ? "both" : "none", io::format_double(r.svd_time),
                      io::format_double(r.svd_accuracy), io::format_double(r.fsvd_time),
                      io::format_double(r.fsvd_accuracy)});
  io::write_csv(cfg.output_dir / "svdbench.csv", t);
  return rows;
}

ColumnTolerance ColumnTolerance::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("tolerance '" + text + "': expected kind:value");
  const std::string kind = trim(text.substr(0, colon));
  ColumnTolerance t;
  t.value = to_double("tolerance", trim(text.substr(colon + 1)));
  if (kind == "abs") t.kind = Kind::abs;
  else if (kind == "rel") t.kind = Kind::rel;
  else if (kind == "factor") t.kind = Kind::factor;
  else throw std::invalid_argument("tolerance '" + text + "': kind must be abs, rel or factor");
  if (t.value < 0.0 || (t.kind == Kind::factor && t.value < 1.0))
    throw std::invalid_argument("tolerance '" + text + "': bad value");
  return t;
}

bool ColumnTolerance::accepts(double a, double b) const {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  if (a == b) return true;
  switch (kind) {
    case Kind::abs: return std::abs(a - b) <= value;
    case Kind::rel: return std::abs(a - b) <= value * std::max(std::abs(a), std::abs(b));
    case Kind::factor:
      if (a == 0.0 || b == 0.0 || (a > 0) != (b > 0)) return false;
      return std::max(a / b, b / a) <= value;
  }
  return false;
}

DiffResult diff_report(const std::filesystem::path& produced, const std::filesystem::path& golden,
                       const std::map<std::string, ColumnTolerance>& tolerances, ColumnTolerance fallback) {
  const io::CsvTable a = io::read_csv(produced), b = io::read_csv(golden);
  if (a.header != b.header) throw std::invalid_argument("diff: column headers differ");
  if (a.rows.size() != b.rows.size())
    throw std::invalid_argument("diff: row counts differ (" + std::to_string(a.rows.size()) + " vs " +
                                std::to_string(b.rows.size()) + ")");
  for (const auto& [name, tol] : tolerances) (void)a.column(name);

  DiffResult res;
  auto number = [](const std::string& s, double& out) {
    if (s == "nan") return out = NAN, true;
    try {
      std::size_t pos = 0;
      out = std::stod(s, &pos);
      return pos == s.size();
    } catch (const std::exception&) {
      return false;
    }
  };
  for (std::size_t r = 0; r < a.rows.size(); ++r)
    for (std::size_t c = 0; c < a.header.size(); ++c) {
      ++res.cells;
      const std::string& x = a.rows[r][c];
      const std::string& y = b.rows[r][c];
      double vx = 0.0, vy = 0.0;
      bool ok;
      if (number(x, vx) && number(y, vy)) {
        const auto it = tolerances.find(a.header[c]);
        ok = (it == tolerances.end() ? fallback : it->second).accepts(vx, vy);
      } else {
        ok = x == y;
      }
      if (!ok) {
        ++res.failures;
        res.messages.push_back("row " + std::to_string(r + 1) + " column " + a.header[c] + ": produced " + x +
                               ", golden " + y);
      }
    }
  res.pass = res.failures == 0;
  return res;
}

}  // namespace nlsrom::experiment
