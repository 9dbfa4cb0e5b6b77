#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>

#include "nlsrom/experiment.hpp"
#include "nlsrom/io.hpp"

namespace ex = nlsrom::experiment;

namespace {

struct RunFlags {
  std::string preset, preset_flag, config, l_sweep, dt, grid, t_final, seed, out, rom_integrator, svd, stride;
  bool export_data = false;
  std::vector<std::string> settings;
};

void add_run_flags(CLI::App* app, RunFlags& f, bool positional) {
  if (positional) app->add_option("name", f.preset, "Preset: nls1d, nls2d or cnls");
  app->add_option("--preset", f.preset_flag, "Preset name");
  app->add_option("--config", f.config, "key=value configuration file");
  app->add_option("--l-sweep", f.l_sweep, "Comma-separated reduced dimensions");
  app->add_option("--dt", f.dt, "Time step");
  app->add_option("--grid", f.grid, "Grid points per axis");
  app->add_option("--t-final", f.t_final, "Final time");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--rom-integrator", f.rom_integrator, "midpoint or strang")
      ->check(CLI::IsMember({"midpoint", "strang"}));
  app->add_option("--svd", f.svd, "det, rand or auto")->check(CLI::IsMember({"det", "rand", "auto"}));
  app->add_option("--stride", f.stride, "Store every k-th step");
  app->add_option("--set", f.settings, "Extra key=value setting (repeatable)");
  app->add_flag("--export", f.export_data, "Also write binary snapshots and bases");
}

ex::ExperimentConfig build_config(const RunFlags& f, const std::string& default_preset) {
  ex::ExperimentConfig cfg;
  if (!f.config.empty()) cfg.load_file(f.config);
  if (!default_preset.empty()) cfg.preset = default_preset;
  if (!f.preset.empty() && !f.preset_flag.empty() && f.preset != f.preset_flag)
    throw std::invalid_argument("preset given twice with different values");
  if (!f.preset.empty()) cfg.preset = f.preset;
  if (!f.preset_flag.empty()) cfg.preset = f.preset_flag;
  const std::pair<const char*, const std::string*> pairs[] = {
      {"l_sweep", &f.l_sweep}, {"dt", &f.dt},     {"grid", &f.grid},
      {"t_final", &f.t_final}, {"seed", &f.seed}, {"out", &f.out},
      {"rom_integrator", &f.rom_integrator},      {"svd", &f.svd},
      {"stride", &f.stride}};
  for (const auto& [key, value] : pairs)
    if (!value->empty()) cfg.set(key, *value);
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.export_data) cfg.export_data = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POD reduced-order models for nonlinear Schrodinger equations"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Simulate a preset, build POD bases and sweep reduced models");
  add_run_flags(run, run_flags, true);

  RunFlags bench_flags;
  std::string bench_problems, repeats;
  CLI::App* bench = app.add_subcommand("svdbench", "Time deterministic vs randomized SVD on preset snapshots");
  add_run_flags(bench, bench_flags, false);
  bench->add_option("--problems", bench_problems, "Comma-separated presets (default nls1d,nls2d,cnls)");
  bench->add_option("--repeats", repeats, "Timing repetitions (median reported)");

  std::string produced, golden;
  std::vector<std::string> tols;
  std::string default_tol = "rel:1e-9";
  CLI::App* diff = app.add_subcommand("diff", "Compare a produced CSV against a golden CSV");
  diff->add_option("produced", produced)->required();
  diff->add_option("golden", golden)->required();
  diff->add_option("--tol", tols, "Per-column tolerance, e.g. ric=abs:0.5 or rom_error=factor:3");
  diff->add_option("--default-tol", default_tol, "Tolerance for columns without --tol");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ex::ExperimentConfig cfg = build_config(run_flags, "");
      const ex::ExperimentReport rep = ex::run_preset(cfg);
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
      std::printf("%-4s %12s %14s %14s %14s\n", "l", "ric", "ham_error", "rom_error", "bound");
      for (const auto& r : rep.rows)
        std::printf("%-4zu %12.6f %14.6e %14.6e %14.6e\n", r.report.l, r.report.ric, r.report.ham_error,
                    r.report.rom_error, r.report.bound_quantity);
      std::cout << "outputs written to " << cfg.output_dir.string() << '\n';
      return 0;
    }
    if (*bench) {
      ex::ExperimentConfig cfg = build_config(bench_flags, "svdbench");
      if (!bench_problems.empty()) cfg.set("bench_problems", bench_problems);
      if (!repeats.empty()) cfg.set("repeats", repeats);
      const auto rows = ex::run_svdbench(cfg);
      std::printf("%-6s %8s %6s %5s %12s %12s %12s %12s\n", "name", "rows", "cols", "rank", "svd_s", "svd_err",
                  "fsvd_s", "fsvd_err");
      for (const auto& r : rows)
        std::printf("%-6s %8zu %6zu %5zu %12.4f %12.3e %12.4f %12.3e\n", r.problem.c_str(), r.rows, r.cols, r.rank,
                    r.svd_time, r.svd_accuracy, r.fsvd_time, r.fsvd_accuracy);
      return 0;
    }
    std::map<std::string, ex::ColumnTolerance> per_column;
    for (const auto& t : tols) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--tol expects column=kind:value");
      per_column[t.substr(0, eq)] = ex::ColumnTolerance::parse(t.substr(eq + 1));
    }
    const ex::DiffResult res = ex::diff_report(produced, golden, per_column, ex::ColumnTolerance::parse(default_tol));
    for (const auto& m : res.messages) std::cout << m << '\n';
    std::cout << (res.pass ? "PASS" : "FAIL") << ": " << res.failures << " of " << res.cells
              << " cells outside tolerance\n";
    return res.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
