#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlsrom/integrate.hpp"
#include "nlsrom/linalg/matrix.hpp"
#include "nlsrom/model.hpp"
#include "nlsrom/pod.hpp"
#include "nlsrom/rom.hpp"

namespace nlsrom::experiment {

enum class SvdChoice { automatic, deterministic, randomized };

struct ExperimentConfig {
  std::string preset = "nls1d";
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<double> gamma;
  std::optional<std::size_t> grid;
  std::vector<std::size_t> l_sweep;  // empty: preset default
  std::uint64_t seed = 20140101;
  std::filesystem::path output_dir = "out";
  rom::RomIntegrator rom_integrator = rom::RomIntegrator::midpoint;
  SvdChoice svd = SvdChoice::automatic;
  pod::QuadratureMode quadrature = pod::QuadratureMode::uniform;
  integrate::IntegratorConfig integrator;
  bool export_data = false;
  std::size_t repeats = 3;      // svdbench timing repetitions
  std::size_t threads = 0;      // l-sweep workers; 0 = hardware concurrency
  std::vector<std::string> bench_problems{"nls1d", "nls2d", "cnls"};

  // Applies one key=value setting; throws std::invalid_argument on an
  // unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  // Flat key=value file; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
};

// Preset problem with the configured overrides applied and validated.
model::ProblemSpec make_problem(const ExperimentConfig& cfg);
std::vector<std::size_t> default_l_sweep(const std::string& preset);

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RomDetail {
  rom::RomReport report;
  double ham_error_initial = 0.0;
  double rom_error_rms = 0.0;
  double squared_error = 0.0;        // all components, NaN when not stored
  double bound_quantity_state = 0.0; // all components
};

struct ExperimentReport {
  std::vector<RomDetail> rows;
  std::vector<std::string> warnings;
  std::vector<std::size_t> ranks;  // numerical rank d per component
  std::string svd_method;
};

struct SvdBenchRow {
  std::string problem;
  std::size_t rows = 0, cols = 0, rank = 0;
  bool svd_vectors = false;
  double svd_time = 0.0, svd_accuracy = 0.0;
  double fsvd_time = 0.0, fsvd_accuracy = 0.0;
};

// Runs the preset end to end and writes the CSV outputs into cfg.output_dir.
// The svdbench preset is forwarded to run_svdbench.
ExperimentReport run_preset(const ExperimentConfig& cfg);

// Times the deterministic and randomized SVD of y (median of `repeats`).
SvdBenchRow benchmark_matrix(const std::string& name, const linalg::DenseMatrix& y,
                             std::size_t repeats, std::uint64_t seed);
std::vector<SvdBenchRow> run_svdbench(const ExperimentConfig& cfg);

struct ColumnTolerance {
  enum class Kind { abs, rel, factor };
  Kind kind = Kind::rel;
  double value = 1e-9;

  // "abs:0.5", "rel:1e-6" or "factor:3"
  static ColumnTolerance parse(const std::string& text);
  bool accepts(double produced, double golden) const;
};

struct DiffResult {
  bool pass = true;
  std::size_t cells = 0;
  std::size_t failures = 0;
  std::vector<std::string> messages;
};

// Cell-by-cell comparison of two CSV files with identical headers and row
// counts. Numeric cells use the column's tolerance (or `fallback`); other
// cells must match exactly.
DiffResult diff_report(const std::filesystem::path& produced, const std::filesystem::path& golden,
                       const std::map<std::string, ColumnTolerance>& tolerances,
                       ColumnTolerance fallback = {});

}  // namespace nlsrom::experiment
