#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stot/bounds.hpp"
#include "stot/curves.hpp"
#include "stot/estimators.hpp"

namespace stot {

enum class ExperimentKind { iid_rate, markov_rate, eta_sweep, curve, admissibility, bound_check };

/// Parsed experiment specification; see the README for the JSON schema.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::iid_rate;
  std::string name;
  std::optional<MarkovModel> model_x, model_y;
  std::optional<std::filesystem::path> x_path, y_path;  // data alternative
  std::optional<CostSpec> cost;  // defaults to Hamming on the X alphabet
  std::vector<std::int64_t> n_grid;
  int reps = 1;
  std::optional<ScheduleRule> schedule;
  std::vector<double> etas;
  int k = 1;          // fixed block length (eta_sweep)
  int k_max = 8;      // curve
  double eta = 0.0;   // curve / markov_rate
  std::int64_t n = 10000;  // sample length when data comes from models
  double p = 1.0;     // bound_check
  double c_constant = 1.0;
  std::uint64_t seed = 0;
};

ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct RunOptions {
  /// Fill the seconds column. Off by default so that outputs are
  /// byte-identical across runs; timings always go to the log stream.
  bool timing = false;
  /// Worker threads; 0 = STOT_THREADS env var, else hardware concurrency.
  int threads = 0;
};

struct RunSummary {
  std::int64_t cells_ok = 0;
  std::int64_t cells_failed = 0;
};

/// Runs the experiment and writes the CSV table: one row per (cell, rep)
/// plus mean and standard-error rows per cell. Cell failures are recorded
/// in the status column; the run only counts as failed when every cell
/// fails.
RunSummary run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_csv,
                          const RunOptions& options = {});

}  // namespace stot
