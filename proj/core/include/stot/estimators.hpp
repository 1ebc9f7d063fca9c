#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stot/joining.hpp"
#include "stot/markov.hpp"

namespace stot {

enum class SolverKind { exact, entropic };

struct EstimatorConfig {
  int k = 1;
  double eta = 0.0;  // 0 forces the exact solver, > 0 the entropic one
  SolverKind solver = SolverKind::exact;
  int gap_g = 0;  // diagnostics only; estimate_oj builds gap-free joinings
  double sinkhorn_tol = 1e-9;
  int sinkhorn_max_iter = 1000000;
  std::int64_t max_cells = static_cast<std::int64_t>(20000) * 20000;
  std::uint64_t rng_seed = 0;
};

struct EstimateResult {
  double cost_estimate = 0.0;  // S-hat_{k,n} (or the eta-regularized variant)
  BlockJoining joining;
  int k_used = 0;
  std::int64_t n_x = 0, n_y = 0;
  double eta = 0.0;
  /// Solver diagnostics: dual gap for the exact path, Sinkhorn status,
  /// iterations and marginal violation for the entropic path.
  std::map<std::string, double> diagnostics;
};

/// Steps 1-3 end to end: empirical k-block measures, (entropic) optimal
/// coupling under c_k, and the stationary block joining built from it. The
/// reported estimate is the joining's expected cost minus eta times its
/// entropy rate, which coincides with k^{-1} T^eta_{c_k} of the empirical
/// measures.
EstimateResult estimate_oj(const SymbolSequence& x, const SymbolSequence& y,
                           const CostSpec& cost, const EstimatorConfig& config);

/// d-bar estimate: Hamming cost, eta = 0; value in [0, 1].
double dbar_estimate(const SymbolSequence& x, const SymbolSequence& y, int k,
                     const EstimatorConfig& config = {});

// ---- Block length schedules -------------------------------------------

struct FixedK {
  int k = 1;
};
/// k(n) = log n / (max(h_x, h_y) + eps); admissible for aperiodic chains
/// with the given entropy rates.
struct EntropyRule {
  double eps = 0.1;
  double h_x = 0.0;
  double h_y = 0.0;
};
/// k(n) = floor(alpha log n / log(|X| v |Y|)), g(n) = floor(log(alpha log n)
/// / log(1/rho)), the Markov-chain schedule.
struct MarkovRule {
  double alpha = 0.5;
  std::int64_t x_size = 2;
  std::int64_t y_size = 2;
  double rho = 0.5;
};
/// Largest k strictly below (2 - p) log n / log(|X| v |Y|), the consistency
/// guard on admissible growth.
struct GuardRule {
  double p = 1.0;
  std::int64_t x_size = 2;
  std::int64_t y_size = 2;
};
using ScheduleRule = std::variant<FixedK, EntropyRule, MarkovRule, GuardRule>;

struct Schedule {
  int k = 1;
  int g = 0;
};

Schedule k_schedule(std::int64_t n, const ScheduleRule& rule);

// ---- Admissibility diagnostic -----------------------------------------

struct AdmissibilityRow {
  std::int64_t n = 0;
  int k = 1;
  /// Mean over reps of (1/k) T_{(c_X)_k}(empirical law, exact law).
  double mean_distance = 0.0;
};

/// Empirical witness of c-admissibility: samples sequences from the model
/// and measures the adapted-cost transport distance between empirical and
/// exact k-block laws along the schedule.
std::vector<AdmissibilityRow> admissibility_diagnostic(
    const MarkovModel& model, const CostSpec& cost, const ScheduleRule& rule,
    std::span<const std::int64_t> n_grid, int reps, std::uint64_t rng_seed,
    std::int64_t atom_budget = std::int64_t(1) << 24);

}  // namespace stot
