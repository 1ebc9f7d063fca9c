#include "stot/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "stot/ot_exact.hpp"
#include "stot/rng.hpp"

namespace stot {

EstimateResult estimate_oj(const SymbolSequence& x, const SymbolSequence& y,
                           const CostSpec& cost, const EstimatorConfig& config) {
  if (config.k < 1) throw std::invalid_argument("k must be >= 1");
  if (config.k > x.size() || config.k > y.size()) {
    throw std::invalid_argument("k exceeds sequence length");
  }
  if (config.eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  if (x.alphabet != cost.x_alphabet() || y.alphabet != cost.y_alphabet()) {
    throw std::invalid_argument("sequence alphabets do not match the cost");
  }

  const int k = config.k;
  const BlockMeasure mu = empirical_block_measure(x, k);
  const BlockMeasure nu = empirical_block_measure(y, k);
  const BlockCost oracle = k_step_oracle(cost);

  // eta = 0 forces the exact solver; eta > 0 needs the entropic one.
  const bool entropic = config.eta > 0.0;
  std::map<std::string, double> diagnostics;
  std::optional<BlockJoining> joining;
  if (entropic) {
    SinkhornOptions options;
    options.tol = config.sinkhorn_tol;
    options.max_iter = config.sinkhorn_max_iter;
    options.max_cells = config.max_cells;
    if (config.eta < 0.05 * k * cost.sup_norm()) {
      // Small eta relative to the k-step cost scale: start from the exact
      // dual potentials instead of annealing down.
      ExactOtOptions exact;
      exact.max_cells = config.max_cells;
      TransportPlan lp = solve_ot(mu, nu, oracle, exact);
      options.warm_start = std::make_pair(std::move(*lp.dual_row), std::move(*lp.dual_col));
    }
    EntropicPlan plan = solve_entropic_ot(mu, nu, oracle, config.eta, options);
    diagnostics["sinkhorn_converged"] = plan.status == SinkhornStatus::converged ? 1.0 : 0.0;
    diagnostics["sinkhorn_iterations"] = static_cast<double>(plan.iterations);
    diagnostics["marginal_violation"] = plan.marginal_violation;
    diagnostics["solver_value"] = plan.regularized_value / k;
    joining = BlockJoining::from_plan(plan);
  } else {
    ExactOtOptions options;
    options.max_cells = config.max_cells;
    TransportPlan plan = solve_ot(mu, nu, oracle, options);
    diagnostics["dual_gap"] = dual_gap(plan);
    diagnostics["solver_value"] = plan.cost_value / k;
    joining = BlockJoining::from_plan(plan, std::nullopt, 0.0);
  }

  // Report the estimate through the constructed joining; its expected cost
  // minus eta times its entropy rate equals k^{-1} T^eta of the empirical
  // measures (exactly for the exact path, within solver tolerance for the
  // entropic path).
  const double estimate =
      expected_cost(*joining, cost) - config.eta * block_entropy_rate(*joining);

  EstimateResult result{estimate, std::move(*joining), k, x.size(), y.size(), config.eta,
                        std::move(diagnostics)};
  return result;
}

double dbar_estimate(const SymbolSequence& x, const SymbolSequence& y, int k,
                     const EstimatorConfig& config) {
  if (x.alphabet != y.alphabet) {
    throw std::invalid_argument("dbar requires a common alphabet");
  }
  EstimatorConfig cfg = config;
  cfg.k = k;
  cfg.eta = 0.0;
  cfg.solver = SolverKind::exact;
  return estimate_oj(x, y, hamming_cost(x.alphabet), cfg).cost_estimate;
}

namespace {

// The schedules divide by log(|X| v |Y|); guard only the degenerate
// single-symbol case where the log vanishes.
double size_log(std::int64_t x_size, std::int64_t y_size) {
  const double m = static_cast<double>(std::max(x_size, y_size));
  const double lg = std::log(m);
  return lg > 0.0 ? lg : 1.0;
}

}  // namespace

Schedule k_schedule(std::int64_t n, const ScheduleRule& rule) {
  if (n < 2) throw std::invalid_argument("schedule needs n >= 2");
  const double logn = std::log(static_cast<double>(n));

  return std::visit(
      [&](const auto& r) -> Schedule {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FixedK>) {
          if (r.k < 1) throw std::invalid_argument("fixed k must be >= 1");
          return {r.k, 0};
        } else if constexpr (std::is_same_v<T, EntropyRule>) {
          if (r.eps <= 0.0 || r.h_x < 0.0 || r.h_y < 0.0) {
            throw std::invalid_argument("entropy rule needs eps > 0 and h >= 0");
          }
          const int k = static_cast<int>(logn / (std::max(r.h_x, r.h_y) + r.eps));
          return {std::max(k, 1), 0};
        } else if constexpr (std::is_same_v<T, MarkovRule>) {
          if (r.alpha <= 0.0 || r.alpha >= 1.0) {
            throw std::invalid_argument("markov rule needs alpha in (0, 1)");
          }
          if (r.rho <= 0.0 || r.rho >= 1.0) {
            throw std::invalid_argument("markov rule needs rho in (0, 1)");
          }
          const int k =
              std::max(1, static_cast<int>(r.alpha * logn / size_log(r.x_size, r.y_size)));
          int g = 0;
          const double arg = r.alpha * logn;
          if (arg > 1.0) {
            g = static_cast<int>(std::log(arg) / std::log(1.0 / r.rho));
          }
          g = std::clamp(g, 0, k - 1);
          return {k, g};
        } else {
          static_assert(std::is_same_v<T, GuardRule>);
          if (r.p < 1.0 || r.p >= 2.0) {
            throw std::invalid_argument("guard rule needs p in [1, 2)");
          }
          const double limit = (2.0 - r.p) * logn / size_log(r.x_size, r.y_size);
          int k = static_cast<int>(limit);
          if (static_cast<double>(k) == limit) --k;  // strictly below the limit
          return {std::max(k, 1), 0};
        }
      },
      rule);
}

std::vector<AdmissibilityRow> admissibility_diagnostic(
    const MarkovModel& model, const CostSpec& cost, const ScheduleRule& rule,
    std::span<const std::int64_t> n_grid, int reps, std::uint64_t rng_seed,
    std::int64_t atom_budget) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (cost.x_alphabet() != model.alphabet()) {
    throw std::invalid_argument("cost X alphabet does not match the model");
  }
  const CostSpec adapted = adapted_cost(cost, Side::x);
  const BlockCost oracle = k_step_oracle(adapted);

  std::vector<AdmissibilityRow> table;
  table.reserve(n_grid.size());
  for (std::size_t cell = 0; cell < n_grid.size(); ++cell) {
    const std::int64_t n = n_grid[cell];
    const Schedule sched = k_schedule(n, rule);
    const BlockMeasure exact = exact_block_law(model, sched.k, atom_budget);
    double total = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Rng stream = Rng::stream(rng_seed, cell, static_cast<std::uint64_t>(rep));
      const SymbolSequence seq = sample(model, n, stream.next_u64());
      const BlockMeasure empirical = empirical_block_measure(seq, sched.k);
      total += solve_ot(empirical, exact, oracle).cost_value / sched.k;
    }
    table.push_back({n, sched.k, total / reps});
  }
  return table;
}

}  // namespace stot
